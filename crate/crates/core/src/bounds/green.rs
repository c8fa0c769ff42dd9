use crate::bernstein::{BernsteinFunction, ScalingGrid};
use crate::error::{domain, Error, Result};
use crate::geometry::{dist, Domain};
use crate::levy_kernel::ProcessSpec;
use crate::quad::{integrate_partitioned, Tolerance};

use super::{Regime, ShapeValue};

const DEFAULT_TOL: Tolerance = Tolerance::new(0.0, 1e-10);

/// Integral conditions under which the one-dimensional Green shape simplifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreenCondition {
    /// `∫_r^T Φ(s)/s² ds ≤ c Φ(r)/r` on `(0, T]`.
    UpperTail,
    /// `∫_0^r Φ(s)/s² ds ≤ c Φ(r)/r` on `(0, T]`.
    LowerTail,
}

/// Outcome of [`check_green_condition`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenConditionReport {
    pub which: GreenCondition,
    /// Smallest uniform constant found; infinite when the condition fails.
    pub c: f64,
    pub pass: bool,
}

/// `a(x, y) = Φ(δ_D(x))^{1/2} Φ(δ_D(y))^{1/2}`.
pub fn boundary_product(f: &BernsteinFunction, dom: &Domain, x: &[f64], y: &[f64]) -> Result<f64> {
    let (dx, dy) = (dom.delta(x), dom.delta(y));
    if dx == 0.0 || dy == 0.0 {
        return domain("boundary product needs both points inside the domain");
    }
    Ok((f.capital_phi(dx)? * f.capital_phi(dy)?).sqrt())
}

// ∫_lo^hi Φ(s)/s² ds through s = lo e^u, on unit panels in u.
fn phi_over_s2(f: &BernsteinFunction, lo: f64, hi: f64, tol: Tolerance) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let span = (hi / lo).ln();
    let g = |u: f64| {
        let s = lo * u.exp();
        f.capital_phi_unchecked(s) / s
    };
    let n = span.ceil().max(1.0) as usize;
    let breaks: Vec<f64> = (0..=n).map(|k| span * k as f64 / n as f64).collect();
    Ok(integrate_partitioned(g, &breaks, tol)?.value)
}

/// `h_T(a, r)` by direct quadrature of its defining integral.
pub fn h_t_numeric(p: &ProcessSpec, a: f64, r: f64, t_cap: f64) -> Result<f64> {
    h_t_numeric_with(p, a, r, t_cap, DEFAULT_TOL)
}

/// [`h_t_numeric`] with an explicit quadrature tolerance.
pub fn h_t_numeric_with(p: &ProcessSpec, a: f64, r: f64, t_cap: f64, tol: Tolerance) -> Result<f64> {
    let f = p.bernstein();
    if !(a > 0.0 && r > 0.0 && t_cap > 0.0) {
        return domain(format!("h_T needs a, r, T > 0, got a={a}, r={r}, T={t_cap}"));
    }
    if r > f.capital_phi_inv(t_cap / 2.0)? * (1.0 + 1e-12) {
        return domain(format!("h_T needs r <= Φ⁻¹(T/2), got r={r}, T={t_cap}"));
    }
    let pr = f.capital_phi(r)?;
    let lo = pr / t_cap;
    // u = e^v; the integrand then reads (1 ∧ u a/Φ(r)) / (u Φ⁻¹(Φ(r)/u)).
    let g = |v: f64| {
        let u = v.exp();
        let inv = f.capital_phi_inv(pr / u).unwrap_or(f64::NAN);
        (u * a / pr).min(1.0) / (u * inv)
    };
    let (v0, v1) = (lo.ln(), 0.0);
    let mut breaks = vec![v0];
    let kink = (pr / a).ln();
    let n = (v1 - v0).ceil().max(1.0) as usize;
    for k in 1..n {
        breaks.push(v0 + (v1 - v0) * k as f64 / n as f64);
    }
    if kink > v0 && kink < v1 {
        breaks.push(kink);
    }
    breaks.push(v1);
    breaks.sort_by(f64::total_cmp);
    let integral = integrate_partitioned(g, &breaks, tol)?.value;
    Ok(a + pr * integral + pr / r * (a / pr).min(1.0))
}

/// `a/r ∧ (a/Φ⁻¹(a) + (∫_r^{Φ⁻¹(a)} Φ(s)/s² ds)^+)`.
pub fn h_t_closed(p: &ProcessSpec, a: f64, r: f64) -> Result<ShapeValue> {
    if !(a > 0.0 && r > 0.0) {
        return domain(format!("closed h_T needs a, r > 0, got a={a}, r={r}"));
    }
    let f = p.bernstein();
    let inv = f.capital_phi_inv(a)?;
    let linear = a / r;
    let interior = a / inv + phi_over_s2(f, r, inv, DEFAULT_TOL)?;
    Ok(if linear <= interior {
        ShapeValue { value: linear, regime: Regime::BoundaryDominated }
    } else {
        ShapeValue { value: interior, regime: Regime::InteriorDominated }
    })
}

fn check_pair(dom: &Domain, x: &[f64], y: &[f64]) -> Result<f64> {
    if !dom.contains(x) || !dom.contains(y) {
        return domain("Green shapes need both points inside the domain");
    }
    let r = dist(x, y);
    if r == 0.0 {
        return domain("Green shapes are infinite on the diagonal");
    }
    Ok(r)
}

/// Green function shape; the one-dimensional form for `d = 1`,
/// `Φ(r)/r^d (1 ∧ a/Φ(r))` for `d ≥ 2`.
pub fn green_shape(p: &ProcessSpec, dom: &Domain, x: &[f64], y: &[f64]) -> Result<ShapeValue> {
    let r = check_pair(dom, x, y)?;
    let f = p.bernstein();
    let a = boundary_product(f, dom, x, y)?;
    if p.dim() == 1 {
        return h_t_closed(p, a, r);
    }
    let pr = f.capital_phi(r)?;
    let base = pr / r.powi(p.dim() as i32);
    Ok(if a < pr {
        ShapeValue { value: base * a / pr, regime: Regime::BoundaryDominated }
    } else {
        ShapeValue { value: base, regime: Regime::InteriorDominated }
    })
}

/// Simplified one-dimensional Green shape under an integral condition.
///
/// The condition is checked on `(0, diam D]` first.
pub fn green_shape_special(
    p: &ProcessSpec,
    dom: &Domain,
    x: &[f64],
    y: &[f64],
    which: GreenCondition,
) -> Result<ShapeValue> {
    if p.dim() != 1 {
        return domain("simplified Green shapes are one-dimensional");
    }
    let r = check_pair(dom, x, y)?;
    let report = check_green_condition(p, which, dom.diam())?;
    if !report.pass {
        return Err(Error::Regime(format!("condition {which:?} fails for {}", p.bernstein())));
    }
    let f = p.bernstein();
    let a = boundary_product(f, dom, x, y)?;
    let pr = f.capital_phi(r)?;
    Ok(match which {
        GreenCondition::UpperTail => {
            if a < pr {
                ShapeValue { value: a / r, regime: Regime::BoundaryDominated }
            } else {
                ShapeValue { value: pr / r, regime: Regime::InteriorDominated }
            }
        }
        GreenCondition::LowerTail => {
            let interior = a / f.capital_phi_inv(a)?;
            let linear = a / r;
            if linear <= interior {
                ShapeValue { value: linear, regime: Regime::BoundaryDominated }
            } else {
                ShapeValue { value: interior, regime: Regime::InteriorDominated }
            }
        }
    })
}

/// Sweeps `r` over `(0, T]` and reports the smallest constant in the chosen condition.
pub fn check_green_condition(p: &ProcessSpec, which: GreenCondition, t_cap: f64) -> Result<GreenConditionReport> {
    if !(t_cap > 0.0) {
        return domain(format!("condition check needs T > 0, got {t_cap}"));
    }
    let f = p.bernstein();
    let tol = Tolerance::new(0.0, 1e-12);
    let ratio = |r: f64, integral: f64| integral / (f.capital_phi_unchecked(r) / r);
    match which {
        GreenCondition::UpperTail => {
            // One point per decade; a bounded ratio must settle geometrically.
            let decades = 14;
            let mut vals = Vec::with_capacity(decades + 1);
            for k in 0..=decades {
                let r = t_cap * 10f64.powi(-(k as i32));
                vals.push(ratio(r, phi_over_s2(f, r, t_cap, tol)?));
            }
            let steps: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
            let tail = &steps[steps.len() - 4..];
            let q = tail
                .windows(2)
                .map(|w| if w[0].abs() < 1e-300 { 0.0 } else { w[1] / w[0] })
                .fold(0.0f64, f64::max);
            let settled = tail.iter().all(|s| s.abs() <= 1e-14 * vals[vals.len() - 1].abs());
            let max_seen = vals.iter().cloned().fold(0.0, f64::max);
            if settled {
                return Ok(GreenConditionReport { which, c: max_seen, pass: true });
            }
            if q <= 0.9 {
                let last = vals[vals.len() - 1];
                let extrapolated = last + steps[steps.len() - 1].max(0.0) * q / (1.0 - q);
                Ok(GreenConditionReport { which, c: max_seen.max(extrapolated), pass: true })
            } else {
                Ok(GreenConditionReport { which, c: f64::INFINITY, pass: false })
            }
        }
        GreenCondition::LowerTail => {
            let mut c: f64 = 0.0;
            for k in 0..=40 {
                let r = t_cap * 10f64.powf(-(k as f64) / 4.0);
                let Some(integral) = integral_from_zero(f, r, tol)? else {
                    return Ok(GreenConditionReport { which, c: f64::INFINITY, pass: false });
                };
                c = c.max(ratio(r, integral));
            }
            Ok(GreenConditionReport { which, c, pass: true })
        }
    }
}

// ∫_0^r Φ(s)/s² ds with s = r e^{-u}, or None when it does not converge.
fn integral_from_zero(f: &BernsteinFunction, r: f64, tol: Tolerance) -> Result<Option<f64>> {
    let g = |u: f64| {
        let s = r * (-u).exp();
        f.capital_phi_unchecked(s) / s
    };
    // 1/s² must stay finite in Φ(s) = 1/φ(s^{-2}).
    let u_cap = (r / 1e-150).ln();
    let mut total = 0.0;
    let mut u = 0.0;
    let mut chunk = 16.0;
    let mut previous = f64::INFINITY;
    while u < u_cap {
        let hi = (u + chunk).min(u_cap);
        let n = (hi - u).ceil() as usize;
        let breaks: Vec<f64> = (0..=n).map(|k| u + (hi - u) * k as f64 / n as f64).collect();
        let piece = integrate_partitioned(g, &breaks, tol)?.value;
        total += piece;
        if piece <= 1e-13 * total {
            return Ok(Some(total));
        }
        // Chunks double in length; a convergent tail shrinks them.
        if piece >= previous * 0.999 && u > 64.0 {
            return Ok(None);
        }
        previous = piece;
        u = hi;
        chunk *= 2.0;
    }
    Ok(None)
}

/// The horizon `T` used for Green function shapes, with the constants behind it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenHorizon {
    pub t: f64,
    pub c_t: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Largest admissible `a`: `(1/2 ∧ (2 C_T)^{-2δ2}) T`.
    pub a_max: f64,
    /// Largest admissible `r`: `Φ⁻¹(T/2)`.
    pub r_max: f64,
}

/// Scaling constants `δ1, δ2, C_T` of `Φ⁻¹` on `(0, T]` and the admissible `(a, r)` box for `h_T`.
pub fn horizon_constants(p: &ProcessSpec, t: f64) -> Result<GreenHorizon> {
    if !(t > 0.0) {
        return domain(format!("horizon must be positive, got {t}"));
    }
    let f = p.bernstein();
    let r0 = f.capital_phi_inv(t)?.powi(-2);
    let cert = f.certify_scaling(r0, 1e6, r0 * 1e12, ScalingGrid::default())?;
    let (d1, d2) = (cert.delta1, cert.delta2);
    let grid = crate::bernstein::log_grid(t * 1e-10, t, 48);
    let inv: Vec<f64> = grid.iter().map(|&s| f.capital_phi_inv(s)).collect::<Result<_>>()?;
    let mut c_t: f64 = 1.0;
    for i in 0..grid.len() {
        for k in i..grid.len() {
            let q = grid[i] / grid[k];
            let ratio = inv[i] / inv[k];
            c_t = c_t.max(q.powf(1.0 / (2.0 * d1)) / ratio).max(ratio / q.powf(1.0 / (2.0 * d2)));
        }
    }
    let a_max = 0.5f64.min((2.0 * c_t).powf(-2.0 * d2)) * t;
    Ok(GreenHorizon { t, c_t, delta1: d1, delta2: d2, a_max, r_max: f.capital_phi_inv(t / 2.0)? })
}

/// `T = (2 ∨ (2 C_T)^{2δ2}) Φ(diam D)` with `C_T` the extremal ratio in
/// `C_T^{-1}(r/R)^{1/(2δ1)} ≤ Φ⁻¹(r)/Φ⁻¹(R) ≤ C_T (r/R)^{1/(2δ2)}` over a grid in `(0, T]`.
pub fn green_horizon(p: &ProcessSpec, diam: f64) -> Result<GreenHorizon> {
    if !(diam > 0.0) {
        return domain(format!("horizon needs a positive diameter, got {diam}"));
    }
    let f = p.bernstein();
    let base = f.capital_phi(diam)?;
    let mut t = 2.0 * base;
    for _ in 0..60 {
        let h = horizon_constants(p, t)?;
        let next = 2f64.max((2.0 * h.c_t).powf(2.0 * h.delta2)) * base;
        if next <= t * (1.0 + 1e-10) {
            return Ok(h);
        }
        t = next;
    }
    Err(Error::Convergence("horizon T did not stabilise".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::BernsteinFunction;

    fn stable(alpha: f64, d: usize) -> ProcessSpec {
        ProcessSpec::new(d, BernsteinFunction::stable(alpha).unwrap()).unwrap()
    }

    // Closed form of h_T for Φ(r) = r.
    fn cauchy_h(a: f64, r: f64, t: f64) -> f64 {
        let integral = if a <= r {
            a / r * (1.0 - r / t)
        } else if a >= t {
            (t / r).ln()
        } else {
            1.0 - a / t + (a / r).ln()
        };
        a + integral + (a / r).min(1.0)
    }

    #[test]
    fn h_t_numeric_matches_cauchy_antiderivative() {
        let p = stable(1.0, 1);
        let t = 4.0;
        for &a in &[1e-3, 0.05, 0.3, 1.0, 1.9] {
            for &r in &[1e-3, 0.02, 0.4, 1.5] {
                let got = h_t_numeric(&p, a, r, t).unwrap();
                let want = cauchy_h(a, r, t);
                assert!((got / want - 1.0).abs() < 1e-9, "a={a} r={r}: {got} vs {want}");
            }
        }
        assert!(h_t_numeric(&p, 0.1, 2.5, t).is_err());
    }

    #[test]
    fn h_t_linear_in_small_a() {
        let p = ProcessSpec::new(1, BernsteinFunction::relativistic(1.0, 1.0).unwrap()).unwrap();
        let r = 0.3;
        let pr = p.bernstein().capital_phi(r).unwrap();
        let a = pr / 10.0;
        let h1 = h_t_numeric(&p, a, r, 3.0).unwrap();
        let h2 = h_t_numeric(&p, 2.0 * a, r, 3.0).unwrap();
        assert!((h2 / h1 - 2.0).abs() < 0.02);
        let tiny = h_t_numeric(&p, 1e-12, r, 3.0).unwrap();
        assert!(tiny < 1e-10);
    }

    #[test]
    fn h_t_closed_examples() {
        let p = stable(1.0, 1);
        assert!((h_t_closed(&p, 0.01, 0.1).unwrap().value - 0.1).abs() < 1e-14);
        let eq = h_t_closed(&p, 0.1, 0.1).unwrap();
        assert!((eq.value - 1.0).abs() < 1e-12);
        let v = h_t_closed(&p, 0.5, 0.1).unwrap();
        assert!((v.value - (1.0 + 5f64.ln())).abs() < 1e-10);
        assert_eq!(v.regime, Regime::InteriorDominated);
    }

    #[test]
    fn green_shape_examples() {
        let p2 = stable(1.0, 2);
        let ball = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        let g = green_shape(&p2, &ball, &[0.75, 0.0], &[0.0, 0.75]).unwrap();
        // δ = 0.25 at both points, |x - y| = 0.75√2; check against the formula.
        let r = 0.75 * 2f64.sqrt();
        let want = r / (r * r) * (0.25 / r).min(1.0);
        assert!((g.value - want).abs() < 1e-14);
        let g = green_shape(&p2, &ball, &[0.75, 0.0], &[0.25, 0.0]).unwrap();
        let a = (0.25f64 * 0.75).sqrt();
        assert!((g.value - (0.5 / 0.25) * (a / 0.5).min(1.0)).abs() < 1e-14);

        let p1 = stable(1.0, 1);
        let iv: Domain = "intervals:(-1,1)".parse().unwrap();
        let g = green_shape(&p1, &iv, &[-0.5], &[0.5]).unwrap();
        assert!((g.value - 0.5).abs() < 1e-14);
        assert_eq!(green_shape(&p1, &iv, &[0.5], &[-0.5]).unwrap(), g);
        assert!(green_shape(&p1, &iv, &[0.5], &[0.5]).is_err());
        assert!(green_shape(&p1, &iv, &[0.5], &[1.5]).is_err());
    }

    #[test]
    fn green_conditions_follow_scaling_index() {
        let low = stable(0.8, 1);
        let high = stable(1.5, 1);
        let r = check_green_condition(&low, GreenCondition::UpperTail, 2.0).unwrap();
        assert!(r.pass && (r.c - 5.0).abs() < 0.05, "{r:?}");
        assert!(!check_green_condition(&low, GreenCondition::LowerTail, 2.0).unwrap().pass);
        let r = check_green_condition(&high, GreenCondition::LowerTail, 2.0).unwrap();
        assert!(r.pass && (r.c - 2.0).abs() < 1e-6, "{r:?}");
        assert!(!check_green_condition(&high, GreenCondition::UpperTail, 2.0).unwrap().pass);
        let cauchy = stable(1.0, 1);
        assert!(!check_green_condition(&cauchy, GreenCondition::UpperTail, 2.0).unwrap().pass);
        assert!(!check_green_condition(&cauchy, GreenCondition::LowerTail, 2.0).unwrap().pass);
    }

    #[test]
    fn special_shapes_dispatch() {
        let iv: Domain = "intervals:(-1,1)".parse().unwrap();
        let low = stable(0.8, 1);
        let (x, y) = ([0.6], [-0.2]);
        let g = green_shape_special(&low, &iv, &x, &y, GreenCondition::UpperTail).unwrap();
        let f = low.bernstein();
        let a = boundary_product(f, &iv, &x, &y).unwrap();
        let pr = f.capital_phi(0.8).unwrap();
        assert!((g.value - pr / 0.8 * (a / pr).min(1.0)).abs() < 1e-14);
        assert!(matches!(
            green_shape_special(&low, &iv, &x, &y, GreenCondition::LowerTail),
            Err(Error::Regime(_))
        ));

        let high = stable(1.5, 1);
        let f = high.bernstein();
        // a ≤ Φ(r): the linear branch a/r.
        let (x, y) = ([0.9], [-0.9]);
        let a = boundary_product(f, &iv, &x, &y).unwrap();
        assert!(a <= f.capital_phi(1.8).unwrap());
        let g = green_shape_special(&high, &iv, &x, &y, GreenCondition::LowerTail).unwrap();
        assert!((g.value - a / 1.8).abs() < 1e-14);
        // a ≥ Φ(r): a/Φ⁻¹(a).
        let (x, y) = ([0.05], [-0.05]);
        let a = boundary_product(f, &iv, &x, &y).unwrap();
        let g = green_shape_special(&high, &iv, &x, &y, GreenCondition::LowerTail).unwrap();
        assert!((g.value - a / f.capital_phi_inv(a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn horizon_for_stable_is_explicit() {
        let h = green_horizon(&stable(1.5, 1), 2.0).unwrap();
        assert!((h.c_t - 1.0).abs() < 1e-9);
        assert!((h.t - 2f64.powf(1.5) * 2f64.powf(1.5)).abs() < 1e-9);
        let h = green_horizon(&stable(0.8, 1), 2.0).unwrap();
        assert!((h.t - 2.0 * 2f64.powf(0.8)).abs() < 1e-9);
        let rel = ProcessSpec::new(1, BernsteinFunction::relativistic(1.0, 1.0).unwrap()).unwrap();
        let h = green_horizon(&rel, 2.0).unwrap();
        assert!(h.c_t >= 1.0 && h.t >= 2.0 * rel.bernstein().capital_phi(2.0).unwrap());
    }
}
