use std::f64::consts::E;

use crate::bernstein::{log_grid, BernsteinFunction, Family};
use crate::error::{domain, Error, Result};
use crate::geometry::{dist, Domain};
use crate::levy_kernel::ProcessSpec;

use super::{boundary_product, Regime, ShapeValue};

const MAX_ITER: usize = 100;

fn halley(x: f64, mut w: f64) -> Result<f64> {
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(1e-300) {
            let residual = (w * w.exp() - x).abs();
            if residual <= 1e-12 * x.abs().max(1.0) {
                return Ok(w);
            }
        }
    }
    let residual = (w * w.exp() - x).abs();
    if residual <= 1e-12 * x.abs().max(1.0) {
        return Ok(w);
    }
    Err(Error::Convergence(format!("Lambert W did not converge at x={x}")))
}

fn branch_point_guess(x: f64, sign: f64) -> f64 {
    let q = sign * (2.0 * (E * x + 1.0)).max(0.0).sqrt();
    -1.0 + q - q * q / 3.0
}

/// Principal branch of the Lambert W function, `x = W(x) e^{W(x)}`, for `x ≥ -1/e`.
pub fn lambert_w(x: f64) -> Result<f64> {
    if !(x >= -1.0 / E) || !x.is_finite() {
        return domain(format!("Lambert W needs finite x >= -1/e, got {x}"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == -1.0 / E {
        return Ok(-1.0);
    }
    let w0 = if x < -0.25 {
        branch_point_guess(x, 1.0)
    } else if x < 3.0 {
        x.ln_1p() * (1.0 - x.ln_1p() / (2.0 + x.ln_1p()))
    } else {
        let l1 = x.ln();
        l1 - l1.ln()
    };
    halley(x, w0)
}

/// Lower branch `W_{-1}` on `[-1/e, 0)`, where `W ≤ -1`.
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    if !(x >= -1.0 / E && x < 0.0) {
        return domain(format!("lower Lambert branch needs x in [-1/e, 0), got {x}"));
    }
    if x == -1.0 / E {
        return Ok(-1.0);
    }
    let w0 = if x < -0.25 {
        branch_point_guess(x, -1.0)
    } else {
        let l1 = (-x).ln();
        l1 - (-l1).ln()
    };
    halley(x, w0)
}

// ln(1/Φ⁻¹(a)) up to constants: p W(p⁻¹ a^{-1/p}), on the branch where W ≥ 0 for p > 0
// and W ≤ -1 for p < 0.
fn log_inverse_scale(p: f64, a: f64) -> Result<f64> {
    let arg = (-(a.ln()) / p).exp() / p;
    let w = if p > 0.0 { lambert_w(arg)? } else { lambert_w_m1(arg)? };
    Ok(p * w)
}

/// Closed-form Green shape for `φ(λ) = λ^{1/2} (ln(1+λ))^p` in one dimension,
/// as a function of `a = a(x, y)` and `r = |x - y|`.
///
/// With `L = p W(p⁻¹ a^{-1/p})`:
/// `a/r ∧ (L^{-p} + ((L^{1-p} - ln(1/r)^{1-p})/(p-1))^+)` for `p ≠ 1` and
/// `a/r ∧ (1/L + log⁺(ln(1/r)/L))` for `p = 1`.
pub fn lambert_green_formula(p: f64, a: f64, r: f64) -> Result<ShapeValue> {
    if !(a > 0.0 && r > 0.0 && r < 1.0) || p == 0.0 || !p.is_finite() {
        return domain(format!("closed Green form needs a > 0, r in (0, 1), p != 0; got a={a}, r={r}, p={p}"));
    }
    let l = log_inverse_scale(p, a)?;
    if !(l > 0.0) {
        return domain(format!("a={a} is too large for the closed Green form (ln 1/Φ⁻¹(a) ≈ {l})"));
    }
    let log_r = (1.0 / r).ln();
    let interior = if p == 1.0 {
        1.0 / l + (log_r / l).ln().max(0.0)
    } else {
        l.powf(-p) + ((l.powf(1.0 - p) - log_r.powf(1.0 - p)) / (p - 1.0)).max(0.0)
    };
    let linear = a / r;
    Ok(if linear <= interior {
        ShapeValue { value: linear, regime: Regime::BoundaryDominated }
    } else {
        ShapeValue { value: interior, regime: Regime::InteriorDominated }
    })
}

/// The constant `c0 ∈ (0, 1)` in `c0 e^{-L(s)} ≤ Φ⁻¹(s) ≤ c0^{-1} e^{-L(s)}`,
/// estimated from a log grid of `s ∈ (0, Φ(1/2)]`.
pub fn lambert_c0(f: &BernsteinFunction) -> Result<f64> {
    let p = log_stable_exponent(f)?;
    let top = f.capital_phi(0.5)?;
    // Keep s^{-1/p} within range.
    let bottom = (top * 1e-40).max((1e-250f64).powf(p.abs()));
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for s in log_grid(bottom, top, 400) {
        let Ok(l) = log_inverse_scale(p, s) else { continue };
        let q = f.capital_phi_inv(s)? / (-l).exp();
        lo = lo.min(q);
        hi = hi.max(q);
    }
    if !(lo.is_finite() && hi > 0.0) {
        return Err(Error::Fit("no admissible points for the Lambert comparison".into()));
    }
    Ok(lo.min(1.0 / hi).min(1.0))
}

fn log_stable_exponent(f: &BernsteinFunction) -> Result<f64> {
    match f.family() {
        Family::LogStable { alpha, p } if alpha == 1.0 && p != 0.0 => Ok(p),
        other => domain(format!("closed Green form needs a log-perturbed exponent with alpha = 1 and p != 0, got {other:?}")),
    }
}

/// An interval domain checked against `Φ⁻¹(diam D) ∨ diam D < c0/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambertDomain {
    pub domain: Domain,
    pub p: f64,
    pub c0: f64,
    pub phi_inv_diam: f64,
}

impl LambertDomain {
    pub fn new(spec: &ProcessSpec, dom: &Domain) -> Result<Self> {
        if spec.dim() != 1 || dom.dim() != 1 {
            return domain("closed Green form is one-dimensional");
        }
        let f = spec.bernstein();
        let p = log_stable_exponent(f)?;
        let c0 = lambert_c0(f)?;
        let diam = dom.diam();
        let phi_inv_diam = f.capital_phi_inv(diam)?;
        if phi_inv_diam.max(diam) >= c0 / 2.0 {
            return domain(format!(
                "domain too large: Φ⁻¹(diam) ∨ diam = {} must be below c0/2 = {}",
                phi_inv_diam.max(diam),
                c0 / 2.0
            ));
        }
        Ok(Self { domain: dom.clone(), p, c0, phi_inv_diam })
    }

    pub fn green_shape(&self, spec: &ProcessSpec, x: &[f64], y: &[f64]) -> Result<ShapeValue> {
        if !self.domain.contains(x) || !self.domain.contains(y) {
            return domain("Green shapes need both points inside the domain");
        }
        let r = dist(x, y);
        if r == 0.0 {
            return domain("Green shapes are infinite on the diagonal");
        }
        let a = boundary_product(spec.bernstein(), &self.domain, x, y)?;
        lambert_green_formula(self.p, a, r)
    }
}

/// Closed-form Green shape for a log-perturbed exponent on a small interval domain.
pub fn lambert_green_shape(spec: &ProcessSpec, dom: &Domain, x: &[f64], y: &[f64]) -> Result<ShapeValue> {
    LambertDomain::new(spec, dom)?.green_shape(spec, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::green_shape;
    use proptest::prelude::*;

    // Newton on w e^w = x, independent of the Halley code.
    fn newton_w(x: f64, mut w: f64) -> f64 {
        for _ in 0..200 {
            w -= (w * w.exp() - x) / (w.exp() * (w + 1.0));
        }
        w
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w(1.0).unwrap() - 0.5671432904).abs() < 1e-9);
        assert!((lambert_w(1.0).unwrap() - newton_w(1.0, 0.5)).abs() < 1e-15);
        assert!((lambert_w(-1.0 / E).unwrap() + 1.0).abs() < 1e-12);
        assert!((lambert_w_m1(-0.1).unwrap() - newton_w(-0.1, -3.5)).abs() < 1e-12);
        assert!((lambert_w_m1(-(-2f64).exp() * 2.0).unwrap() + 2.0).abs() < 1e-12);
        assert!(lambert_w(-0.5).is_err());
        assert!(lambert_w_m1(0.1).is_err());
    }

    proptest! {
        #[test]
        fn lambert_residual_and_monotone(x in 0.0f64..1e12, y in 0.0f64..1e12) {
            let (wx, wy) = (lambert_w(x).unwrap(), lambert_w(y).unwrap());
            prop_assert!((wx * wx.exp() - x).abs() <= 1e-12 * x.max(1.0));
            if x < y { prop_assert!(wx <= wy); }
        }

        #[test]
        fn lower_branch_residual(x in -0.3678794f64..-1e-200) {
            let w = lambert_w_m1(x).unwrap();
            prop_assert!(w <= -1.0);
            prop_assert!((w * w.exp() - x).abs() <= 1e-12);
        }
    }

    #[test]
    fn formula_examples() {
        // a chosen so that L = 1 for p = 0.25: p W(4 a^{-4}) = 1 means W = 4, 4 a^{-4} = 4 e^4.
        let p = 0.25;
        let a = (-1.0f64).exp();
        let r = 0.01;
        let v = lambert_green_formula(p, a, r).unwrap();
        let tail = ((1.0 - (100f64).ln().powf(0.75)) / (p - 1.0)).max(0.0);
        let want = (a / r).min(1.0 + tail);
        assert!((v.value - want).abs() < 1e-12, "{v:?} vs {want}");
        let v = lambert_green_formula(1.0, 0.01, 0.001).unwrap();
        let l = lambert_w(100.0).unwrap();
        let want = (10.0f64).min(1.0 / l + ((1000f64).ln() / l).ln().max(0.0));
        assert!((v.value - want).abs() < 1e-12);
        assert!(lambert_green_formula(p, a, 1.5).is_err());
    }

    #[test]
    fn domain_precondition() {
        let spec = ProcessSpec::new(1, BernsteinFunction::log_stable(1.0, 0.25).unwrap()).unwrap();
        let c0 = lambert_c0(spec.bernstein()).unwrap();
        assert!(c0 > 0.0 && c0 < 1.0);
        let big: Domain = "intervals:(-1,1)".parse().unwrap();
        assert!(matches!(LambertDomain::new(&spec, &big), Err(Error::Domain(_))));
        let small = Domain::intervals(vec![(0.0, c0 / 5.0)]).unwrap();
        let e = LambertDomain::new(&spec, &small).unwrap();
        let (x, y) = ([c0 / 20.0], [c0 / 8.0]);
        let g = e.green_shape(&spec, &x, &y).unwrap();
        assert_eq!(g, e.green_shape(&spec, &y, &x).unwrap());
        let general = green_shape(&spec, &small, &x, &y).unwrap();
        let ratio = g.value / general.value;
        assert!(ratio > 0.05 && ratio < 20.0, "{ratio}");
        let stable = ProcessSpec::new(1, BernsteinFunction::stable(1.0).unwrap()).unwrap();
        assert!(lambert_green_shape(&stable, &small, &x, &y).is_err());
    }
}
