//! Constant-free shapes of the two-sided heat kernel, survival and Green
//! function estimates.
//!
//! Every estimate here holds only up to multiplicative constants, so each
//! function returns the bare expression; comparison against data is done
//! through ratios in [`crate::verify`].

mod green;
mod lambert;

pub use green::{
    boundary_product, check_green_condition, green_horizon, green_shape, green_shape_special,
    h_t_closed, h_t_numeric, horizon_constants, h_t_numeric_with, GreenCondition, GreenConditionReport,
    GreenHorizon,
};
pub use lambert::{
    lambert_c0, lambert_green_formula, lambert_green_shape, lambert_w, lambert_w_m1,
    LambertDomain,
};

use crate::error::{domain, Result};
use crate::geometry::{dist, Domain};
use crate::levy_kernel::ProcessSpec;

/// Which branch of a minimum produced a [`ShapeValue`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `Φ⁻¹(t)^{-d}` was the smaller term.
    OnDiagonal,
    /// `t j(r)` was the smaller term.
    OffDiagonal,
    /// A Green shape where the boundary factor `a(x, y)` was active.
    BoundaryDominated,
    /// A Green shape where the interior term was active.
    InteriorDominated,
}

/// Value of a shape together with the active branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeValue {
    pub value: f64,
    pub regime: Regime,
}

/// `Φ⁻¹(t)^{-d} ∧ t j_X(r)`.
pub fn global_shape(p: &ProcessSpec, t: f64, r: f64) -> Result<ShapeValue> {
    if !(t > 0.0) || !(r >= 0.0) {
        return domain(format!("global shape needs t > 0, r >= 0, got t={t}, r={r}"));
    }
    let diag = p.bernstein().capital_phi_inv(t)?.powi(-(p.dim() as i32));
    if r == 0.0 {
        return Ok(ShapeValue { value: diag, regime: Regime::OnDiagonal });
    }
    let off = t * p.jump_density_jx(r)?;
    Ok(if diag <= off {
        ShapeValue { value: diag, regime: Regime::OnDiagonal }
    } else {
        ShapeValue { value: off, regime: Regime::OffDiagonal }
    })
}

fn check_probability(v: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        domain(format!("{name} must be a probability, got {v}"))
    }
}

/// `P_x(τ > t) P_y(τ > t) (Φ⁻¹(t)^{-d} ∧ t j_X(|x-y|))` from given survival values.
pub fn factorization_shape(
    p: &ProcessSpec,
    t: f64,
    x: &[f64],
    y: &[f64],
    surv_x: f64,
    surv_y: f64,
) -> Result<ShapeValue> {
    check_probability(surv_x, "survival at x")?;
    check_probability(surv_y, "survival at y")?;
    let g = global_shape(p, t, dist(x, y))?;
    Ok(ShapeValue { value: surv_x * surv_y * g.value, regime: g.regime })
}

/// Boundary factor `(1 ∧ Φ(δ_D(x))/t)^{1/2}`; zero outside `D`.
pub fn survival_shape(p: &ProcessSpec, dom: &Domain, t: f64, x: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("survival shape needs t > 0, got {t}"));
    }
    let delta = dom.delta(x);
    if delta == 0.0 {
        return Ok(0.0);
    }
    Ok((p.bernstein().capital_phi(delta)? / t).min(1.0).sqrt())
}

/// Boundary-decay form of the Dirichlet heat kernel in a `C^{1,1}` set.
pub fn c11_shape(p: &ProcessSpec, dom: &Domain, t: f64, x: &[f64], y: &[f64]) -> Result<ShapeValue> {
    if !dom.contains(x) || !dom.contains(y) {
        return domain("c11 shape needs both points inside the domain");
    }
    let g = global_shape(p, t, dist(x, y))?;
    let bx = survival_shape(p, dom, t, x)?;
    let by = survival_shape(p, dom, t, y)?;
    Ok(ShapeValue { value: bx * by * g.value, regime: g.regime })
}

/// Large-time form `e^{-λ1 t} Φ(δ_D(x))^{1/2} Φ(δ_D(y))^{1/2}`.
pub fn large_time_shape(
    p: &ProcessSpec,
    dom: &Domain,
    t: f64,
    x: &[f64],
    y: &[f64],
    lambda1: f64,
) -> Result<ShapeValue> {
    if !(t > 0.0 && lambda1 > 0.0) {
        return domain(format!("large-time shape needs t > 0 and λ1 > 0, got {t}, {lambda1}"));
    }
    let root = |z: &[f64]| -> Result<f64> {
        let delta = dom.delta(z);
        if delta == 0.0 {
            Ok(0.0)
        } else {
            Ok(p.bernstein().capital_phi(delta)?.sqrt())
        }
    };
    let value = (-lambda1 * t).exp() * root(x)? * root(y)?;
    Ok(ShapeValue { value, regime: Regime::OnDiagonal })
}

/// Large-time form `P_x(τ > 1) P_y(τ > 1) e^{-λ1 t}` from given survival values.
pub fn large_time_survival_shape(t: f64, surv1_x: f64, surv1_y: f64, lambda1: f64) -> Result<ShapeValue> {
    check_probability(surv1_x, "survival at x")?;
    check_probability(surv1_y, "survival at y")?;
    if !(t > 0.0 && lambda1 > 0.0) {
        return domain(format!("large-time shape needs t > 0 and λ1 > 0, got {t}, {lambda1}"));
    }
    Ok(ShapeValue { value: surv1_x * surv1_y * (-lambda1 * t).exp(), regime: Regime::OnDiagonal })
}

/// The three members of the product inequality
/// `½(1 ∧ r²√(ΦxΦy)/Φxy) ≤ (1 ∧ r√Φx/√Φxy)(1 ∧ r√Φy/√Φxy) ≤ 1 ∧ r²√(ΦxΦy)/Φxy`.
pub fn product_bounds(r: f64, phi_dx: f64, phi_dy: f64, phi_xy: f64) -> Result<(f64, f64, f64)> {
    if !(r > 0.0 && r <= 1.0) || !(phi_dx >= 0.0 && phi_dy >= 0.0 && phi_xy > 0.0) {
        return domain(format!(
            "product bounds need r in (0, 1] and nonnegative Φ values, got r={r}, {phi_dx}, {phi_dy}, {phi_xy}"
        ));
    }
    let upper = (r * r * (phi_dx * phi_dy).sqrt() / phi_xy).min(1.0);
    let fx = (r * phi_dx.sqrt() / phi_xy.sqrt()).min(1.0);
    let fy = (r * phi_dy.sqrt() / phi_xy.sqrt()).min(1.0);
    Ok((0.5 * upper, fx * fy, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::BernsteinFunction;
    use std::f64::consts::PI;

    fn cauchy() -> ProcessSpec {
        ProcessSpec::new(1, BernsteinFunction::stable(1.0).unwrap()).unwrap()
    }

    #[test]
    fn global_examples() {
        let p = cauchy();
        let g = global_shape(&p, 1.0, 0.0).unwrap();
        assert_eq!((g.value, g.regime), (1.0, Regime::OnDiagonal));
        let g = global_shape(&p, 1.0, 10.0).unwrap();
        assert!((g.value - 1.0 / (PI * 100.0)).abs() < 1e-15);
        assert_eq!(g.regime, Regime::OffDiagonal);
        // Branches meet where t j(r) = Φ⁻¹(t)^{-1}, i.e. r = 1/√π at t = 1.
        let cross = 1.0 / PI.sqrt();
        let below = global_shape(&p, 1.0, cross * 0.999).unwrap();
        let above = global_shape(&p, 1.0, cross * 1.001).unwrap();
        assert_eq!(below.regime, Regime::OnDiagonal);
        assert_eq!(above.regime, Regime::OffDiagonal);
        assert!((above.value - 1.0).abs() < 3e-3);
    }

    #[test]
    fn factorization_and_c11() {
        let p = cauchy();
        let dom: Domain = "intervals:(-1,1)".parse().unwrap();
        let g = global_shape(&p, 0.3, 0.4).unwrap();
        let f = factorization_shape(&p, 0.3, &[0.1], &[0.5], 1.0, 1.0).unwrap();
        assert_eq!(f.value, g.value);
        assert_eq!(factorization_shape(&p, 0.3, &[0.1], &[0.5], 0.0, 0.7).unwrap().value, 0.0);
        assert!(factorization_shape(&p, 0.3, &[0.1], &[0.5], 1.2, 0.7).is_err());

        let c = c11_shape(&p, &dom, 0.01, &[0.0], &[0.0]).unwrap();
        assert!((c.value - 100.0).abs() < 1e-10);
        let c = c11_shape(&p, &dom, 0.01, &[0.995], &[0.995]).unwrap();
        assert!((c.value - 0.5 * 100.0).abs() < 1e-10);
        assert!((survival_shape(&p, &dom, 0.01, &[0.995]).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(c11_shape(&p, &dom, 0.01, &[1.5], &[0.0]).is_err());
    }

    #[test]
    fn survival_examples() {
        let p = cauchy();
        let dom: Domain = "intervals:(-1,1)".parse().unwrap();
        assert_eq!(survival_shape(&p, &dom, 0.1, &[0.0]).unwrap(), 1.0);
        assert!((survival_shape(&p, &dom, 1.0, &[0.75]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(survival_shape(&p, &dom, 1.0, &[3.0]).unwrap(), 0.0);
    }

    #[test]
    fn large_time_form() {
        let p = cauchy();
        let dom: Domain = "intervals:(-1,1)".parse().unwrap();
        let a = large_time_shape(&p, &dom, 3.0, &[0.2], &[-0.4], 1.2).unwrap().value;
        let b = large_time_shape(&p, &dom, 6.0, &[0.2], &[-0.4], 1.2).unwrap().value;
        assert!((b / a - (-1.2f64 * 3.0).exp()).abs() < 1e-14);
        assert_eq!(large_time_shape(&p, &dom, 3.0, &[1.0], &[0.0], 1.2).unwrap().value, 0.0);
    }

    #[test]
    fn product_bounds_examples() {
        assert_eq!(product_bounds(1.0, 1.0, 1.0, 1.0).unwrap(), (0.5, 1.0, 1.0));
        let (l, m, u) = product_bounds(0.5, 1e-300, 0.3, 0.2).unwrap();
        assert!(l <= m && m <= u && u < 1e-140);
    }

    #[test]
    fn shapes_are_symmetric() {
        let p = cauchy();
        let dom: Domain = "intervals:(-1,1)".parse().unwrap();
        let (x, y) = ([0.3], [-0.8]);
        assert_eq!(c11_shape(&p, &dom, 0.2, &x, &y).unwrap(), c11_shape(&p, &dom, 0.2, &y, &x).unwrap());
        assert_eq!(
            large_time_shape(&p, &dom, 4.0, &x, &y, 1.0).unwrap(),
            large_time_shape(&p, &dom, 4.0, &y, &x, 1.0).unwrap()
        );
    }
}
