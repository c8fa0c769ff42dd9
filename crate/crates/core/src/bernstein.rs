//! Complete Bernstein functions used as Laplace exponents of subordinators.
//!
//! Every family here has zero drift and zero killing, so
//! `φ(λ) = ∫ (1 - e^{-λt}) μ(t) dt` with a completely monotone density `μ`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use puruspe::{gamma, gammp, gammq};

use crate::error::{domain, Error, Result};
use crate::laplace::{talbot, TALBOT_NODES};

/// Parameterised family of a [`BernsteinFunction`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// `λ^{α/2}`.
    Stable { alpha: f64 },
    /// `(λ + m^{2/α})^{α/2} - m`.
    Relativistic { alpha: f64, m: f64 },
    /// `λ^{α/2} + λ^{β/2}` with `β < α`.
    Mixed { alpha: f64, beta: f64 },
    /// `λ^{α/2} (log(1 + λ))^p`.
    LogStable { alpha: f64, p: f64 },
}

/// A validated complete Bernstein function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernsteinFunction {
    family: Family,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (0, 2), got {alpha}"))
    }
}

impl BernsteinFunction {
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::Stable { alpha } => check_alpha(alpha)?,
            Family::Relativistic { alpha, m } => {
                check_alpha(alpha)?;
                if !(m.is_finite() && m > 0.0) {
                    return domain(format!("mass must be positive, got {m}"));
                }
            }
            Family::Mixed { alpha, beta } => {
                check_alpha(alpha)?;
                if !(beta > 0.0 && beta < alpha) {
                    return domain(format!("beta must lie in (0, alpha), got {beta}"));
                }
            }
            Family::LogStable { alpha, p } => {
                check_alpha(alpha)?;
                if !(p >= -alpha / 2.0 && p <= (2.0 - alpha) / 2.0) {
                    return domain(format!(
                        "p must lie in [{}, {}], got {p}",
                        -alpha / 2.0,
                        (2.0 - alpha) / 2.0
                    ));
                }
            }
        }
        Ok(Self { family })
    }

    pub fn stable(alpha: f64) -> Result<Self> {
        Self::new(Family::Stable { alpha })
    }

    pub fn relativistic(alpha: f64, m: f64) -> Result<Self> {
        Self::new(Family::Relativistic { alpha, m })
    }

    pub fn mixed(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Mixed { alpha, beta })
    }

    pub fn log_stable(alpha: f64, p: f64) -> Result<Self> {
        Self::new(Family::LogStable { alpha, p })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The leading index `α`.
    pub fn alpha(&self) -> f64 {
        match self.family {
            Family::Stable { alpha }
            | Family::Relativistic { alpha, .. }
            | Family::Mixed { alpha, .. }
            | Family::LogStable { alpha, .. } => alpha,
        }
    }

    /// `Some(α)` when `φ(λ) = λ^{α/2}` exactly.
    pub fn stable_index(&self) -> Option<f64> {
        match self.family {
            Family::Stable { alpha } => Some(alpha),
            Family::LogStable { alpha, p } if p == 0.0 => Some(alpha),
            _ => None,
        }
    }

    /// Linear coefficient `b`; zero for every built-in family.
    pub fn drift(&self) -> f64 {
        0.0
    }

    /// `φ(λ)` for `λ > 0`.
    pub fn phi(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) || lambda.is_nan() {
            return domain(format!("phi needs lambda > 0, got {lambda}"));
        }
        Ok(self.phi_unchecked(lambda))
    }

    pub(crate) fn phi_unchecked(&self, lambda: f64) -> f64 {
        match self.family {
            Family::Stable { alpha } => lambda.powf(alpha / 2.0),
            Family::Relativistic { alpha, m } => {
                let k = m.powf(2.0 / alpha);
                let b = alpha / 2.0;
                // (λ+k)^b - k^b without cancellation for small λ.
                k.powf(b) * (b * (lambda / k).ln_1p()).exp_m1()
            }
            Family::Mixed { alpha, beta } => lambda.powf(alpha / 2.0) + lambda.powf(beta / 2.0),
            Family::LogStable { alpha, p } => lambda.powf(alpha / 2.0) * lambda.ln_1p().powf(p),
        }
    }

    /// `φ'(λ)` for `λ > 0`.
    pub fn phi_prime(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) || lambda.is_nan() {
            return domain(format!("phi_prime needs lambda > 0, got {lambda}"));
        }
        Ok(match self.family {
            Family::Stable { alpha } => alpha / 2.0 * lambda.powf(alpha / 2.0 - 1.0),
            Family::Relativistic { alpha, m } => {
                let k = m.powf(2.0 / alpha);
                alpha / 2.0 * (lambda + k).powf(alpha / 2.0 - 1.0)
            }
            Family::Mixed { alpha, beta } => {
                alpha / 2.0 * lambda.powf(alpha / 2.0 - 1.0)
                    + beta / 2.0 * lambda.powf(beta / 2.0 - 1.0)
            }
            Family::LogStable { alpha, p } => {
                let l = lambda.ln_1p();
                let a = alpha / 2.0;
                a * lambda.powf(a - 1.0) * l.powf(p)
                    + lambda.powf(a) * p * l.powf(p - 1.0) / (1.0 + lambda)
            }
        })
    }

    /// `φ` continued to the complex plane cut along `(-∞, 0]`.
    pub(crate) fn phi_complex(&self, z: Complex64) -> Complex64 {
        match self.family {
            Family::Stable { alpha } => z.powf(alpha / 2.0),
            Family::Relativistic { alpha, m } => {
                let k = m.powf(2.0 / alpha);
                (z + k).powf(alpha / 2.0) - m
            }
            Family::Mixed { alpha, beta } => z.powf(alpha / 2.0) + z.powf(beta / 2.0),
            Family::LogStable { alpha, p } => z.powf(alpha / 2.0) * (z + 1.0).ln().powf(p),
        }
    }

    fn phi_prime_complex(&self, z: Complex64) -> Complex64 {
        match self.family {
            Family::Stable { alpha } => z.powf(alpha / 2.0 - 1.0) * (alpha / 2.0),
            Family::Relativistic { alpha, m } => {
                let k = m.powf(2.0 / alpha);
                (z + k).powf(alpha / 2.0 - 1.0) * (alpha / 2.0)
            }
            Family::Mixed { alpha, beta } => {
                z.powf(alpha / 2.0 - 1.0) * (alpha / 2.0) + z.powf(beta / 2.0 - 1.0) * (beta / 2.0)
            }
            Family::LogStable { alpha, p } => {
                let a = alpha / 2.0;
                let l = (z + 1.0).ln();
                z.powf(a - 1.0) * l.powf(p) * a + z.powf(a) * l.powf(p - 1.0) * p / (z + 1.0)
            }
        }
    }

    /// Density `μ(t)` of the subordinator Lévy measure.
    pub fn levy_mu(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || t.is_nan() {
            return domain(format!("levy_mu needs t > 0, got {t}"));
        }
        let stable = |alpha: f64| {
            let b = alpha / 2.0;
            b / gamma(1.0 - b) * t.powf(-1.0 - b)
        };
        Ok(match self.family {
            Family::Stable { alpha } => stable(alpha),
            Family::Relativistic { alpha, m } => stable(alpha) * (-m.powf(2.0 / alpha) * t).exp(),
            Family::Mixed { alpha, beta } => stable(alpha) + stable(beta),
            // t μ(t) has Laplace transform φ'(λ).
            Family::LogStable { .. } => {
                talbot(|z| self.phi_prime_complex(z), t, TALBOT_NODES).max(0.0) / t
            }
        })
    }

    /// Tail mass `N(ε) = ∫_ε^∞ μ(t) dt`.
    pub fn tail_mass(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0) || eps.is_nan() {
            return domain(format!("tail mass needs eps > 0, got {eps}"));
        }
        let stable = |alpha: f64| {
            let b = alpha / 2.0;
            eps.powf(-b) / gamma(1.0 - b)
        };
        Ok(match self.family {
            Family::Stable { alpha } => stable(alpha),
            Family::Relativistic { alpha, m } => {
                let b = alpha / 2.0;
                let k = m.powf(2.0 / alpha);
                let x = k * eps;
                k.powf(b) * (x.powf(-b) * (-x).exp() / gamma(1.0 - b) - gammq(1.0 - b, x))
            }
            Family::Mixed { alpha, beta } => stable(alpha) + stable(beta),
            // N has Laplace transform φ(λ)/λ.
            Family::LogStable { .. } => {
                talbot(|z| self.phi_complex(z) / z, eps, TALBOT_NODES).max(0.0)
            }
        })
    }

    /// Small-jump mean `m(ε) = ∫_0^ε t μ(t) dt`.
    pub fn small_jump_mean(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0) || eps.is_nan() {
            return domain(format!("small jump mean needs eps > 0, got {eps}"));
        }
        let stable = |alpha: f64| {
            let b = alpha / 2.0;
            b / gamma(1.0 - b) * eps.powf(1.0 - b) / (1.0 - b)
        };
        Ok(match self.family {
            Family::Stable { alpha } => stable(alpha),
            Family::Relativistic { alpha, m } => {
                let b = alpha / 2.0;
                let k = m.powf(2.0 / alpha);
                b * k.powf(b - 1.0) * gammp(1.0 - b, k * eps)
            }
            Family::Mixed { alpha, beta } => stable(alpha) + stable(beta),
            // ∫_0^ε t μ(t) dt has Laplace transform φ'(λ)/λ.
            Family::LogStable { .. } => {
                talbot(|z| self.phi_prime_complex(z) / z, eps, TALBOT_NODES).max(0.0)
            }
        })
    }

    /// Scale function `Φ(r) = 1/φ(r^{-2})`.
    pub fn capital_phi(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || r.is_nan() {
            return domain(format!("capital_phi needs r > 0, got {r}"));
        }
        Ok(self.capital_phi_unchecked(r))
    }

    pub(crate) fn capital_phi_unchecked(&self, r: f64) -> f64 {
        1.0 / self.phi_unchecked(1.0 / (r * r))
    }

    /// Inverse of [`capital_phi`](Self::capital_phi).
    pub fn capital_phi_inv(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("capital_phi_inv needs finite t > 0, got {t}"));
        }
        if let Some(alpha) = self.stable_index() {
            return Ok(t.powf(1.0 / alpha));
        }
        let phi = |r: f64| self.capital_phi_unchecked(r);
        let (mut lo, mut hi) = (t, t);
        let mut expansions = 0;
        while phi(lo) > t {
            lo /= 4.0;
            expansions += 1;
            if expansions > 500 || lo == 0.0 {
                return Err(Error::Convergence(format!("no lower bracket for Φ⁻¹({t})")));
            }
        }
        while phi(hi) < t {
            hi *= 4.0;
            expansions += 1;
            if expansions > 500 || !phi(hi).is_finite() {
                return Err(Error::Convergence(format!("no upper bracket for Φ⁻¹({t})")));
            }
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (flo, fhi) = (phi(lo), phi(hi));
        let r = if (t - flo).abs() <= (fhi - t).abs() { lo } else { hi };
        Ok(r)
    }

    /// `φ(λr) ≤ λ φ(r)` up to a relative slack of `1e-12`.
    pub fn bernstein_inequality_check(&self, lambda: f64, r: f64) -> bool {
        if lambda < 1.0 || !(r > 0.0) {
            return false;
        }
        self.phi_unchecked(lambda * r) <= lambda * self.phi_unchecked(r) * (1.0 + 1e-12)
    }

    /// Numerical surrogate of the weak scaling condition
    /// `a1 λ^{δ1} φ(r) ≤ φ(λr) ≤ a2 λ^{δ2} φ(r)` for `λ ≥ 1`, `r ≥ r0`.
    pub fn certify_scaling(
        &self,
        r0: f64,
        lambda_max: f64,
        r_max: f64,
        grid: ScalingGrid,
    ) -> Result<ScalingCertificate> {
        if !(r0 > 0.0 && lambda_max > 1.0 && r_max > r0) {
            return domain(format!(
                "certify_scaling needs r0 > 0, lambda_max > 1, r_max > r0 (got {r0}, {lambda_max}, {r_max})"
            ));
        }
        if grid.n_r < 2 || grid.n_lambda < 1 {
            return domain("scaling grid needs at least 2 radii and 1 ratio");
        }
        let radii = log_grid(r0, r_max, grid.n_r);
        // λ = 1 is excluded: the secant slope is undefined there.
        let ratios: Vec<f64> = (1..=grid.n_lambda)
            .map(|k| lambda_max.powf(k as f64 / grid.n_lambda as f64))
            .collect();
        let mut slopes = Vec::with_capacity(radii.len() * ratios.len());
        for &r in &radii {
            let base = self.phi_unchecked(r);
            let mut prev = 0.0f64;
            for &l in &ratios {
                let log_ratio = (self.phi_unchecked(l * r) / base).ln();
                if log_ratio < prev - 1e-12 * prev.abs().max(1.0) {
                    return Err(Error::Fit(format!(
                        "φ(λr)/φ(r) decreases in λ at r={r}, λ={l}"
                    )));
                }
                prev = log_ratio;
                slopes.push((l, log_ratio));
            }
        }
        let s = |&(l, lr): &(f64, f64)| lr / l.ln();
        let delta1 = slopes.iter().map(s).fold(f64::INFINITY, f64::min);
        let delta2 = slopes.iter().map(s).fold(f64::NEG_INFINITY, f64::max);
        if !(delta1 > 0.0 && delta2 <= 1.0 + 1e-12) {
            return Err(Error::Fit(format!(
                "secant slopes [{delta1}, {delta2}] leave (0, 1]"
            )));
        }
        let a1 = slopes
            .iter()
            .map(|&(l, lr)| (lr - delta1 * l.ln()).exp())
            .fold(1.0, f64::min);
        let a2 = slopes
            .iter()
            .map(|&(l, lr)| (lr - delta2 * l.ln()).exp())
            .fold(1.0, f64::max);
        Ok(ScalingCertificate { delta1, delta2, a1, a2, r0, lambda_max, r_max, grid })
    }
}

/// Grid sizes for [`BernsteinFunction::certify_scaling`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScalingGrid {
    pub n_r: usize,
    pub n_lambda: usize,
}

impl Default for ScalingGrid {
    fn default() -> Self {
        Self { n_r: 64, n_lambda: 64 }
    }
}

/// Constants of the weak scaling condition found on a finite grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingCertificate {
    pub delta1: f64,
    pub delta2: f64,
    pub a1: f64,
    pub a2: f64,
    pub r0: f64,
    pub lambda_max: f64,
    pub r_max: f64,
    pub grid: ScalingGrid,
}

impl ScalingCertificate {
    /// Checks the two-sided bound at `(λ, r)`.
    pub fn holds_at(&self, f: &BernsteinFunction, lambda: f64, r: f64) -> bool {
        let base = f.phi_unchecked(r);
        let v = f.phi_unchecked(lambda * r);
        let tol = 1.0 + 1e-12;
        self.a1 * lambda.powf(self.delta1) * base <= v * tol
            && v <= self.a2 * lambda.powf(self.delta2) * base * tol
    }
}

pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

impl fmt::Display for BernsteinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Stable { alpha } => write!(f, "stable:alpha={alpha:?}"),
            Family::Relativistic { alpha, m } => write!(f, "relativistic:alpha={alpha:?},m={m:?}"),
            Family::Mixed { alpha, beta } => write!(f, "mixed:alpha={alpha:?},beta={beta:?}"),
            Family::LogStable { alpha, p } => write!(f, "logstable:alpha={alpha:?},p={p:?}"),
        }
    }
}

/// Splits `name:k1=v1,k2=v2` into the name and its numeric parameters.
pub(crate) fn parse_params(s: &str) -> Result<(&str, Vec<(&str, f64)>)> {
    let s = s.trim();
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut params = Vec::new();
    for item in rest.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{item}'")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("'{}' is not a number in '{item}'", v.trim())))?;
        params.push((k.trim(), v));
    }
    Ok((name.trim(), params))
}

pub(crate) fn take_param(params: &[(&str, f64)], key: &str, ctx: &str) -> Result<f64> {
    params
        .iter()
        .find(|(k, _)| *k == key)
        .map(|&(_, v)| v)
        .ok_or_else(|| Error::Parse(format!("{ctx} needs parameter '{key}'")))
}

pub(crate) fn reject_unknown(params: &[(&str, f64)], known: &[&str], ctx: &str) -> Result<()> {
    match params.iter().find(|(k, _)| !known.contains(k)) {
        Some((k, _)) => Err(Error::Parse(format!("unknown parameter '{k}' for {ctx}"))),
        None => Ok(()),
    }
}

impl FromStr for BernsteinFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = parse_params(s)?;
        let family = match name {
            "stable" => {
                reject_unknown(&params, &["alpha"], name)?;
                Family::Stable { alpha: take_param(&params, "alpha", name)? }
            }
            "relativistic" => {
                reject_unknown(&params, &["alpha", "m"], name)?;
                Family::Relativistic {
                    alpha: take_param(&params, "alpha", name)?,
                    m: take_param(&params, "m", name)?,
                }
            }
            "mixed" => {
                reject_unknown(&params, &["alpha", "beta"], name)?;
                Family::Mixed {
                    alpha: take_param(&params, "alpha", name)?,
                    beta: take_param(&params, "beta", name)?,
                }
            }
            "logstable" => {
                reject_unknown(&params, &["alpha", "p"], name)?;
                Family::LogStable {
                    alpha: take_param(&params, "alpha", name)?,
                    p: take_param(&params, "p", name)?,
                }
            }
            other => return Err(Error::Parse(format!("unknown family '{other}'"))),
        };
        Self::new(family)
    }
}
