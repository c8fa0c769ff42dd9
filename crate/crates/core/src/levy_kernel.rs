//! Jump densities, characteristic exponents and the free-space transition
//! density of a rotationally symmetric jump process.

use std::f64::consts::PI;
use std::sync::Arc;

use puruspe::{gamma, Jn};

use crate::bernstein::{BernsteinFunction, Family};
use crate::error::{domain, Error, Result};
use crate::quad::{integrate, integrate_partitioned, kronrod_nodes, Tolerance};

/// How the jump density of the process relates to the subordinate one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JumpMode {
    /// `j_X = j`.
    SubordinateBm,
    /// `j_X = j - h` with a bump `h` of half-width `eps` centred at radius 1.
    Perturbed { eps: f64 },
}

/// Default half-width of the perturbation bump.
pub const DEFAULT_BUMP_WIDTH: f64 = 0.25;

/// Dimension, Laplace exponent and jump mode of a symmetric Lévy process.
#[derive(Clone, Debug)]
pub struct ProcessSpec {
    d: usize,
    f: BernsteinFunction,
    mode: JumpMode,
    // Radial quadrature of the bump, weighted by the sphere area: (ρ, ω_d ρ^{d-1} h(ρ) dρ).
    shell: Option<Arc<Vec<(f64, f64)>>>,
}

impl PartialEq for ProcessSpec {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.f == other.f && self.mode == other.mode
    }
}

/// `A(d, α)` in the isotropic stable jump density `A(d, α) r^{-d-α}`.
pub fn stable_jump_constant(d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * PI.powf(-d / 2.0) * gamma((d + alpha) / 2.0)
        / gamma(1.0 - alpha / 2.0)
}

/// Surface area of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    let d = d as f64;
    2.0 * PI.powf(d / 2.0) / gamma(d / 2.0)
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

impl ProcessSpec {
    /// Subordinate Brownian motion in `R^d`.
    pub fn new(d: usize, f: BernsteinFunction) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be at least 1");
        }
        Ok(Self { d, f, mode: JumpMode::SubordinateBm, shell: None })
    }

    /// Process with jump density `j - h`, `h(r) = (j(r)/2) max(0, 1 - |r-1|/eps)^2`.
    pub fn perturbed(d: usize, f: BernsteinFunction, eps: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return domain(format!("perturbed mode supports d in 1..=3, got {d}"));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return domain(format!("bump half-width must lie in (0, 1), got {eps}"));
        }
        let mut spec = Self { d, f, mode: JumpMode::Perturbed { eps }, shell: None };
        let mut shell = Vec::new();
        for k in 0..8 {
            let a = 1.0 - eps + eps * k as f64 / 4.0;
            for (rho, w) in kronrod_nodes(a, a + eps / 4.0) {
                let h = spec.bump(rho)?;
                shell.push((rho, w * sphere_area(d) * rho.powi(d as i32 - 1) * h));
            }
        }
        spec.shell = Some(Arc::new(shell));
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn bernstein(&self) -> &BernsteinFunction {
        &self.f
    }

    pub fn mode(&self) -> JumpMode {
        self.mode
    }

    /// Comparability constant between `j_X` and `j`.
    pub fn gamma(&self) -> f64 {
        match self.mode {
            JumpMode::SubordinateBm => 1.0,
            JumpMode::Perturbed { .. } => 2.0,
        }
    }

    /// The same process in another dimension.
    pub fn with_dim(&self, d: usize) -> Result<Self> {
        match self.mode {
            JumpMode::SubordinateBm => Self::new(d, self.f),
            JumpMode::Perturbed { eps } => Self::perturbed(d, self.f, eps),
        }
    }

    /// Jump density `j(r) = ∫ (4πt)^{-d/2} e^{-r²/(4t)} μ(t) dt` of the subordinate process.
    pub fn jump_density_j(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || r.is_nan() {
            return domain(format!("jump density needs r > 0, got {r}"));
        }
        match self.f.family() {
            Family::Stable { alpha } => Ok(stable_jump_constant(self.d, alpha) * r.powf(-(self.d as f64) - alpha)),
            Family::Mixed { alpha, beta } => {
                let d = self.d as f64;
                Ok(stable_jump_constant(self.d, alpha) * r.powf(-d - alpha)
                    + stable_jump_constant(self.d, beta) * r.powf(-d - beta))
            }
            _ => self.j_by_subordination(r),
        }
    }

    /// [`jump_density_j`](Self::jump_density_j) by quadrature for every family.
    pub fn j_by_subordination(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || r.is_nan() {
            return domain(format!("jump density needs r > 0, got {r}"));
        }
        let d = self.d as f64;
        let beta = self.f.alpha() / 2.0;
        // t = r² e^u / 4 turns the peak near t ≈ r² into a fixed window in u.
        let g = |u: f64| {
            let t = r * r * u.exp() / 4.0;
            let mu = self.f.levy_mu(t).unwrap_or(0.0);
            (4.0 * PI * t).powf(-d / 2.0) * (-(-u).exp()).exp() * mu * t
        };
        let mode = -(d / 2.0 + beta).ln();
        // Below u = -6.62 the factor exp(-e^{-u}) underflows.
        let lo = -6.62;
        let hi = mode + 50.0 / (d / 2.0 + beta);
        let mut breaks = vec![lo, mode - 2.0, mode - 0.5, mode, mode + 0.5, mode + 2.0];
        let mut u = mode + 6.0;
        while u < hi {
            breaks.push(u);
            u += 6.0;
        }
        breaks.push(hi);
        let val = integrate_partitioned(g, &breaks, Tolerance::new(0.0, 1e-11))?;
        Ok(val.value)
    }

    /// Bump `h` removed from `j` in perturbed mode; zero otherwise.
    pub fn bump(&self, r: f64) -> Result<f64> {
        match self.mode {
            JumpMode::SubordinateBm => Ok(0.0),
            JumpMode::Perturbed { eps } => {
                let w = (1.0 - (r - 1.0).abs() / eps).max(0.0);
                if w == 0.0 {
                    return Ok(0.0);
                }
                Ok(0.5 * self.jump_density_j(r)? * w * w)
            }
        }
    }

    /// Jump density `j_X(r)` of the process.
    pub fn jump_density_jx(&self, r: f64) -> Result<f64> {
        let j = self.jump_density_j(r)?;
        Ok(j - self.bump(r)?)
    }

    /// Characteristic exponent `Ψ(s)` at radius `s = |ξ|`.
    pub fn char_exponent(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return domain(format!("characteristic exponent needs s >= 0, got {s}"));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let base = self.f.phi_unchecked(s * s);
        let Some(shell) = &self.shell else {
            return Ok(base);
        };
        let removed: f64 = shell
            .iter()
            .map(|&(rho, w)| w * (1.0 - radial_kernel(self.d, s * rho)))
            .sum();
        Ok(base - removed)
    }

    /// Free-space transition density `p(t, r)` by radial Fourier inversion of `e^{-tΨ}`.
    pub fn free_kernel(&self, t: f64, r: f64) -> Result<f64> {
        if !(t > 0.0) || !(r >= 0.0) {
            return domain(format!("free kernel needs t > 0 and r >= 0, got t={t}, r={r}"));
        }
        if self.d > 3 {
            return domain(format!("Fourier inversion is implemented for d <= 3, got {}", self.d));
        }
        let s_max = self.truncation(t)?;
        let env = |s: f64| (-t * self.char_exponent(s).unwrap_or(f64::INFINITY)).exp();
        let kind = match self.d {
            1 => Oscillation::Cos,
            2 => Oscillation::J0,
            _ => Oscillation::Sin,
        };
        let (value, scale) = match (self.d, r == 0.0) {
            (1, _) => (oscillatory(&env, kind, r, s_max, t)?, 1.0 / PI),
            (2, _) => (oscillatory(&|s| s * env(s), kind, r, s_max, t)?, 0.5 / PI),
            (_, true) => (
                oscillatory(&|s| s * s * env(s), Oscillation::None, 0.0, s_max, t)?,
                0.5 / (PI * PI),
            ),
            (_, false) => (oscillatory(&|s| s * env(s), kind, r, s_max, t)?, 0.5 / (PI * PI * r)),
        };
        Ok(value * scale)
    }

    // Radius beyond which e^{-tΨ(s)} s^{d-1} is below 1e-16 of its maximum.
    fn truncation(&self, t: f64) -> Result<f64> {
        let logw = |s: f64| -t * self.char_exponent(s).unwrap_or(f64::INFINITY) + (self.d as f64 - 1.0) * s.ln();
        let mut best = f64::NEG_INFINITY;
        let mut s = 2f64.powi(-20);
        for _ in 0..400 {
            let w = logw(s);
            if w > best {
                best = w;
            } else if w < best - 37.0 {
                return Ok(s);
            }
            s *= 2f64.sqrt();
        }
        Err(Error::Inversion { t, r: f64::NAN, value: f64::NAN, tail: f64::INFINITY })
    }

    /// Searches `C1` with `C2 = 1` in `p(t, u) ≤ C1 p(t, C2 r)` for grid pairs `u ≥ r`.
    pub fn check_condition_b(&self, t_grid: &[f64], r_grid: &[f64]) -> Result<ConditionB> {
        let mut c1: f64 = 1.0;
        for &t in t_grid {
            let vals = r_grid
                .iter()
                .map(|&r| self.free_kernel(t, r))
                .collect::<Result<Vec<_>>>()?;
            for (i, &ri) in r_grid.iter().enumerate() {
                for (k, &uk) in r_grid.iter().enumerate() {
                    if uk >= ri {
                        c1 = c1.max(vals[k] / vals[i]);
                    }
                }
            }
        }
        Ok(ConditionB { c1, c2: 1.0, pass: c1.is_finite() })
    }

    /// Searches `C3` with `C4 = 1` in `p(t, r) ≤ C3 t j(C4 r)`; also reports the
    /// smallest `t j(r) / p(t, r)` over grid points with `r ≥ Φ⁻¹(t)`.
    pub fn check_condition_c(&self, t_grid: &[f64], r_grid: &[f64]) -> Result<ConditionC> {
        let mut c3: f64 = 0.0;
        let mut lower = f64::INFINITY;
        for &t in t_grid {
            let scale = self.f.capital_phi_inv(t)?;
            for &r in r_grid {
                let p = self.free_kernel(t, r)?;
                let tj = t * self.jump_density_j(r)?;
                c3 = c3.max(p / tj);
                if r >= scale {
                    lower = lower.min(tj / p);
                }
            }
        }
        Ok(ConditionC { c3, c4: 1.0, lower, pass: c3.is_finite() && c3 > 0.0 })
    }
}

/// Witness for `p(t, u) ≤ C1 p(t, C2 r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionB {
    pub c1: f64,
    pub c2: f64,
    pub pass: bool,
}

/// Witness for `p(t, r) ≤ C3 t j(C4 r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionC {
    pub c3: f64,
    pub c4: f64,
    /// Smallest `t j(r) / p(t, r)` found off the diagonal.
    pub lower: f64,
    pub pass: bool,
}

/// `cos x`, `J0(x)` or `sin x / x` for `d = 1, 2, 3`.
pub(crate) fn radial_kernel(d: usize, x: f64) -> f64 {
    match d {
        1 => x.cos(),
        2 => Jn(0, x),
        _ => {
            if x.abs() < 1e-4 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Oscillation {
    None,
    Cos,
    Sin,
    J0,
}

impl Oscillation {
    fn eval(self, x: f64) -> f64 {
        match self {
            Oscillation::None => 1.0,
            Oscillation::Cos => x.cos(),
            Oscillation::Sin => x.sin(),
            Oscillation::J0 => Jn(0, x),
        }
    }

    // k-th positive zero, k = 0, 1, ...
    fn zero(self, k: usize) -> f64 {
        match self {
            Oscillation::None => f64::INFINITY,
            Oscillation::Cos => (k as f64 + 0.5) * PI,
            Oscillation::Sin => (k as f64 + 1.0) * PI,
            Oscillation::J0 => {
                let b = (k as f64 + 0.75) * PI;
                let b2 = b * b;
                let mut x = b + 1.0 / (8.0 * b) - 31.0 / (384.0 * b * b2) + 3779.0 / (15360.0 * b * b2 * b2);
                for _ in 0..3 {
                    let j1 = Jn(1, x);
                    if j1 == 0.0 {
                        break;
                    }
                    x += Jn(0, x) / j1;
                }
                x
            }
        }
    }
}

const PIECE_TOL: Tolerance = Tolerance::new(0.0, 1e-13);
const MAX_PIECES: usize = 4096;
const EULER_DEPTH: usize = 40;

// Iterated averaging of the last `EULER_DEPTH` partial sums.
fn euler_average(sums: &[f64]) -> f64 {
    let start = sums.len().saturating_sub(EULER_DEPTH);
    let mut row = sums[start..].to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row[0]
}

/// `∫_0^{s_max} g(s) K(s r) ds`, summing the integral between consecutive
/// zeros of `K` and accelerating the alternating tail.
fn oscillatory(g: &dyn Fn(f64) -> f64, kind: Oscillation, r: f64, s_max: f64, t: f64) -> Result<f64> {
    let f = |s: f64| g(s) * kind.eval(s * r);
    let first_zero = if r > 0.0 { kind.zero(0) / r } else { f64::INFINITY };
    if kind == Oscillation::None || first_zero >= s_max {
        let mut breaks = vec![0.0];
        breaks.extend((0..=24).rev().map(|k| s_max * 0.5f64.powi(k)));
        return Ok(integrate_partitioned(f, &breaks, PIECE_TOL)?.value);
    }
    // The first piece may hold the non-smooth behaviour of Ψ at 0.
    let mut breaks = vec![0.0];
    breaks.extend((0..=16).rev().map(|k| first_zero * 0.5f64.powi(k)));
    let mut total = integrate_partitioned(f, &breaks, PIECE_TOL)?.value;
    let mut sums = vec![total];
    let mut lo = first_zero;
    let mut k = 1;
    let mut checkpoint = 32;
    let mut estimate = (f64::NAN, f64::INFINITY);
    loop {
        let hi = kind.zero(k) / r;
        if hi >= s_max {
            total += integrate(f, lo, s_max, PIECE_TOL)?.value;
            return Ok(total);
        }
        total += integrate(f, lo, hi, PIECE_TOL)?.value;
        sums.push(total);
        lo = hi;
        k += 1;
        if sums.len() == checkpoint {
            let n = sums.len();
            let e1 = euler_average(&sums);
            let e0 = euler_average(&sums[..n - 1]);
            let tail = (e1 - e0).abs();
            if tail < estimate.1 {
                estimate = (e1, tail);
            }
            // Absolute floor relative to the size of the first piece.
            if tail <= 1e-12 * e1.abs() || tail <= 1e-16 * sums[0].abs() {
                return Ok(e1);
            }
            checkpoint *= 2;
        }
        if sums.len() >= MAX_PIECES {
            let (value, tail) = estimate;
            if tail > 1e-7 * value.abs() {
                return Err(Error::Inversion { t, r, value, tail });
            }
            return Ok(value);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cauchy(t: f64, r: f64) -> f64 {
        t / (PI * (t * t + r * r))
    }

    fn stable(alpha: f64, d: usize) -> ProcessSpec {
        ProcessSpec::new(d, BernsteinFunction::stable(alpha).unwrap()).unwrap()
    }

    #[test]
    fn stable_jump_density_values() {
        let p = stable(1.0, 1);
        assert!((p.jump_density_j(1.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!(p.jump_density_j(2.0).unwrap() < p.jump_density_j(1.0).unwrap());
        for &r in &[0.01, 0.3, 1.0] {
            let v = p.jump_density_j(r).unwrap() * r * p.bernstein().capital_phi(r).unwrap();
            assert!((v - 1.0 / PI).abs() < 1e-6 / PI);
        }
    }

    #[test]
    fn subordination_matches_closed_form() {
        for &alpha in &[0.5, 1.0, 1.5] {
            for d in 1..=3 {
                let p = stable(alpha, d);
                for &r in &[0.01, 0.5, 3.0, 10.0] {
                    let q = p.j_by_subordination(r).unwrap();
                    let c = p.jump_density_j(r).unwrap();
                    assert!((q / c - 1.0).abs() < 1e-8, "α={alpha} d={d} r={r}: {q} vs {c}");
                }
            }
        }
    }

    #[test]
    fn perturbed_density() {
        let f = BernsteinFunction::stable(1.0).unwrap();
        let p = ProcessSpec::perturbed(1, f, DEFAULT_BUMP_WIDTH).unwrap();
        let j1 = p.jump_density_j(1.0).unwrap();
        assert!((p.jump_density_jx(1.0).unwrap() - j1 / 2.0).abs() < 1e-15);
        for k in 1..200 {
            let r = k as f64 * 0.01;
            let (j, jx) = (p.jump_density_j(r).unwrap(), p.jump_density_jx(r).unwrap());
            assert!(jx >= j / 2.0 && jx <= 2.0 * j);
        }
        // Not monotone: it dips at r = 1 and recovers before 1 + eps.
        assert!(p.jump_density_jx(1.2).unwrap() > p.jump_density_jx(1.0).unwrap());
        let sub = stable(1.0, 1);
        for k in 0..40 {
            let r = k as f64 * 0.3;
            assert_eq!(sub.jump_density_jx(r.max(1e-3)).unwrap(), sub.jump_density_j(r.max(1e-3)).unwrap());
        }
    }

    #[test]
    fn char_exponent_values_and_band() {
        let p = stable(1.0, 1);
        assert_eq!(p.char_exponent(3.0).unwrap(), 3.0);
        assert_eq!(p.char_exponent(0.0).unwrap(), 0.0);
        for d in 1..=3 {
            let f = BernsteinFunction::stable(1.0).unwrap();
            let q = ProcessSpec::perturbed(d, f, DEFAULT_BUMP_WIDTH).unwrap();
            for k in 1..100 {
                let s = k as f64 * 0.2;
                let (psi, phi) = (q.char_exponent(s).unwrap(), f.phi(s * s).unwrap());
                assert!(psi >= phi / 2.0 - 1e-12 && psi <= phi + 1e-12, "d={d} s={s}");
            }
        }
    }

    #[test]
    fn perturbed_exponent_matches_direct_radial_integral() {
        // Ψ = ∫ (1 - cos(s x)) j_X(|x|) dx in d = 1, evaluated directly.
        let f = BernsteinFunction::relativistic(1.0, 1.0).unwrap();
        let q = ProcessSpec::perturbed(1, f, DEFAULT_BUMP_WIDTH).unwrap();
        let s = 2.5;
        let g = |x: f64| 2.0 * (1.0 - (s * x).cos()) * q.jump_density_jx(x).unwrap();
        let breaks = [1e-12, 0.01, 0.1, 0.75, 1.0, 1.25, 3.0, 10.0, 40.0];
        let head = integrate_partitioned(g, &breaks, Tolerance::new(1e-12, 1e-10)).unwrap().value;
        let tail = crate::quad::integrate_to_infinity(g, 40.0, Tolerance::new(1e-12, 1e-9)).unwrap().value;
        let want = q.char_exponent(s).unwrap();
        assert!(((head + tail) / want - 1.0).abs() < 1e-6, "{} vs {want}", head + tail);
    }

    #[test]
    fn cauchy_kernel_oracle() {
        let p = stable(1.0, 1);
        for &t in &[0.1, 0.5, 1.0, 2.0] {
            for &r in &[0.0, 0.3, 1.0, 4.0, 10.0] {
                let v = p.free_kernel(t, r).unwrap();
                assert!((v / cauchy(t, r) - 1.0).abs() < 1e-6, "t={t} r={r}: {v}");
            }
        }
    }

    #[test]
    fn stable_scaling_identity() {
        let alpha = 1.5;
        let p = stable(alpha, 1);
        for &(t, r) in &[(0.3, 0.5), (2.0, 1.0), (0.05, 0.2)] {
            let lhs = p.free_kernel(t, r).unwrap();
            let rhs = t.powf(-1.0 / alpha) * p.free_kernel(1.0, t.powf(-1.0 / alpha) * r).unwrap();
            assert!((lhs / rhs - 1.0).abs() < 1e-8, "t={t} r={r}");
        }
    }

    #[test]
    fn gaussian_like_limit_in_three_dimensions() {
        // Stable in d = 3 with α = 1 is the Cauchy–Poisson kernel t / (π² (t² + r²)²).
        let p = stable(1.0, 3);
        for &r in &[0.0, 0.5, 2.0] {
            let t: f64 = 1.0;
            let want = t / (PI * PI * (t * t + r * r).powi(2));
            let v = p.free_kernel(t, r).unwrap();
            assert!((v / want - 1.0).abs() < 1e-6, "r={r}: {v} vs {want}");
        }
        // And in d = 2 it is t / (2π (t² + r²)^{3/2}).
        let p = stable(1.0, 2);
        for &r in &[0.0, 0.5, 2.0, 6.0] {
            let t: f64 = 0.7;
            let want = t / (2.0 * PI * (t * t + r * r).powf(1.5));
            let v = p.free_kernel(t, r).unwrap();
            assert!((v / want - 1.0).abs() < 1e-6, "r={r}: {v} vs {want}");
        }
    }

    #[test]
    fn condition_b_subordinate_is_monotone() {
        let p = stable(1.0, 1);
        let rs: Vec<f64> = (1..12).map(|k| 0.25 * k as f64).collect();
        let b = p.check_condition_b(&[0.1, 0.5, 1.0], &rs).unwrap();
        assert!(b.pass && b.c1 <= 1.0 + 1e-9 && b.c2 == 1.0);
        let c = p.check_condition_c(&[0.1, 0.5, 1.0], &rs).unwrap();
        assert!(c.pass && c.c4 == 1.0 && c.lower > 0.0);
    }
}
