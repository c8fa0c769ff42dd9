//! Numerical inversion of Laplace transforms.
//!
//! [`talbot`] deforms the Bromwich contour onto a cotangent path and needs the
//! transform on the complex plane cut along the negative axis. [`stehfest`]
//! only samples the real axis and is far less accurate; it is kept as an
//! independent cross-check.

use num_complex::Complex64;

/// Default number of contour nodes for [`talbot`].
pub const TALBOT_NODES: usize = 28;

/// Fixed-Talbot inversion of `transform` at `t > 0` with `m` nodes.
///
/// In double precision the attainable relative accuracy saturates around
/// `m ≈ 24..32`.
pub fn talbot<F>(transform: F, t: f64, m: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut sum = 0.5 * (transform(Complex64::new(r, 0.0)) * (r * t).exp()).re;
    for k in 1..m {
        let theta = k as f64 * std::f64::consts::PI / m as f64;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (s * t).exp() * transform(s) * Complex64::new(1.0, sigma);
        sum += term.re;
    }
    r / m as f64 * sum
}

/// Gaver–Stehfest inversion with `n` (even) terms.
pub fn stehfest<F>(transform: F, t: f64, n: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    debug_assert!(n % 2 == 0 && n > 0);
    let half = n / 2;
    let fact = |k: usize| (1..=k).fold(1.0f64, |acc, i| acc * i as f64);
    let ln2_t = std::f64::consts::LN_2 / t;
    let mut sum = 0.0;
    for k in 1..=n {
        let mut v = 0.0;
        for j in (k + 1) / 2..=k.min(half) {
            v += (j as f64).powi(half as i32) * fact(2 * j)
                / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
        }
        if (k + half) % 2 == 1 {
            v = -v;
        }
        sum += v * transform(k as f64 * ln2_t);
    }
    ln2_t * sum
}
