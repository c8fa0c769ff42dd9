use std::f64::consts::PI;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1, Poisson};

use crate::bernstein::{log_grid, BernsteinFunction, Family};
use crate::error::{Error, Result};

/// Points in every inverse-CDF jump table.
pub const TABLE_POINTS: usize = 4096;

/// Uniform on the open interval (0, 1).
pub(crate) fn open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Kanter's representation of the standard one-sided `β`-stable law,
/// `E[e^{-λS}] = e^{-λ^β}`.
fn kanter<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u = open01(rng);
    let e: f64 = Exp1.sample(rng);
    let a = (beta * PI * u).sin().powf(beta / (1.0 - beta)) * ((1.0 - beta) * PI * u).sin()
        / (PI * u).sin().powf(1.0 / (1.0 - beta));
    (a / e).powf((1.0 - beta) / beta)
}

/// One increment over time `h` of the subordinator with `φ(λ) = λ^{α/2}`.
pub fn sample_stable_subordinator<R: Rng + ?Sized>(alpha: f64, h: f64, rng: &mut R) -> f64 {
    let beta = alpha / 2.0;
    h.powf(1.0 / beta) * kanter(beta, rng)
}

/// Chambers–Mallows–Stuck draw with `E[e^{iξZ}] = e^{-|ξ|^α}`.
pub(crate) fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = PI * (open01(rng) - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let e: f64 = Exp1.sample(rng);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / e).powf((1.0 - alpha) / alpha)
}

/// Inverse-CDF table for jump sizes in `[lo, top]` from a decreasing tail function.
///
/// Mass beyond `top` is returned as a jump of size `top`.
#[derive(Clone, Debug)]
pub(crate) struct JumpTable {
    log_r: Vec<f64>,
    log_tail: Vec<f64>,
    rate: f64,
    beyond: f64,
    top: f64,
}

impl JumpTable {
    /// `grid` increasing, `tail[i] = ∫_{grid[i]}^∞`, `tail[last]` the mass beyond the grid.
    pub(crate) fn from_tail(grid: &[f64], tail: &[f64]) -> Result<Self> {
        if grid.len() != tail.len() || grid.len() < 2 {
            return Err(Error::Table("grid and tail lengths differ".into()));
        }
        let slack = 1e-8 * tail[0];
        for w in tail.windows(2) {
            if !(w[1] <= w[0] + slack && w[1] >= -slack) || !w[0].is_finite() {
                return Err(Error::Table(format!("tail values not decreasing: {} then {}", w[0], w[1])));
            }
        }
        let rate = tail[0];
        if !(rate > 0.0) {
            return Err(Error::Table(format!("jump rate must be positive, got {rate}")));
        }
        // Enforce monotonicity against rounding before taking logs.
        let mut clean = tail.to_vec();
        clean[0] = clean[0].max(0.0);
        for i in 1..clean.len() {
            clean[i] = clean[i].min(clean[i - 1]).max(0.0);
        }
        Ok(Self {
            log_r: grid.iter().map(|r| r.ln()).collect(),
            log_tail: clean.iter().map(|t| t.ln()).collect(),
            rate,
            beyond: clean[clean.len() - 1],
            top: grid[grid.len() - 1],
        })
    }

    pub(crate) fn rate(&self) -> f64 {
        self.rate
    }

    pub(crate) fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let target = open01(rng) * self.rate;
        if target <= self.beyond {
            return self.top;
        }
        let lt = target.ln();
        // First index whose tail drops below the target.
        let (mut lo, mut hi) = (0, self.log_tail.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.log_tail[mid] >= lt {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (t0, t1) = (self.log_tail[lo], self.log_tail[hi]);
        let w = if t0 > t1 { ((t0 - lt) / (t0 - t1)).clamp(0.0, 1.0) } else { 0.0 };
        (self.log_r[lo] + w * (self.log_r[hi] - self.log_r[lo])).exp()
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Stable { beta: f64, scale: f64 },
    Sum(Vec<Kind>),
    Compound { table: JumpTable, count: Poisson<f64>, shift: f64 },
}

/// Increments of the subordinator with exponent `f` over a fixed step `h`.
///
/// Stable exponents and sums of them are sampled exactly; other families use
/// compound-Poisson jumps of size at least `eps` plus the compensating drift.
#[derive(Clone, Debug)]
pub struct SubordinatorSampler {
    kind: Kind,
}

impl SubordinatorSampler {
    pub fn new(f: &BernsteinFunction, h: f64, eps: f64) -> Result<Self> {
        if !(h > 0.0 && eps > 0.0) {
            return Err(Error::Domain(format!("subordinator sampling needs h, eps > 0, got {h}, {eps}")));
        }
        let stable = |alpha: f64| {
            let beta = alpha / 2.0;
            Kind::Stable { beta, scale: h.powf(1.0 / beta) }
        };
        let kind = match f.family() {
            Family::Stable { alpha } => stable(alpha),
            Family::Mixed { alpha, beta } => Kind::Sum(vec![stable(alpha), stable(beta)]),
            Family::LogStable { alpha, p } if p == 0.0 => stable(alpha),
            _ => {
                let table = subordinator_table(f, eps)?;
                let count = Poisson::new(table.rate() * h)
                    .map_err(|e| Error::Table(format!("Poisson rate {}: {e}", table.rate() * h)))?;
                let shift = (f.drift() + f.small_jump_mean(eps)?) * h;
                Kind::Compound { table, count, shift }
            }
        };
        Ok(Self { kind })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        draw(&self.kind, rng)
    }
}

fn draw<R: Rng + ?Sized>(kind: &Kind, rng: &mut R) -> f64 {
    match kind {
        Kind::Stable { beta, scale } => scale * kanter(*beta, rng),
        Kind::Sum(parts) => parts.iter().map(|k| draw(k, rng)).sum(),
        Kind::Compound { table, count, shift } => {
            let n = count.sample(rng) as u64;
            let mut s = *shift;
            for _ in 0..n {
                s += table.sample(rng);
            }
            s
        }
    }
}

/// Single increment; builds the jump table on every call, so prefer
/// [`SubordinatorSampler`] for repeated draws.
pub fn sample_subordinator<R: Rng + ?Sized>(f: &BernsteinFunction, h: f64, eps: f64, rng: &mut R) -> Result<f64> {
    Ok(SubordinatorSampler::new(f, h, eps)?.sample(rng))
}

fn subordinator_table(f: &BernsteinFunction, eps: f64) -> Result<JumpTable> {
    let n0 = f.tail_mass(eps).map_err(|e| Error::Table(format!("N({eps}): {e}")))?;
    // Extend decade by decade until the tail is negligible.
    let mut top = eps;
    for _ in 0..20 {
        top *= 10.0;
        if f.tail_mass(top).map_err(|e| Error::Table(format!("N({top}): {e}")))? <= 1e-12 * n0 {
            break;
        }
    }
    let grid = log_grid(eps, top, TABLE_POINTS);
    let tail = grid
        .iter()
        .map(|&t| f.tail_mass(t).map_err(|e| Error::Table(format!("N({t}): {e}"))))
        .collect::<Result<Vec<_>>>()?;
    JumpTable::from_tail(&grid, &tail)
}
