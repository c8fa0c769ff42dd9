use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::sampler::{symmetric_stable, JumpTable, SubordinatorSampler, TABLE_POINTS};
use crate::bernstein::{log_grid, Family};
use crate::error::{Error, Result};
use crate::levy_kernel::{sphere_area, JumpMode, ProcessSpec};
use crate::quad::{gk61, integrate_to_infinity, Tolerance};

/// One-step transition sampler of the free process over a fixed time step.
#[derive(Clone, Debug)]
pub(crate) enum Stepper {
    /// One-dimensional stable motion, drawn directly.
    StableLine { alpha: f64, scale: f64 },
    /// `W(S_h)` with Brownian increments of variance `2 S_h` per axis.
    Subordinated { sub: SubordinatorSampler },
    /// Compound-Poisson jumps of length at least `eps` plus a Gaussian for the rest.
    Jumps { table: JumpTable, count: Poisson<f64>, sigma: f64 },
}

impl Stepper {
    pub(crate) fn new(p: &ProcessSpec, h: f64, eps: f64) -> Result<Self> {
        let f = p.bernstein();
        match p.mode() {
            JumpMode::SubordinateBm => {
                if p.dim() == 1 {
                    let alpha = match f.family() {
                        Family::Stable { alpha } => Some(alpha),
                        Family::LogStable { alpha, p } if p == 0.0 => Some(alpha),
                        _ => None,
                    };
                    if let Some(alpha) = alpha {
                        return Ok(Self::StableLine { alpha, scale: h.powf(1.0 / alpha) });
                    }
                }
                Ok(Self::Subordinated { sub: SubordinatorSampler::new(f, h, eps)? })
            }
            JumpMode::Perturbed { .. } => {
                let (table, sigma2) = radial_table(p, eps)?;
                let count = Poisson::new(table.rate() * h)
                    .map_err(|e| Error::Table(format!("Poisson rate {}: {e}", table.rate() * h)))?;
                Ok(Self::Jumps { table, count, sigma: (sigma2 * h / p.dim() as f64).sqrt() })
            }
        }
    }

    /// Advances `x` by one step; `dir` is scratch space of the same length.
    pub(crate) fn step<R: Rng + ?Sized>(&self, x: &mut [f64], dir: &mut [f64], rng: &mut R) {
        match self {
            Self::StableLine { alpha, scale } => x[0] += scale * symmetric_stable(*alpha, rng),
            Self::Subordinated { sub } => {
                let sd = (2.0 * sub.sample(rng)).sqrt();
                for xi in x.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *xi += sd * z;
                }
            }
            Self::Jumps { table, count, sigma } => {
                for xi in x.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *xi += sigma * z;
                }
                let n = count.sample(rng) as u64;
                for _ in 0..n {
                    let r = table.sample(rng);
                    random_direction(dir, rng);
                    for (xi, ui) in x.iter_mut().zip(dir.iter()) {
                        *xi += r * ui;
                    }
                }
            }
        }
    }
}

fn random_direction<R: Rng + ?Sized>(u: &mut [f64], rng: &mut R) {
    if u.len() == 1 {
        u[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut norm2 = 0.0;
        for ui in u.iter_mut() {
            *ui = StandardNormal.sample(rng);
            norm2 += *ui * *ui;
        }
        if norm2 > 1e-300 {
            let inv = norm2.sqrt().recip();
            u.iter_mut().for_each(|ui| *ui *= inv);
            return;
        }
    }
}

/// Radial jump table for `|z| ≥ eps` under `J_X`, and `σ²(eps) = ∫_{|z|<eps} |z|² J_X(z) dz`.
pub(crate) fn radial_table(p: &ProcessSpec, eps: f64) -> Result<(JumpTable, f64)> {
    let d = p.dim();
    let omega = sphere_area(d);
    let jx = |r: f64| p.jump_density_jx(r).unwrap_or(f64::NAN);
    let table_err = |e: Error| Error::Table(format!("radial jump table: {e}"));
    // In log-radius: ω_d r^d j_X(r) dv.
    let g = |v: f64| {
        let r = v.exp();
        omega * r.powi(d as i32) * jx(r)
    };
    let top = eps * 1e12;
    let grid = log_grid(eps, top, TABLE_POINTS);
    let beyond = integrate_to_infinity(|r| omega * r.powi(d as i32 - 1) * jx(r), top, Tolerance::new(0.0, 1e-8))
        .map_err(table_err)?
        .value;
    let mut tail = vec![0.0; grid.len()];
    tail[grid.len() - 1] = beyond;
    for i in (0..grid.len() - 1).rev() {
        let (piece, _) = gk61(&g, grid[i].ln(), grid[i + 1].ln());
        if !piece.is_finite() || piece < 0.0 {
            return Err(Error::Table(format!("jump density not integrable near r={}", grid[i])));
        }
        tail[i] = tail[i + 1] + piece;
    }
    // r = eps e^{-u}: ω_d r^{d+2} j_X(r) du.
    let small = integrate_to_infinity(
        |u| {
            let r = eps * (-u).exp();
            omega * r.powi(d as i32 + 2) * jx(r)
        },
        0.0,
        Tolerance::new(0.0, 1e-10),
    )
    .map_err(table_err)?
    .value;
    Ok((JumpTable::from_tail(&grid, &tail)?, small))
}
