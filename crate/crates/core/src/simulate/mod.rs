//! Monte Carlo simulation of killed jump processes and the estimators built on it.
//!
//! Path `i` draws from a ChaCha8 stream seeded with `base_seed ^ splitmix64(i)`, and
//! every accumulator is an integer sum, so results do not depend on the thread count.

mod sampler;
mod step;

pub use sampler::{sample_stable_subordinator, sample_subordinator, SubordinatorSampler, TABLE_POINTS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{dist, Domain};
use crate::levy_kernel::{ball_volume, ProcessSpec};
use step::Stepper;

/// Time discretisation, path count and seeding of a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    /// Time step `h`.
    pub step: f64,
    /// Horizon `T`.
    pub horizon: f64,
    pub n_paths: u64,
    pub base_seed: u64,
    /// Cutoff below which jumps are replaced by their mean or a Gaussian.
    pub small_jump_cutoff: f64,
}

impl PathConfig {
    pub fn new(step: f64, horizon: f64, n_paths: u64, base_seed: u64) -> Result<Self> {
        Self { step, horizon, n_paths, base_seed, small_jump_cutoff: 1e-4 }.validated()
    }

    pub fn with_cutoff(mut self, eps: f64) -> Result<Self> {
        self.small_jump_cutoff = eps;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.step > 0.0 && self.step <= self.horizon && self.horizon.is_finite()) {
            return domain(format!("need 0 < h <= T, got h={}, T={}", self.step, self.horizon));
        }
        if self.n_paths == 0 {
            return domain("need at least one path");
        }
        if !(self.small_jump_cutoff > 0.0) {
            return domain(format!("small-jump cutoff must be positive, got {}", self.small_jump_cutoff));
        }
        Ok(self)
    }

    /// Number of steps to reach `t`, which must lie on the grid.
    pub fn steps_to(&self, t: f64) -> Result<usize> {
        let k = (t / self.step).round();
        if !(t >= 0.0) || (k * self.step - t).abs() > 1e-9 * t.max(self.step) {
            return domain(format!("t={t} is not a multiple of the step {}", self.step));
        }
        if t > self.horizon * (1.0 + 1e-12) {
            return domain(format!("t={t} exceeds the horizon {}", self.horizon));
        }
        Ok(k as usize)
    }

    fn total_steps(&self) -> usize {
        (self.horizon / self.step).round() as usize
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub config: PathConfig,
}

impl MCEstimate {
    /// `stderr / value`; infinite for a zero estimate.
    pub fn relative_stderr(&self) -> f64 {
        if self.value > 0.0 {
            self.stderr / self.value
        } else {
            f64::INFINITY
        }
    }
}

pub fn splitmix64(i: u64) -> u64 {
    let mut z = i.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream of path `i`.
pub fn path_rng(base_seed: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base_seed ^ splitmix64(i))
}

fn check_start(p: &ProcessSpec, dom: &Domain, x: &[f64]) -> Result<()> {
    if p.dim() != dom.dim() || x.len() != dom.dim() {
        return domain(format!(
            "dimension mismatch: process {}, domain {}, point {}",
            p.dim(),
            dom.dim(),
            x.len()
        ));
    }
    if !dom.contains(x) {
        return domain(format!("start point {x:?} lies outside the domain"));
    }
    Ok(())
}

// Runs one path until it leaves `dom` or `n_steps` is reached; `visit(k, x)` sees every
// alive grid position including k = 0. Returns the exit step.
fn walk(
    stepper: &Stepper,
    dom: &Domain,
    x0: &[f64],
    n_steps: usize,
    rng: &mut ChaCha8Rng,
    mut visit: impl FnMut(usize, &[f64]),
) -> Option<usize> {
    let mut x = x0.to_vec();
    let mut scratch = vec![0.0; x0.len()];
    visit(0, &x);
    for k in 1..=n_steps {
        stepper.step(&mut x, &mut scratch, rng);
        if !dom.contains(&x) {
            return Some(k);
        }
        visit(k, &x);
    }
    None
}

// Order-independent parallel map-reduce over path indices.
fn over_paths<A, I, B, M>(cfg: &PathConfig, init: I, body: B, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    B: Fn(&mut A, &mut ChaCha8Rng) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    (0..cfg.n_paths)
        .into_par_iter()
        .fold(&init, |mut acc, i| {
            let mut rng = path_rng(cfg.base_seed, i);
            body(&mut acc, &mut rng);
            acc
        })
        .reduce(&init, merge)
}

fn add_into(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Alive / killed state of a simulated path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathStatus {
    Alive,
    Killed,
}

/// One path of the killed process.
#[derive(Clone, Debug, PartialEq)]
pub struct KilledPath {
    pub status: PathStatus,
    /// First grid step outside the domain, or the number of steps if alive.
    pub exit_step: usize,
    /// Positions at grid times `0, h, 2h, ...` while alive.
    pub positions: Vec<Vec<f64>>,
}

/// Simulates one path up to `cfg.horizon`, recording every grid position.
pub fn simulate_killed_path(
    p: &ProcessSpec,
    dom: &Domain,
    x: &[f64],
    cfg: &PathConfig,
    rng: &mut ChaCha8Rng,
) -> Result<KilledPath> {
    check_start(p, dom, x)?;
    let stepper = Stepper::new(p, cfg.step, cfg.small_jump_cutoff)?;
    let n = cfg.total_steps();
    let mut positions = Vec::new();
    let exit = walk(&stepper, dom, x, n, rng, |_, y| positions.push(y.to_vec()));
    Ok(match exit {
        Some(k) => KilledPath { status: PathStatus::Killed, exit_step: k, positions },
        None => KilledPath { status: PathStatus::Alive, exit_step: n, positions },
    })
}

/// Disjoint cubes of side `width` inside a domain, for histogram density estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    centers: Vec<Vec<f64>>,
    width: f64,
}

impl CellGrid {
    pub fn new(dom: &Domain, centers: Vec<Vec<f64>>, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return domain(format!("cell width must be positive, got {width}"));
        }
        let d = dom.dim();
        let reach = width * (d as f64).sqrt() / 2.0;
        for c in &centers {
            if c.len() != d || !dom.contains(c) || dom.delta(c) < reach * (1.0 - 1e-9) {
                return domain(format!("cell at {c:?} of width {width} is not inside the domain"));
            }
        }
        for (i, a) in centers.iter().enumerate() {
            for b in &centers[i + 1..] {
                let sep = a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
                if sep < width * (1.0 - 1e-9) {
                    return domain(format!("cells at {a:?} and {b:?} overlap"));
                }
            }
        }
        Ok(Self { centers, width })
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn volume(&self) -> f64 {
        self.width.powi(self.centers.first().map_or(1, |c| c.len()) as i32)
    }

    /// Index of the half-open cell containing `x`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let half = self.width / 2.0;
        self.centers
            .iter()
            .position(|c| c.iter().zip(x).all(|(ci, xi)| *xi >= ci - half && *xi < ci + half))
    }
}

/// Survival counts and histogram counts at fixed observation times.
#[derive(Clone, Debug, PartialEq)]
pub struct KilledRun {
    pub config: PathConfig,
    pub start: Vec<f64>,
    pub times: Vec<f64>,
    pub cells: Option<CellGrid>,
    alive: Vec<u64>,
    // Row-major: times × cells.
    counts: Vec<u64>,
}

/// Simulates `cfg.n_paths` paths from `x`, counting survivors at each time and,
/// when `cells` is given, survivors inside each cell.
pub fn run_killed(
    p: &ProcessSpec,
    dom: &Domain,
    x: &[f64],
    times: &[f64],
    cells: Option<CellGrid>,
    cfg: &PathConfig,
) -> Result<KilledRun> {
    check_start(p, dom, x)?;
    let steps: Vec<usize> = times.iter().map(|&t| cfg.steps_to(t)).collect::<Result<_>>()?;
    if steps.windows(2).any(|w| w[1] <= w[0]) {
        return domain("observation times must be strictly increasing");
    }
    let stepper = Stepper::new(p, cfg.step, cfg.small_jump_cutoff)?;
    let last = steps.last().copied().unwrap_or(0);
    let n_cells = cells.as_ref().map_or(0, |c| c.centers.len());
    let width = times.len() * (1 + n_cells);
    let counts = over_paths(
        cfg,
        || vec![0u64; width],
        |acc, rng| {
            let mut next = 0;
            walk(&stepper, dom, x, last, rng, |k, y| {
                if next < steps.len() && k == steps[next] {
                    acc[next] += 1;
                    if let Some(grid) = &cells {
                        if let Some(j) = grid.locate(y) {
                            acc[steps.len() + next * n_cells + j] += 1;
                        }
                    }
                    next += 1;
                }
            });
        },
        add_into,
    );
    Ok(KilledRun {
        config: *cfg,
        start: x.to_vec(),
        times: times.to_vec(),
        cells,
        alive: counts[..times.len()].to_vec(),
        counts: counts[times.len()..].to_vec(),
    })
}

fn binomial(successes: u64, n: u64, scale: f64, cfg: PathConfig) -> MCEstimate {
    let q = successes as f64 / n as f64;
    MCEstimate { value: q * scale, stderr: (q * (1.0 - q) / n as f64).sqrt() * scale, n, config: cfg }
}

impl KilledRun {
    pub fn n(&self) -> u64 {
        self.config.n_paths
    }

    pub fn alive_count(&self, i: usize) -> u64 {
        self.alive[i]
    }

    /// `P_x(τ_D > t_i)`.
    pub fn survival(&self, i: usize) -> MCEstimate {
        binomial(self.alive[i], self.n(), 1.0, self.config)
    }

    pub fn cell_count(&self, i: usize, j: usize) -> u64 {
        let n_cells = self.cells.as_ref().map_or(0, |c| c.centers.len());
        self.counts[i * n_cells + j]
    }

    /// Histogram estimate of `p_D(t_i, x, ·)` on cell `j`.
    pub fn density(&self, i: usize, j: usize) -> Result<MCEstimate> {
        let grid = self.cells.as_ref().ok_or_else(|| Error::Domain("run has no cells".into()))?;
        if j >= grid.centers.len() {
            return domain(format!("cell index {j} out of range"));
        }
        Ok(binomial(self.cell_count(i, j), self.n(), 1.0 / grid.volume(), self.config))
    }

    /// Least-squares slope of `-log P_x(τ_D > t)` over the observation times in `range`.
    pub fn lambda1(&self, range: std::ops::Range<usize>) -> Result<MCEstimate> {
        if range.len() < 2 || range.end > self.times.len() {
            return domain("λ1 fit needs at least two observation times");
        }
        let n = self.n() as f64;
        let s: Vec<f64> = range.clone().map(|i| self.alive[i] as f64 / n).collect();
        let last = s[s.len() - 1];
        if last < 10.0 / n {
            return Err(Error::InsufficientSignal(format!(
                "survival {last:e} at t={} is below 10/n",
                self.times[range.end - 1]
            )));
        }
        let t: Vec<f64> = range.clone().map(|i| self.times[i]).collect();
        let y: Vec<f64> = s.iter().map(|v| -v.ln()).collect();
        let tbar = t.iter().sum::<f64>() / t.len() as f64;
        let sxx: f64 = t.iter().map(|ti| (ti - tbar).powi(2)).sum();
        let w: Vec<f64> = t.iter().map(|ti| (ti - tbar) / sxx).collect();
        let slope: f64 = w.iter().zip(&y).map(|(a, b)| a * b).sum();
        // cov(log Ŝ_i, log Ŝ_j) ≈ (1 - S_i)/(n S_i) for t_i ≤ t_j.
        let mut var = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                let k = i.min(j);
                var += w[i] * w[j] * (1.0 - s[k]) / (n * s[k]);
            }
        }
        Ok(MCEstimate { value: slope, stderr: var.max(0.0).sqrt(), n: self.n(), config: self.config })
    }
}

/// `P_x(τ_D > t)` with binomial standard error.
pub fn estimate_survival(p: &ProcessSpec, dom: &Domain, x: &[f64], t: f64, cfg: &PathConfig) -> Result<MCEstimate> {
    Ok(run_killed(p, dom, x, &[t], None, cfg)?.survival(0))
}

/// Histogram estimates of `p_D(t, x, ·)` on cubes of side `width` around `centers`.
pub fn estimate_pd(
    p: &ProcessSpec,
    dom: &Domain,
    t: f64,
    x: &[f64],
    centers: Vec<Vec<f64>>,
    width: f64,
    cfg: &PathConfig,
) -> Result<Vec<MCEstimate>> {
    let cells = CellGrid::new(dom, centers, width)?;
    let n_cells = cells.centers.len();
    let run = run_killed(p, dom, x, &[t], Some(cells), cfg)?;
    (0..n_cells).map(|j| run.density(0, j)).collect()
}

/// Green function estimate with the fraction of paths still alive at the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenEstimate {
    pub estimate: MCEstimate,
    /// Paths not yet killed at the horizon; their remaining occupation is missing.
    pub alive_at_horizon: f64,
}

/// Occupation-time estimates of `G_D(x, y)` for several `y` from one set of paths.
///
/// Occupation of `B(y, ball_eps)` is sampled every `stride` steps and weighted by
/// `stride · h`, so `stride = 1` is the occupation estimator and larger strides give
/// the Riemann sum `Σ_k p̂_D(t_k, x, y) Δt`.
pub fn green_occupation(
    p: &ProcessSpec,
    dom: &Domain,
    x: &[f64],
    ys: &[Vec<f64>],
    ball_eps: f64,
    stride: usize,
    cfg: &PathConfig,
) -> Result<Vec<GreenEstimate>> {
    check_start(p, dom, x)?;
    if !(ball_eps > 0.0) || stride == 0 {
        return domain("Green estimates need a positive ball radius and stride");
    }
    for y in ys {
        if y.len() != x.len() || !dom.contains(y) {
            return domain(format!("target {y:?} lies outside the domain"));
        }
        if dist(x, y) == 0.0 {
            return domain("Green estimates need x != y");
        }
    }
    let stepper = Stepper::new(p, cfg.step, cfg.small_jump_cutoff)?;
    let n_steps = cfg.total_steps();
    let m = ys.len();
    #[derive(Clone)]
    struct Acc {
        sum: Vec<u64>,
        sum2: Vec<u128>,
        alive: u64,
    }
    let acc = over_paths(
        cfg,
        || Acc { sum: vec![0; m], sum2: vec![0; m], alive: 0 },
        |acc, rng| {
            let mut hits = vec![0u64; m];
            let exit = walk(&stepper, dom, x, n_steps, rng, |k, z| {
                if k % stride == 0 {
                    for (h, y) in hits.iter_mut().zip(ys) {
                        if dist(z, y) < ball_eps {
                            *h += 1;
                        }
                    }
                }
            });
            if exit.is_none() {
                acc.alive += 1;
            }
            for j in 0..m {
                acc.sum[j] += hits[j];
                acc.sum2[j] += (hits[j] as u128) * (hits[j] as u128);
            }
        },
        |mut a, b| {
            a.sum = add_into(a.sum, b.sum);
            a.sum2.iter_mut().zip(b.sum2).for_each(|(x, y)| *x += y);
            a.alive += b.alive;
            a
        },
    );
    let n = cfg.n_paths as f64;
    let weight = stride as f64 * cfg.step / (ball_volume(x.len()) * ball_eps.powi(x.len() as i32));
    Ok((0..m)
        .map(|j| {
            let mean = acc.sum[j] as f64 / n;
            let var = (acc.sum2[j] as f64 / n - mean * mean).max(0.0);
            GreenEstimate {
                estimate: MCEstimate {
                    value: mean * weight,
                    stderr: (var / n).sqrt() * weight,
                    n: cfg.n_paths,
                    config: *cfg,
                },
                alive_at_horizon: acc.alive as f64 / n,
            }
        })
        .collect())
}

/// `G_D(x, y)` by mean occupation time of `B(y, ball_eps)` divided by its volume.
pub fn estimate_green(
    p: &ProcessSpec,
    dom: &Domain,
    x: &[f64],
    y: &[f64],
    ball_eps: f64,
    cfg: &PathConfig,
) -> Result<GreenEstimate> {
    Ok(green_occupation(p, dom, x, &[y.to_vec()], ball_eps, 1, cfg)?[0])
}

/// `λ1` from the decay of the survival probability on `t_grid`.
pub fn estimate_lambda1(
    p: &ProcessSpec,
    dom: &Domain,
    x: &[f64],
    t_grid: &[f64],
    cfg: &PathConfig,
) -> Result<MCEstimate> {
    run_killed(p, dom, x, t_grid, None, cfg)?.lambda1(0..t_grid.len())
}

/// Mean first exit time, with the fraction of paths truncated at the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeEstimate {
    pub estimate: MCEstimate,
    pub truncated: f64,
}

/// `E_x[τ_D]`, exit times observed on the grid and capped at the horizon.
pub fn estimate_exit_time(p: &ProcessSpec, dom: &Domain, x: &[f64], cfg: &PathConfig) -> Result<ExitTimeEstimate> {
    check_start(p, dom, x)?;
    let stepper = Stepper::new(p, cfg.step, cfg.small_jump_cutoff)?;
    let n_steps = cfg.total_steps();
    let (sum, sum2, alive) = over_paths(
        cfg,
        || (0u64, 0u128, 0u64),
        |acc, rng| {
            let k = match walk(&stepper, dom, x, n_steps, rng, |_, _| {}) {
                Some(k) => k,
                None => {
                    acc.2 += 1;
                    n_steps
                }
            } as u64;
            acc.0 += k;
            acc.1 += (k as u128) * (k as u128);
        },
        |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
    );
    let n = cfg.n_paths as f64;
    let mean = sum as f64 / n;
    let var = (sum2 as f64 / n - mean * mean).max(0.0);
    Ok(ExitTimeEstimate {
        estimate: MCEstimate {
            value: mean * cfg.step,
            stderr: (var / n).sqrt() * cfg.step,
            n: cfg.n_paths,
            config: *cfg,
        },
        truncated: alive as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::BernsteinFunction;

    fn cauchy() -> ProcessSpec {
        ProcessSpec::new(1, BernsteinFunction::stable(1.0).unwrap()).unwrap()
    }

    fn interval() -> Domain {
        "intervals:(-1,1)".parse().unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(PathConfig::new(0.1, 0.05, 10, 0).is_err());
        assert!(PathConfig::new(0.1, 1.0, 0, 0).is_err());
        let c = PathConfig::new(0.01, 1.0, 10, 0).unwrap();
        assert_eq!(c.steps_to(0.5).unwrap(), 50);
        assert!(c.steps_to(0.505).is_err());
        assert!(c.steps_to(2.0).is_err());
    }

    #[test]
    fn path_starts_alive_and_is_reproducible() {
        let cfg = PathConfig::new(0.01, 1.0, 1, 9).unwrap();
        let a = simulate_killed_path(&cauchy(), &interval(), &[0.2], &cfg, &mut path_rng(9, 0)).unwrap();
        let b = simulate_killed_path(&cauchy(), &interval(), &[0.2], &cfg, &mut path_rng(9, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.positions[0], vec![0.2]);
        assert_eq!(a.positions.len(), a.exit_step + usize::from(a.status == PathStatus::Alive));
        assert!(simulate_killed_path(&cauchy(), &interval(), &[2.0], &cfg, &mut path_rng(9, 0)).is_err());
    }

    #[test]
    fn short_time_survival_in_ball() {
        let p = ProcessSpec::new(2, BernsteinFunction::stable(1.0).unwrap()).unwrap();
        let ball = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        let cfg = PathConfig::new(1e-5, 1e-4, 10_000, 1).unwrap();
        let s = estimate_survival(&p, &ball, &[0.0, 0.0], 1e-4, &cfg).unwrap();
        assert!(s.value >= 0.99);
        assert_eq!(estimate_survival(&p, &ball, &[0.0, 0.0], 0.0, &cfg).unwrap().value, 1.0);
    }

    #[test]
    fn survival_monotone_and_partition_sums() {
        let cfg = PathConfig::new(0.01, 0.5, 4000, 3).unwrap();
        let centers: Vec<Vec<f64>> = (0..20).map(|k| vec![-0.95 + 0.1 * k as f64]).collect();
        let cells = CellGrid::new(&interval(), centers, 0.1).unwrap();
        let run = run_killed(&cauchy(), &interval(), &[0.1], &[0.1, 0.2, 0.5], Some(cells), &cfg).unwrap();
        assert!(run.alive_count(0) >= run.alive_count(1) && run.alive_count(1) >= run.alive_count(2));
        for i in 0..3 {
            let total: u64 = (0..20).map(|j| run.cell_count(i, j)).sum();
            assert_eq!(total, run.alive_count(i));
            let mass: f64 = (0..20).map(|j| run.density(i, j).unwrap().value * 0.1).sum();
            assert!((mass - run.survival(i).value).abs() < 1e-12);
        }
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let cfg = PathConfig::new(0.01, 0.3, 3000, 77).unwrap();
        let go = || {
            let cells = CellGrid::new(&interval(), vec![vec![0.0], vec![0.5]], 0.2).unwrap();
            run_killed(&cauchy(), &interval(), &[0.3], &[0.1, 0.3], Some(cells), &cfg).unwrap()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(go);
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(go);
        assert_eq!(one, three);
    }

    #[test]
    fn domain_monotonicity_under_coupling() {
        let cfg = PathConfig::new(0.01, 0.5, 3000, 5).unwrap();
        let small = interval();
        let big: Domain = "intervals:(-2,2)".parse().unwrap();
        let c = vec![vec![0.2]];
        let a = estimate_pd(&cauchy(), &small, 0.5, &[0.0], c.clone(), 0.2, &cfg).unwrap();
        let b = estimate_pd(&cauchy(), &big, 0.5, &[0.0], c, 0.2, &cfg).unwrap();
        assert!(a[0].value <= b[0].value);
    }

    #[test]
    fn green_estimators_agree() {
        let cfg = PathConfig::new(0.005, 20.0, 4000, 11).unwrap();
        let ys = vec![vec![0.4], vec![-0.95]];
        let g = green_occupation(&cauchy(), &interval(), &[0.0], &ys, 0.05, 1, &cfg).unwrap();
        let cfg2 = PathConfig { base_seed: 12, ..cfg };
        let r = green_occupation(&cauchy(), &interval(), &[0.0], &ys, 0.05, 2, &cfg2).unwrap();
        let (a, b) = (g[0].estimate, r[0].estimate);
        assert!((a.value - b.value).abs() < 3.0 * a.stderr.hypot(b.stderr), "{a:?} {b:?}");
        // Near the boundary the occupation is much smaller.
        assert!(g[1].estimate.value < 0.5 * g[0].estimate.value);
        assert!(g[0].alive_at_horizon < 1e-3);
        assert!(estimate_green(&cauchy(), &interval(), &[0.0], &[0.0], 0.05, &cfg).is_err());
    }

    #[test]
    fn lambda1_for_cauchy_interval() {
        let cfg = PathConfig::new(0.01, 4.0, 40_000, 21).unwrap();
        let times: Vec<f64> = (0..7).map(|k| 1.0 + 0.5 * k as f64).collect();
        let run = run_killed(&cauchy(), &interval(), &[0.0], &times, None, &cfg).unwrap();
        let l = run.lambda1(0..7).unwrap();
        // Principal Dirichlet eigenvalue of the Cauchy process on (-1, 1): 1.1577738...
        assert!(l.value > 0.0);
        assert!((l.value - 1.1577738).abs() < 4.0 * l.stderr + 0.05, "{l:?}");
        let few = PathConfig::new(0.01, 4.0, 50, 21).unwrap();
        let run = run_killed(&cauchy(), &interval(), &[0.0], &times, None, &few).unwrap();
        assert!(matches!(run.lambda1(0..7), Err(Error::InsufficientSignal(_))));
    }

    #[test]
    fn exit_time_of_cauchy_ball() {
        // E_0[τ_{(-r, r)}] = r for the Cauchy process (√(r² - x²) at x = 0).
        let cfg = PathConfig::new(1e-3, 20.0, 20_000, 8).unwrap();
        let dom: Domain = "intervals:(-0.5,0.5)".parse().unwrap();
        let e = estimate_exit_time(&cauchy(), &dom, &[0.0], &cfg).unwrap();
        assert!((e.estimate.value - 0.5).abs() < 4.0 * e.estimate.stderr + 0.05, "{e:?}");
        assert!(e.truncated == 0.0);
    }

    #[test]
    fn perturbed_paths_run() {
        let p = ProcessSpec::perturbed(1, BernsteinFunction::stable(1.0).unwrap(), 0.25).unwrap();
        let cfg = PathConfig::new(0.01, 0.5, 2000, 4).unwrap().with_cutoff(0.01).unwrap();
        let s = estimate_survival(&p, &interval(), &[0.0], 0.5, &cfg).unwrap();
        let s0 = estimate_survival(&cauchy(), &interval(), &[0.0], 0.5, &cfg).unwrap();
        assert!(s.value > 0.0 && s.value < 1.0);
        // Removing jumps near length 1 makes escape from the centre less likely.
        assert!(s.value > s0.value - 3.0 * s.stderr.hypot(s0.stderr));
    }
}
