//! Ratio-spread checks of two-sided estimates against simulation and quadrature.
//!
//! A two-sided estimate `f ≍ g` holds with some constant exactly when `f/g` stays
//! in a bounded band, so every check reports the spread `max(f/g) / min(f/g)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bernstein::log_grid;
use crate::bounds::{
    c11_shape, lambert_green_shape, factorization_shape, global_shape, green_shape, green_shape_special,
    h_t_closed, h_t_numeric_with, horizon_constants, large_time_shape, large_time_survival_shape,
    survival_shape, GreenCondition,
};
use crate::error::{domain, Error, Result};
use crate::geometry::Domain;
use crate::levy_kernel::ProcessSpec;
use crate::quad::Tolerance;
use crate::simulate::{green_occupation, run_killed, CellGrid, KilledRun, PathConfig};

/// Points whose relative standard error exceeds this are left out of the spread.
pub const DEFAULT_EXCLUSION: f64 = 0.3;

/// Shapes addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShapeName {
    Global,
    Factorized,
    C11,
    Survival,
    LargeTime,
    Green,
    GreenSpecial,
    Lambert,
}

impl ShapeName {
    pub const ALL: [ShapeName; 8] = [
        ShapeName::Global,
        ShapeName::Factorized,
        ShapeName::C11,
        ShapeName::Survival,
        ShapeName::LargeTime,
        ShapeName::Green,
        ShapeName::GreenSpecial,
        ShapeName::Lambert,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ShapeName::Global => "global",
            ShapeName::Factorized => "factorized",
            ShapeName::C11 => "c11",
            ShapeName::Survival => "survival",
            ShapeName::LargeTime => "largetime",
            ShapeName::Green => "green",
            ShapeName::GreenSpecial => "green-special",
            ShapeName::Lambert => "lambert",
        }
    }
}

impl fmt::Display for ShapeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShapeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown shape '{s}'")))
    }
}

/// One compared value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub t: Option<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub empirical: f64,
    pub stderr: f64,
    pub shape: f64,
    pub ratio: f64,
    pub included: bool,
}

impl RatioPoint {
    pub fn new(t: Option<f64>, x: Vec<f64>, y: Vec<f64>, empirical: f64, stderr: f64, shape: f64) -> Self {
        let ratio = empirical / shape;
        Self { t, x, y, empirical, stderr, shape, ratio, included: false }
    }

    fn admissible(&self, threshold: f64) -> bool {
        self.empirical > 0.0
            && self.shape > 0.0
            && self.ratio.is_finite()
            && self.stderr <= threshold * self.empirical
    }
}

/// Change of the spread under a refinement of the run or grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementDelta {
    pub label: String,
    pub spread: f64,
    /// `|spread_refined / spread - 1|`.
    pub relative_change: f64,
}

/// Ratios of empirical values to a shape over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub grid: String,
    pub shape: String,
    pub points: Vec<RatioPoint>,
    pub threshold: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub spread: f64,
    pub excluded: usize,
    pub refinements: Vec<RefinementDelta>,
}

impl RatioReport {
    pub fn new(grid: impl Into<String>, shape: impl Into<String>, points: Vec<RatioPoint>) -> Self {
        Self::with_threshold(grid, shape, points, DEFAULT_EXCLUSION)
    }

    pub fn with_threshold(grid: impl Into<String>, shape: impl Into<String>, mut points: Vec<RatioPoint>, threshold: f64) -> Self {
        let (mut lo, mut hi, mut excluded) = (f64::INFINITY, 0.0f64, 0);
        for p in &mut points {
            p.included = p.admissible(threshold);
            if p.included {
                lo = lo.min(p.ratio);
                hi = hi.max(p.ratio);
            } else {
                excluded += 1;
            }
        }
        let spread = if hi > 0.0 { hi / lo } else { f64::NAN };
        Self {
            grid: grid.into(),
            shape: shape.into(),
            points,
            threshold,
            min_ratio: lo,
            max_ratio: hi,
            spread,
            excluded,
            refinements: Vec::new(),
        }
    }

    /// The same points under a different exclusion threshold.
    pub fn rethreshold(&self, threshold: f64) -> Self {
        let mut r = Self::with_threshold(self.grid.clone(), self.shape.clone(), self.points.clone(), threshold);
        r.refinements = self.refinements.clone();
        r
    }

    pub fn included(&self) -> usize {
        self.points.len() - self.excluded
    }

    /// Records how the spread moved in `refined` and returns the relative change.
    pub fn record_refinement(&mut self, label: impl Into<String>, refined: &RatioReport) -> f64 {
        let relative_change = (refined.spread / self.spread - 1.0).abs();
        self.refinements.push(RefinementDelta { label: label.into(), spread: refined.spread, relative_change });
        relative_change
    }

    /// Bounded when at least one point is included and the spread is finite.
    pub fn is_bounded(&self) -> bool {
        self.included() > 0 && self.spread.is_finite()
    }
}

/// Ratio of the shapes of two reports on their shared, included points.
pub fn cross_shape_report(a: &RatioReport, b: &RatioReport) -> Result<RatioReport> {
    if a.points.len() != b.points.len() {
        return domain("cross-shape comparison needs reports on the same grid");
    }
    let mut points = Vec::with_capacity(a.points.len());
    for (p, q) in a.points.iter().zip(&b.points) {
        if p.t != q.t || p.x != q.x || p.y != q.y {
            return domain("cross-shape comparison needs reports on the same grid");
        }
        let keep = p.included && q.included;
        let mut pt = RatioPoint::new(p.t, p.x.clone(), p.y.clone(), p.shape, 0.0, q.shape);
        if !keep {
            pt.stderr = f64::INFINITY;
        }
        points.push(pt);
    }
    Ok(RatioReport::new(a.grid.clone(), format!("{}/{}", a.shape, b.shape), points))
}

/// Simulated runs from every grid point, with histogram cells around every grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRuns {
    pub points: Vec<Vec<f64>>,
    pub runs: Vec<KilledRun>,
}

impl GridRuns {
    pub fn times(&self) -> &[f64] {
        &self.runs[0].times
    }

    fn index_of_time(&self, t: f64) -> Result<usize> {
        self.times()
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.max(1.0))
            .ok_or_else(|| Error::Domain(format!("time {t} was not simulated")))
    }
}

/// Runs `cfg.n_paths` paths from each point, observing at `times` with cells of side
/// `cell_width` centred on the points. All starts share the seed sequence.
pub fn simulate_grid(
    p: &ProcessSpec,
    dom: &Domain,
    times: &[f64],
    points: &[Vec<f64>],
    cell_width: f64,
    cfg: &PathConfig,
) -> Result<GridRuns> {
    if points.is_empty() || times.is_empty() {
        return domain("grid runs need at least one point and one time");
    }
    let cells = CellGrid::new(dom, points.to_vec(), cell_width)?;
    let runs = points
        .iter()
        .map(|x| run_killed(p, dom, x, times, Some(cells.clone()), cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridRuns { points: points.to_vec(), runs })
}

fn grid_label(times: &[f64], n_points: usize, cfg: &PathConfig) -> String {
    format!("t={times:?}; points={n_points}; n={}; h={}; seed={}", cfg.n_paths, cfg.step, cfg.base_seed)
}

/// `p̂_D(t, x, y)` against a heat kernel shape on all grid pairs of `runs`.
pub fn heat_kernel_report(p: &ProcessSpec, dom: &Domain, runs: &GridRuns, t_grid: &[f64], shape: ShapeName) -> Result<RatioReport> {
    let mut points = Vec::new();
    for &t in t_grid {
        let i = runs.index_of_time(t)?;
        for (a, x) in runs.points.iter().enumerate() {
            for (b, y) in runs.points.iter().enumerate() {
                let est = runs.runs[a].density(i, b)?;
                let s = match shape {
                    ShapeName::Global => global_shape(p, t, crate::geometry::dist(x, y))?.value,
                    ShapeName::C11 => c11_shape(p, dom, t, x, y)?.value,
                    ShapeName::Factorized => {
                        let sx = runs.runs[a].survival(i).value;
                        let sy = runs.runs[b].survival(i).value;
                        factorization_shape(p, t, x, y, sx, sy)?.value
                    }
                    other => return domain(format!("'{other}' is not a heat kernel shape")),
                };
                points.push(RatioPoint::new(Some(t), x.clone(), y.clone(), est.value, est.stderr, s));
            }
        }
    }
    let cfg = runs.runs[0].config;
    Ok(RatioReport::new(grid_label(t_grid, runs.points.len(), &cfg), shape.as_str(), points))
}

/// Simulates and compares `p̂_D` with the chosen shape.
pub fn verify_heat_kernel(
    p: &ProcessSpec,
    dom: &Domain,
    t_grid: &[f64],
    point_grid: &[Vec<f64>],
    shape: ShapeName,
    cell_width: f64,
    cfg: &PathConfig,
) -> Result<RatioReport> {
    let runs = simulate_grid(p, dom, t_grid, point_grid, cell_width, cfg)?;
    heat_kernel_report(p, dom, &runs, t_grid, shape)
}

/// `P̂_x(τ_D > t)` against the survival shape, using existing runs.
pub fn survival_report(p: &ProcessSpec, dom: &Domain, runs: &GridRuns, t_grid: &[f64]) -> Result<RatioReport> {
    let mut points = Vec::new();
    for &t in t_grid {
        let i = runs.index_of_time(t)?;
        for (a, x) in runs.points.iter().enumerate() {
            let est = runs.runs[a].survival(i);
            let s = survival_shape(p, dom, t, x)?;
            points.push(RatioPoint::new(Some(t), x.clone(), Vec::new(), est.value, est.stderr, s));
        }
    }
    let cfg = runs.runs[0].config;
    Ok(RatioReport::new(grid_label(t_grid, runs.points.len(), &cfg), ShapeName::Survival.as_str(), points))
}

/// Simulates and compares survival probabilities with the survival shape.
pub fn verify_survival(p: &ProcessSpec, dom: &Domain, t_grid: &[f64], x_grid: &[Vec<f64>], cfg: &PathConfig) -> Result<RatioReport> {
    let runs = x_grid
        .iter()
        .map(|x| run_killed(p, dom, x, t_grid, None, cfg))
        .collect::<Result<Vec<_>>>()?;
    survival_report(p, dom, &GridRuns { points: x_grid.to_vec(), runs }, t_grid)
}

/// Which Green function shape to compare with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GreenForm {
    General,
    Special(GreenCondition),
    Lambert,
}

/// Green function estimates for a list of pairs: occupation estimator and, from an
/// independent seed, the Riemann sum of `p̂_D` over every second grid time.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenRuns {
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
    pub occupation: Vec<crate::simulate::GreenEstimate>,
    pub riemann: Vec<crate::simulate::GreenEstimate>,
    pub ball_eps: f64,
    pub config: PathConfig,
}

impl GreenRuns {
    /// Largest `|Ĝ - Σ p̂_D Δt| / combined stderr` over the pairs.
    pub fn max_z(&self) -> f64 {
        self.occupation
            .iter()
            .zip(&self.riemann)
            .map(|(a, b)| (a.estimate.value - b.estimate.value).abs() / a.estimate.stderr.hypot(b.estimate.stderr))
            .fold(0.0, f64::max)
    }
}

pub fn simulate_green(
    p: &ProcessSpec,
    dom: &Domain,
    pairs: &[(Vec<f64>, Vec<f64>)],
    ball_eps: f64,
    cfg: &PathConfig,
) -> Result<GreenRuns> {
    let mut occupation = vec![None; pairs.len()];
    let mut riemann = vec![None; pairs.len()];
    let second = PathConfig { base_seed: cfg.base_seed.wrapping_add(1), ..*cfg };
    let mut done = vec![false; pairs.len()];
    for i in 0..pairs.len() {
        if done[i] {
            continue;
        }
        let x = &pairs[i].0;
        let idx: Vec<usize> = (i..pairs.len()).filter(|&k| !done[k] && &pairs[k].0 == x).collect();
        let ys: Vec<Vec<f64>> = idx.iter().map(|&k| pairs[k].1.clone()).collect();
        let g = green_occupation(p, dom, x, &ys, ball_eps, 1, cfg)?;
        let r = green_occupation(p, dom, x, &ys, ball_eps, 2, &second)?;
        for (j, &k) in idx.iter().enumerate() {
            occupation[k] = Some(g[j]);
            riemann[k] = Some(r[j]);
            done[k] = true;
        }
    }
    Ok(GreenRuns {
        pairs: pairs.to_vec(),
        occupation: occupation.into_iter().map(Option::unwrap).collect(),
        riemann: riemann.into_iter().map(Option::unwrap).collect(),
        ball_eps,
        config: *cfg,
    })
}

/// `Ĝ_D(x, y)` against a Green function shape, using existing runs.
pub fn green_report(p: &ProcessSpec, dom: &Domain, runs: &GreenRuns, form: GreenForm) -> Result<RatioReport> {
    let mut points = Vec::new();
    for ((x, y), est) in runs.pairs.iter().zip(&runs.occupation) {
        let s = match form {
            GreenForm::General => green_shape(p, dom, x, y)?,
            GreenForm::Special(c) => green_shape_special(p, dom, x, y, c)?,
            GreenForm::Lambert => lambert_green_shape(p, dom, x, y)?,
        };
        points.push(RatioPoint::new(None, x.clone(), y.clone(), est.estimate.value, est.estimate.stderr, s.value));
    }
    let name = match form {
        GreenForm::General => ShapeName::Green,
        GreenForm::Special(_) => ShapeName::GreenSpecial,
        GreenForm::Lambert => ShapeName::Lambert,
    };
    let grid = format!(
        "pairs={}; eps={}; n={}; h={}; T={}; seed={}",
        runs.pairs.len(),
        runs.ball_eps,
        runs.config.n_paths,
        runs.config.step,
        runs.config.horizon,
        runs.config.base_seed
    );
    Ok(RatioReport::new(grid, name.as_str(), points))
}

/// Simulates and compares Green function estimates with a shape.
pub fn verify_green(
    p: &ProcessSpec,
    dom: &Domain,
    pairs: &[(Vec<f64>, Vec<f64>)],
    form: GreenForm,
    ball_eps: f64,
    cfg: &PathConfig,
) -> Result<RatioReport> {
    green_report(p, dom, &simulate_green(p, dom, pairs, ball_eps, cfg)?, form)
}

/// Both large-time forms: with empirical `P_x(τ_D > 1)` and with `Φ(δ_D(x))^{1/2}`.
///
/// `runs` must include time 1 and every time of `t_grid`.
pub fn large_time_reports(
    p: &ProcessSpec,
    dom: &Domain,
    runs: &GridRuns,
    t_grid: &[f64],
    lambda1: f64,
) -> Result<(RatioReport, RatioReport)> {
    let one = runs.index_of_time(1.0)?;
    let (mut surv_points, mut root_points) = (Vec::new(), Vec::new());
    for &t in t_grid {
        let i = runs.index_of_time(t)?;
        for (a, x) in runs.points.iter().enumerate() {
            for (b, y) in runs.points.iter().enumerate() {
                let est = runs.runs[a].density(i, b)?;
                let sx = runs.runs[a].survival(one).value;
                let sy = runs.runs[b].survival(one).value;
                let s1 = large_time_survival_shape(t, sx, sy, lambda1)?.value;
                let s2 = large_time_shape(p, dom, t, x, y, lambda1)?.value;
                surv_points.push(RatioPoint::new(Some(t), x.clone(), y.clone(), est.value, est.stderr, s1));
                root_points.push(RatioPoint::new(Some(t), x.clone(), y.clone(), est.value, est.stderr, s2));
            }
        }
    }
    let cfg = runs.runs[0].config;
    let label = format!("{}; lambda1={lambda1}", grid_label(t_grid, runs.points.len(), &cfg));
    Ok((
        RatioReport::new(label.clone(), "largetime-survival", surv_points),
        RatioReport::new(label, ShapeName::LargeTime.as_str(), root_points),
    ))
}

/// Simulates and compares `p̂_D` at large times with the `Φ(δ_D)^{1/2}` form.
pub fn verify_large_time(
    p: &ProcessSpec,
    dom: &Domain,
    t_grid: &[f64],
    point_grid: &[Vec<f64>],
    cell_width: f64,
    lambda1: f64,
    cfg: &PathConfig,
) -> Result<RatioReport> {
    let mut times: Vec<f64> = t_grid.to_vec();
    if !times.iter().any(|&t| (t - 1.0).abs() < 1e-12) {
        times.push(1.0);
    }
    times.sort_by(f64::total_cmp);
    let runs = simulate_grid(p, dom, &times, point_grid, cell_width, cfg)?;
    Ok(large_time_reports(p, dom, &runs, t_grid, lambda1)?.1)
}

/// `h_T` by quadrature against its closed form on an `n × n` log grid of the admissible box.
pub fn verify_h_t(p: &ProcessSpec, t_cap: f64, n: usize, tol: Tolerance) -> Result<RatioReport> {
    let h = horizon_constants(p, t_cap)?;
    let mut points = Vec::with_capacity(n * n);
    for &a in &log_grid(h.a_max * 1e-6, h.a_max, n) {
        for &r in &log_grid(h.r_max * 1e-6, h.r_max, n) {
            let num = h_t_numeric_with(p, a, r, t_cap, tol)?;
            let closed = h_t_closed(p, a, r)?.value;
            points.push(RatioPoint::new(None, vec![a], vec![r], num, 0.0, closed));
        }
    }
    let grid = format!("a in (0, {}], r in (0, {}], {n}x{n}, T={t_cap}", h.a_max, h.r_max);
    Ok(RatioReport::new(grid, "h_T closed", points))
}

/// Free-space density against the global shape on a `(t, r)` grid.
pub fn verify_free_kernel(p: &ProcessSpec, t_grid: &[f64], r_grid: &[f64]) -> Result<RatioReport> {
    let mut points = Vec::with_capacity(t_grid.len() * r_grid.len());
    for &t in t_grid {
        for &r in r_grid {
            let k = p.free_kernel(t, r)?;
            let s = global_shape(p, t, r)?.value;
            points.push(RatioPoint::new(Some(t), vec![r], Vec::new(), k, 0.0, s));
        }
    }
    Ok(RatioReport::new(
        format!("{}x{} (t, r) grid", t_grid.len(), r_grid.len()),
        ShapeName::Global.as_str(),
        points,
    ))
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
    fn shape_names_roundtrip() {
        for n in ShapeName::ALL {
            assert_eq!(n.as_str().parse::<ShapeName>().unwrap(), n);
        }
        assert!("hk".parse::<ShapeName>().is_err());
    }

    #[test]
    fn report_spread_and_exclusion() {
        let pts = vec![
            RatioPoint::new(Some(1.0), vec![0.0], vec![], 2.0, 0.1, 1.0),
            RatioPoint::new(Some(1.0), vec![0.1], vec![], 1.0, 0.1, 2.0),
            RatioPoint::new(Some(1.0), vec![0.2], vec![], 0.01, 0.01, 1.0),
            RatioPoint::new(Some(1.0), vec![0.3], vec![], 0.0, 0.0, 1.0),
        ];
        let r = RatioReport::new("g", "s", pts);
        assert_eq!(r.excluded, 2);
        assert!((r.spread - 4.0).abs() < 1e-15);
        let loose = r.rethreshold(2.0);
        assert_eq!(loose.excluded, 1);
        assert!(loose.spread >= r.spread);
        let empty = RatioReport::new("g", "s", Vec::new());
        assert!(!empty.is_bounded());
    }

    #[test]
    fn survival_deep_interior_ratio_is_the_estimate() {
        let cfg = PathConfig::new(0.01, 0.1, 2000, 1).unwrap();
        let r = verify_survival(&cauchy(), &interval(), &[0.05], &[vec![0.0]], &cfg).unwrap();
        assert_eq!(r.points[0].shape, 1.0);
        assert_eq!(r.points[0].ratio, r.points[0].empirical);
    }

    #[test]
    fn heat_kernel_shapes_share_runs() {
        let cfg = PathConfig::new(0.01, 0.5, 4000, 2).unwrap();
        let pts = vec![vec![-0.5], vec![0.0], vec![0.5]];
        let runs = simulate_grid(&cauchy(), &interval(), &[0.1, 0.5], &pts, 0.1, &cfg).unwrap();
        let c11 = heat_kernel_report(&cauchy(), &interval(), &runs, &[0.1, 0.5], ShapeName::C11).unwrap();
        let fac = heat_kernel_report(&cauchy(), &interval(), &runs, &[0.1, 0.5], ShapeName::Factorized).unwrap();
        assert_eq!(c11.points.len(), 18);
        assert!(c11.is_bounded() && fac.is_bounded());
        let cross = cross_shape_report(&fac, &c11).unwrap();
        assert!(cross.spread < 20.0);
        assert!(heat_kernel_report(&cauchy(), &interval(), &runs, &[0.2], ShapeName::C11).is_err());
        assert!(heat_kernel_report(&cauchy(), &interval(), &runs, &[0.1], ShapeName::Green).is_err());
    }

    #[test]
    fn h_t_report_for_cauchy() {
        let r = verify_h_t(&cauchy(), 4.0, 6, Tolerance::new(0.0, 1e-10)).unwrap();
        assert_eq!(r.excluded, 0);
        assert!(r.spread.is_finite() && r.spread < 10.0);
    }

    #[test]
    fn green_report_symmetric_pairs() {
        let cfg = PathConfig::new(0.005, 10.0, 2000, 3).unwrap();
        let pairs = vec![(vec![0.5], vec![-0.5]), (vec![-0.5], vec![0.5])];
        let runs = simulate_green(&cauchy(), &interval(), &pairs, 0.05, &cfg).unwrap();
        let r = green_report(&cauchy(), &interval(), &runs, GreenForm::General).unwrap();
        assert_eq!(r.points[0].shape, r.points[1].shape);
        let (a, b) = (runs.occupation[0].estimate, runs.occupation[1].estimate);
        assert!((a.value - b.value).abs() < 3.0 * a.stderr.hypot(b.stderr));
        assert!(runs.max_z().is_finite());
    }
}
