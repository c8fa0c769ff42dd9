//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 61-point Kronrod rule (30-point Gauss embedded) is applied per panel and
//! the panel with the largest error estimate is bisected until the global
//! estimate meets the requested tolerance. Semi-infinite ranges are mapped to
//! `(0, 1]` first.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
// QUADPACK qk61 abscissae and weights.
const XGK: [f64; 31] = [
    0.9994844100504906375,
    0.9968934840746495402,
    0.9916309968704045948,
    0.9836681232797472099,
    0.9731163225011262683,
    0.9600218649683075122,
    0.9443744447485599794,
    0.9262000474292743258,
    0.9055733076999077985,
    0.8825605357920526815,
    0.8572052335460610989,
    0.8295657623827683974,
    0.7997278358218390830,
    0.7677774321048261949,
    0.7337900624532268047,
    0.6978504947933157969,
    0.6600610641266269613,
    0.6205261829892428611,
    0.5793452358263616917,
    0.5366241481420198992,
    0.4924804678617785749,
    0.4470337695380891767,
    0.4004012548303943925,
    0.3527047255308781134,
    0.3040732022736250773,
    0.2546369261678898464,
    0.2045251166823098914,
    0.1538699136085835469,
    0.1028069379667370301,
    0.0514718425553176958,
    0.0000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 15] = [
    0.0079681924961666056,
    0.0184664683110909591,
    0.0287847078833233693,
    0.0387991925696270495,
    0.0484026728305940529,
    0.0574931562176190664,
    0.0659742298821804951,
    0.0737559747377052062,
    0.0807558952294202153,
    0.0868997872010829798,
    0.0921225222377861287,
    0.0963687371746442596,
    0.0995934205867952670,
    0.1017623897484055045,
    0.1028526528935588403,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 31] = [
    0.0013890136986770076,
    0.0038904611270998840,
    0.0066307039159312921,
    0.0092732796595177634,
    0.0118230152534963417,
    0.0143697295070458048,
    0.0169208891890532726,
    0.0194141411939423811,
    0.0218280358216091922,
    0.0241911620780806013,
    0.0265099548823331016,
    0.0287540487650412928,
    0.0309072575623877624,
    0.0329814470574837260,
    0.0349793380280600241,
    0.0368823646518212292,
    0.0386789456247275929,
    0.0403745389515359591,
    0.0419698102151642461,
    0.0434525397013560693,
    0.0448148001331626631,
    0.0460592382710069881,
    0.0471855465692991539,
    0.0481858617570871291,
    0.0490554345550297788,
    0.0497956834270742063,
    0.0504059214027823468,
    0.0508817958987496064,
    0.0512215478492587721,
    0.0514261285374590259,
    0.0514947294294515675,
];

/// Requested accuracy for adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Upper bound on the number of panels before giving up.
    pub max_panels: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, max_panels: 4000 }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(0.0, 1e-10)
    }
}

/// Value and absolute error estimate of a definite integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
}

/// One application of the 61-point rule on `[a, b]`.
///
/// Returns `(kronrod value, error estimate)`; the error follows the QUADPACK
/// rescaling heuristic.
pub fn gk61<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = 0.0;
    let mut resk = WGK[30] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 30];
    let mut fv2 = [0.0; 30];
    for j in 0..30 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[30] * (fc - mean).abs();
    for j in 0..30 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

/// Nodes and weights of the 61-point Kronrod rule mapped to `[a, b]`.
pub fn kronrod_nodes(a: f64, b: f64) -> Vec<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = Vec::with_capacity(61);
    out.push((center, WGK[30] * half));
    for j in 0..30 {
        out.push((center - half * XGK[j], WGK[j] * half));
        out.push((center + half * XGK[j], WGK[j] * half));
    }
    out
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    integrate_partitioned(f, &[a, b], tol)
}

/// Adaptive integration starting from the panels delimited by `breaks`.
///
/// Kinks and peaks of the integrand should be listed in `breaks`; they are
/// never straddled by a panel.
pub fn integrate_partitioned<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Integral> {
    if breaks.len() < 2 {
        return Ok(Integral { value: 0.0, abs_err: 0.0 });
    }
    let mut heap = BinaryHeap::with_capacity(64);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (value, err) = gk61(&f, a, b);
        total += value;
        total_err += err;
        heap.push(Panel { a, b, value, err });
    }
    let mut stuck = 0.0;
    while total_err > tol.target(total) {
        if heap.len() >= tol.max_panels {
            return Err(Error::Quadrature { value: total, abs_err: total_err });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs());
        if (worst.b - worst.a).abs() <= 16.0 * f64::EPSILON * scale || mid == worst.a || mid == worst.b {
            // Panel cannot be refined further; its error is final.
            stuck += worst.err;
            if total_err - stuck <= tol.target(total) || heap.is_empty() {
                if stuck > tol.target(total) {
                    return Err(Error::Quadrature { value: total, abs_err: total_err });
                }
                break;
            }
            continue;
        }
        let (v1, e1) = gk61(&f, worst.a, mid);
        let (v2, e2) = gk61(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    if !total.is_finite() {
        return Err(Error::Quadrature { value: total, abs_err: f64::INFINITY });
    }
    // Recompute from the leaves to shed accumulated cancellation.
    let (value, abs_err) = heap
        .iter()
        .fold((0.0, stuck), |(v, e), p| (v + p.value, e + p.err));
    Ok(Integral { value, abs_err })
}

/// Integral of `f` over `[a, ∞)` via `x = a + (1 - u) / u`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<Integral> {
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = a + (1.0 - u) / u;
        let v = f(x) / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let breaks: Vec<f64> = (0..=8).map(|k| 0.5f64.powi(8 - k)).collect();
    let mut bk = vec![0.0];
    bk.extend(breaks);
    integrate_partitioned(g, &bk, tol)
}
