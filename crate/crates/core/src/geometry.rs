//! Bounded open sets with exact distance to the complement.

use std::fmt;
use std::str::FromStr;

use crate::bernstein::{parse_params, reject_unknown, take_param};
use crate::error::{domain, Error, Result};

/// The built-in open sets.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, r_in: f64, r_out: f64 },
    /// Disjoint open intervals in increasing order (d = 1).
    Intervals(Vec<(f64, f64)>),
}

/// `C^{1,1}` characteristics `(R2, Λ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C11 {
    pub r2: f64,
    pub lambda: f64,
}

/// κ-fat characteristics `(R1, κ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaFat {
    pub r1: f64,
    pub kappa: f64,
}

/// A bounded open subset of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    shape: Shape,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("ball needs d >= 1 and radius > 0, got d={}, r={radius}", center.len()));
        }
        Ok(Self { shape: Shape::Ball { center, radius } })
    }

    pub fn annulus(center: Vec<f64>, r_in: f64, r_out: f64) -> Result<Self> {
        if center.is_empty() || !(r_in > 0.0 && r_in < r_out && r_out.is_finite()) {
            return domain(format!("annulus needs 0 < r_in < r_out, got {r_in}, {r_out}"));
        }
        Ok(Self { shape: Shape::Annulus { center, r_in, r_out } })
    }

    pub fn intervals(mut parts: Vec<(f64, f64)>) -> Result<Self> {
        if parts.is_empty() {
            return domain("interval union needs at least one interval");
        }
        parts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &parts {
            if !(a < b && a.is_finite() && b.is_finite()) {
                return domain(format!("interval ({a}, {b}) is empty or unbounded"));
            }
        }
        for w in parts.windows(2) {
            if !(w[1].0 > w[0].1) {
                return domain(format!(
                    "intervals ({}, {}) and ({}, {}) need a positive gap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                ));
            }
        }
        Ok(Self { shape: Shape::Intervals(parts) })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Ball { center, .. } | Shape::Annulus { center, .. } => center.len(),
            Shape::Intervals(_) => 1,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball { center, radius } => dist(x, center) < *radius,
            Shape::Annulus { center, r_in, r_out } => {
                let rho = dist(x, center);
                rho > *r_in && rho < *r_out
            }
            Shape::Intervals(parts) => parts.iter().any(|&(a, b)| x[0] > a && x[0] < b),
        }
    }

    /// Euclidean distance from `x` to the complement; 0 outside.
    pub fn delta(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => (radius - dist(x, center)).max(0.0),
            Shape::Annulus { center, r_in, r_out } => {
                let rho = dist(x, center);
                (rho - r_in).min(r_out - rho).max(0.0)
            }
            Shape::Intervals(parts) => parts
                .iter()
                .find(|&&(a, b)| x[0] > a && x[0] < b)
                .map_or(0.0, |&(a, b)| (x[0] - a).min(b - x[0])),
        }
    }

    pub fn diam(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => 2.0 * radius,
            Shape::Annulus { r_out, .. } => 2.0 * r_out,
            Shape::Intervals(parts) => parts[parts.len() - 1].1 - parts[0].0,
        }
    }

    /// `C^{1,1}` characteristics; `Λ = 0` by convention for every shape.
    pub fn c11(&self) -> C11 {
        let r2 = match &self.shape {
            Shape::Ball { radius, .. } => *radius,
            Shape::Annulus { r_in, r_out, .. } => r_in.min(r_out - r_in),
            Shape::Intervals(parts) => {
                let len = parts.iter().map(|&(a, b)| b - a).fold(f64::INFINITY, f64::min);
                let gap = parts.windows(2).map(|w| w[1].0 - w[0].1).fold(f64::INFINITY, f64::min);
                len.min(gap)
            }
        };
        C11 { r2, lambda: 0.0 }
    }

    /// κ-fat characteristics matched by [`fat_witness`](Self::fat_witness).
    pub fn kappa_fat(&self) -> KappaFat {
        let r1 = match &self.shape {
            Shape::Ball { radius, .. } => *radius,
            Shape::Annulus { r_in, r_out, .. } => r_out - r_in,
            Shape::Intervals(parts) => parts.iter().map(|&(a, b)| b - a).fold(f64::INFINITY, f64::min),
        };
        KappaFat { r1, kappa: 0.5 }
    }

    /// A centre `A` with `B(A, κr) ⊂ D ∩ B(x, r)`, for `x` in the closure and `r ≤ R1`.
    pub fn fat_witness(&self, x: &[f64], r: f64) -> Option<Vec<f64>> {
        if !(r > 0.0 && r <= self.kappa_fat().r1) {
            return None;
        }
        let half = 0.5 * r;
        match &self.shape {
            Shape::Ball { center, radius } => {
                let y: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let rho = norm(&y);
                if rho > *radius * (1.0 + 1e-12) {
                    return None;
                }
                if rho < half {
                    return Some(center.clone());
                }
                let s = 1.0 - half / rho;
                Some(center.iter().zip(&y).map(|(c, v)| c + s * v).collect())
            }
            Shape::Annulus { center, r_in, r_out } => {
                let y: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let rho = norm(&y);
                if rho < r_in * (1.0 - 1e-12) || rho > r_out * (1.0 + 1e-12) {
                    return None;
                }
                let target = rho.clamp(r_in + half, r_out - half);
                Some(center.iter().zip(&y).map(|(c, v)| c + v * target / rho).collect())
            }
            Shape::Intervals(parts) => {
                let x0 = x[0];
                let &(a, b) = parts.iter().find(|&&(a, b)| x0 >= a && x0 <= b)?;
                Some(vec![x0.clamp(a + half, b - half)])
            }
        }
    }

    /// The image of the set under `x ↦ k x`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return domain(format!("scale factor must be positive, got {k}"));
        }
        match &self.shape {
            Shape::Ball { center, radius } => Self::ball(center.iter().map(|c| k * c).collect(), k * radius),
            Shape::Annulus { center, r_in, r_out } => {
                Self::annulus(center.iter().map(|c| k * c).collect(), k * r_in, k * r_out)
            }
            Shape::Intervals(parts) => Self::intervals(parts.iter().map(|&(a, b)| (k * a, k * b)).collect()),
        }
    }

    /// True when `x ∈ D ⇔ -x ∈ D`.
    pub fn is_centrally_symmetric(&self) -> bool {
        match &self.shape {
            Shape::Ball { center, .. } | Shape::Annulus { center, .. } => center.iter().all(|&c| c == 0.0),
            Shape::Intervals(parts) => {
                let n = parts.len();
                (0..n).all(|i| parts[i].0 == -parts[n - 1 - i].1 && parts[i].1 == -parts[n - 1 - i].0)
            }
        }
    }

    /// Bounding box `(lower, upper)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.shape {
            Shape::Ball { center, radius: r } | Shape::Annulus { center, r_out: r, .. } => (
                center.iter().map(|c| c - r).collect(),
                center.iter().map(|c| c + r).collect(),
            ),
            Shape::Intervals(parts) => (vec![parts[0].0], vec![parts[parts.len() - 1].1]),
        }
    }
}

fn fmt_center(center: &[f64]) -> Option<String> {
    if center.iter().all(|&c| c == 0.0) {
        None
    } else {
        Some(center.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(";"))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Ball { center, radius } => {
                write!(f, "ball:r={radius:?},d={}", center.len())?;
                if let Some(c) = fmt_center(center) {
                    write!(f, ",c={c}")?;
                }
                Ok(())
            }
            Shape::Annulus { center, r_in, r_out } => {
                write!(f, "annulus:rin={r_in:?},rout={r_out:?},d={}", center.len())?;
                if let Some(c) = fmt_center(center) {
                    write!(f, ",c={c}")?;
                }
                Ok(())
            }
            Shape::Intervals(parts) => {
                let s: Vec<String> = parts.iter().map(|(a, b)| format!("({a:?},{b:?})")).collect();
                write!(f, "intervals:{}", s.join("|"))
            }
        }
    }
}

// Pulls an optional `c=x;y;z` centre out of the parameter list.
fn split_center(rest: &str) -> Result<(String, Option<Vec<f64>>)> {
    let mut kept = Vec::new();
    let mut center = None;
    for item in rest.split(',') {
        match item.trim().strip_prefix("c=") {
            Some(c) => {
                let v = c
                    .split(';')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad centre coordinate '{x}'"))))
                    .collect::<Result<Vec<_>>>()?;
                center = Some(v);
            }
            None => kept.push(item),
        }
    }
    Ok((kept.join(","), center))
}

fn dimension(params: &[(&str, f64)], default: usize, ctx: &str) -> Result<usize> {
    match params.iter().find(|(k, _)| *k == "d") {
        None => Ok(default),
        Some(&(_, v)) if v >= 1.0 && v.fract() == 0.0 => Ok(v as usize),
        Some(&(_, v)) => Err(Error::Parse(format!("{ctx} dimension must be a positive integer, got {v}"))),
    }
}

fn centre_for(center: Option<Vec<f64>>, d: usize) -> Result<Vec<f64>> {
    match center {
        None => Ok(vec![0.0; d]),
        Some(c) if c.len() == d => Ok(c),
        Some(c) => Err(Error::Parse(format!("centre has {} coordinates but d={d}", c.len()))),
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        match name.trim() {
            "ball" => {
                let (rest, center) = split_center(rest)?;
                let spec = format!("ball:{rest}");
                let (_, params) = parse_params(&spec)?;
                reject_unknown(&params, &["r", "d"], "ball")?;
                let d = dimension(&params, 1, "ball")?;
                Self::ball(centre_for(center, d)?, take_param(&params, "r", "ball")?)
            }
            "annulus" => {
                let (rest, center) = split_center(rest)?;
                let spec = format!("annulus:{rest}");
                let (_, params) = parse_params(&spec)?;
                reject_unknown(&params, &["rin", "rout", "d"], "annulus")?;
                let d = dimension(&params, 2, "annulus")?;
                Self::annulus(
                    centre_for(center, d)?,
                    take_param(&params, "rin", "annulus")?,
                    take_param(&params, "rout", "annulus")?,
                )
            }
            "intervals" => {
                let mut parts = Vec::new();
                for item in rest.split('|').map(str::trim).filter(|i| !i.is_empty()) {
                    let inner = item
                        .strip_prefix('(')
                        .and_then(|i| i.strip_suffix(')'))
                        .ok_or_else(|| Error::Parse(format!("interval '{item}' must look like (a,b)")))?;
                    let (a, b) = inner
                        .split_once(',')
                        .ok_or_else(|| Error::Parse(format!("interval '{item}' must look like (a,b)")))?;
                    let num = |v: &str| {
                        v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("'{}' is not a number", v.trim())))
                    };
                    parts.push((num(a)?, num(b)?));
                }
                Self::intervals(parts)
            }
            other => Err(Error::Parse(format!("unknown domain '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_ball(d: usize) -> Domain {
        Domain::ball(vec![0.0; d], 1.0).unwrap()
    }

    #[test]
    fn distances() {
        assert_eq!(unit_ball(2).delta(&[0.0, 0.0]), 1.0);
        let iv: Domain = "intervals:(-1,1)".parse().unwrap();
        assert_eq!(iv.delta(&[0.5]), 0.5);
        let an = Domain::annulus(vec![0.0, 0.0], 1.0, 2.0).unwrap();
        assert!((an.delta(&[1.4, 0.0]) - 0.4).abs() < 1e-15);
        assert!(!an.contains(&[0.0, 0.0]));
        assert_eq!(an.delta(&[0.0, 0.0]), 0.0);
        assert_eq!(unit_ball(3).diam(), 2.0);
        let two: Domain = "intervals:(-1,0)|(0.5,1)".parse().unwrap();
        assert_eq!(two.diam(), 2.0);
        assert_eq!(two.delta(&[0.25]), 0.0);
        assert!((two.delta(&[0.6]) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn characteristics() {
        assert_eq!(unit_ball(2).c11(), C11 { r2: 1.0, lambda: 0.0 });
        let an = Domain::annulus(vec![0.0, 0.0], 1.0, 2.5).unwrap();
        assert_eq!(an.c11().r2, 1.0);
        let two: Domain = "intervals:(-1,0)|(0.5,1)".parse().unwrap();
        assert_eq!(two.c11().r2, 0.5);
        assert_eq!(two.kappa_fat(), KappaFat { r1: 0.5, kappa: 0.5 });
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(Domain::annulus(vec![0.0], 2.0, 1.0).is_err());
        assert!("intervals:(-1,1)|(0.5,2)".parse::<Domain>().is_err());
        assert!("intervals:(0,1)|(1,2)".parse::<Domain>().is_err());
        assert!("cube:r=1".parse::<Domain>().unwrap_err().to_string().contains("cube"));
        assert!("ball:r=1,d=2,c=1;2;3".parse::<Domain>().is_err());
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["ball:r=1", "ball:r=0.5,d=2,c=1;-1", "annulus:rin=1,rout=2", "intervals:(-1,1)|(2,3)"] {
            let d: Domain = s.parse().unwrap();
            let back: Domain = d.to_string().parse().unwrap();
            assert_eq!(back, d, "{s}");
        }
        let d: Domain = "ball:r=1,d=2".parse().unwrap();
        assert_eq!(d.dim(), 2);
    }

    #[test]
    fn symmetry_and_scaling() {
        let iv: Domain = "intervals:(-3,-2)|(-1,1)|(2,3)".parse().unwrap();
        assert!(iv.is_centrally_symmetric());
        let iv2: Domain = "intervals:(-1,1)|(2,3)".parse().unwrap();
        assert!(!iv2.is_centrally_symmetric());
        let s = iv2.scaled(2.0).unwrap();
        assert_eq!(s.delta(&[5.0]), 2.0 * iv2.delta(&[2.5]));
    }

    fn point_in_closure(d: usize, seed: &[f64]) -> Vec<f64> {
        let n = norm(&seed[..d]).max(1e-9);
        let rad = seed[d].abs().min(1.0);
        seed[..d].iter().map(|v| v / n * rad).collect()
    }

    fn check_witness(dom: &Domain, x: &[f64], r: f64) -> bool {
        let Some(a) = dom.fat_witness(x, r) else { return false };
        let rad = dom.kappa_fat().kappa * r;
        // The witness ball lies in B(x, r) and in D: check its centre distances.
        dist(&a, x) + rad <= r * (1.0 + 1e-12) && dom.delta(&a) >= rad * (1.0 - 1e-12)
    }

    proptest! {
        #[test]
        fn delta_bounded_by_half_diameter(v in proptest::collection::vec(-1.5f64..1.5, 3)) {
            for dom in [unit_ball(3), Domain::annulus(vec![0.0; 3], 0.5, 1.2).unwrap()] {
                prop_assert!(dom.delta(&v) <= dom.diam() / 2.0);
                prop_assert_eq!(dom.delta(&v) > 0.0, dom.contains(&v));
            }
        }

        #[test]
        fn delta_is_one_lipschitz(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let dom: Domain = "intervals:(-1,0)|(0.5,1.5)".parse().unwrap();
            prop_assert!((dom.delta(&[a]) - dom.delta(&[b])).abs() <= (a - b).abs() + 1e-15);
        }

        #[test]
        fn ball_is_half_fat(v in proptest::collection::vec(-1.0f64..1.0, 4), r in 1e-6f64..1.0) {
            let x = point_in_closure(3, &v);
            prop_assert!(check_witness(&unit_ball(3), &x, r));
        }

        #[test]
        fn annulus_and_intervals_are_half_fat(v in proptest::collection::vec(-1.0f64..1.0, 3), r in 1e-6f64..1.0) {
            let an = Domain::annulus(vec![0.0, 0.0], 1.0, 2.0).unwrap();
            let n = norm(&v[..2]).max(1e-9);
            let rho = 1.0 + (v[2] + 1.0) / 2.0;
            let x = [v[0] / n * rho, v[1] / n * rho];
            prop_assert!(check_witness(&an, &x, r));
            let iv: Domain = "intervals:(-1,0)|(0.5,1.5)".parse().unwrap();
            let x0 = if v[0] < 0.0 { -(v[1].abs()) } else { 0.5 + v[1].abs() };
            prop_assert!(check_witness(&iv, &[x0], r * 0.999));
        }
    }
}
