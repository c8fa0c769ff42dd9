//! Layered run settings: manifest, then INI file, then command-line flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use levykern::geometry::Domain;
use levykern::{BernsteinFunction, ProcessSpec};

use crate::CliError;

/// Every key accepted in a config file, a manifest or on the command line.
pub const KEYS: &[(&str, &str)] = &[
    ("family", "Laplace exponent, e.g. stable:alpha=1.0"),
    ("process", "Laplace exponent of the subordinator driving the process"),
    ("perturb", "half-width of the jump bump removed from the density"),
    ("domain", "open set, e.g. intervals:(-1,1) or ball:r=1,d=2"),
    ("dim", "dimension when no domain is given"),
    ("shape", "global|factorized|c11|survival|largetime|green|green-special|lambert"),
    ("condition", "upper-tail or lower-tail for the special Green form"),
    ("eval", "evaluate φ at this λ"),
    ("capital", "evaluate Φ(r) = 1/φ(r⁻²) at this r"),
    ("capital-inv", "evaluate Φ⁻¹ at this t"),
    ("t", "time"),
    ("r", "radius"),
    ("x", "point, coordinates separated by commas"),
    ("y", "point, coordinates separated by commas"),
    ("lambda1", "principal eigenvalue used by the large-time form"),
    ("t-grid", "times: a,b,c or log:lo:hi:n or lin:lo:hi:n"),
    ("r-grid", "radii, same syntax as t-grid"),
    ("points", "start points separated by ';' (commas also separate points in d=1)"),
    ("pairs", "Green pairs x/y separated by ';'; defaults to all pairs of points"),
    ("cell-width", "side of the histogram cells around each point"),
    ("eps", "radius of the occupation ball for Green estimates"),
    ("n", "number of paths"),
    ("h", "time step"),
    ("horizon", "simulation horizon"),
    ("seed", "base seed (required for simulation)"),
    ("cutoff", "small-jump cutoff of compound Poisson samplers"),
    ("cap", "largest acceptable spread"),
    ("threshold", "relative stderr above which points are excluded"),
    ("size", "grid size per axis for the h_T comparison"),
    ("tolerance", "relative quadrature tolerance"),
    ("csv", "input CSV for report"),
    ("out", "CSV output path (stdout when absent)"),
    ("svg", "SVG output path"),
    ("manifest", "manifest output path"),
];

/// Keys that only name outputs and are left out of reproducibility comparisons.
pub const OUTPUT_KEYS: &[&str] = &["out", "svg", "manifest", "csv"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl Settings {
    pub fn from_map(values: BTreeMap<String, String>) -> Result<Self, CliError> {
        if let Some(k) = values.keys().find(|k| !known(k)) {
            return Err(CliError::Config(format!("unknown setting '{k}'")));
        }
        Ok(Self { values })
    }

    /// Reads `key = value` pairs from the unnamed section or a `[run]` section.
    pub fn from_ini(path: &Path) -> Result<Self, CliError> {
        let conf = ini::Ini::load_from_file(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (section, props) in conf.iter() {
            match section {
                None | Some("run") => {}
                Some(other) => return Err(CliError::Config(format!("{}: unknown section '[{other}]'", path.display()))),
            }
            for (k, v) in props.iter() {
                if !known(k) {
                    return Err(CliError::Config(format!("{}: unknown setting '{k}'", path.display())));
                }
                values.insert(k.to_string(), v.trim().to_string());
            }
        }
        Ok(Self { values })
    }

    /// Overlays `other`; its values win.
    pub fn merge(mut self, other: Settings) -> Self {
        self.values.extend(other.values);
        self
    }

    pub fn map(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| CliError::Config(format!("missing setting '{key}'")))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| CliError::Config(format!("bad value '{v}' for '{key}'"))))
            .transpose()
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.require(key)?;
        Ok(self.parse(key)?.unwrap())
    }

    pub fn family(&self, key: &str) -> Result<BernsteinFunction, CliError> {
        self.require(key)?.parse().map_err(CliError::config)
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        self.require("domain")?.parse().map_err(CliError::config)
    }

    pub fn process(&self, d: usize) -> Result<ProcessSpec, CliError> {
        let f = self.family("process")?;
        match self.parse::<f64>("perturb")? {
            Some(eps) => ProcessSpec::perturbed(d, f, eps),
            None => ProcessSpec::new(d, f),
        }
        .map_err(CliError::config)
    }

    pub fn grid(&self, key: &str) -> Result<Vec<f64>, CliError> {
        parse_grid(self.require(key)?).map_err(|m| CliError::Config(format!("'{key}': {m}")))
    }

    pub fn point(&self, key: &str, d: usize) -> Result<Vec<f64>, CliError> {
        let v = parse_coords(self.require(key)?).map_err(|m| CliError::Config(format!("'{key}': {m}")))?;
        check_dim(&v, d, key)?;
        Ok(v)
    }

    pub fn points(&self, d: usize) -> Result<Vec<Vec<f64>>, CliError> {
        let raw = self.require("points")?;
        let pts = parse_points(raw, d).map_err(|m| CliError::Config(format!("'points': {m}")))?;
        for p in &pts {
            check_dim(p, d, "points")?;
        }
        Ok(pts)
    }

    pub fn pairs(&self, d: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>, CliError> {
        let Some(raw) = self.get("pairs") else {
            let pts = self.points(d)?;
            let mut pairs = Vec::new();
            for x in &pts {
                for y in &pts {
                    if x != y {
                        pairs.push((x.clone(), y.clone()));
                    }
                }
            }
            return Ok(pairs);
        };
        let mut pairs = Vec::new();
        for item in raw.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (a, b) = item
                .split_once('/')
                .ok_or_else(|| CliError::Config(format!("'pairs': '{item}' must look like x/y")))?;
            let (x, y) = (
                parse_coords(a).map_err(|m| CliError::Config(format!("'pairs': {m}")))?,
                parse_coords(b).map_err(|m| CliError::Config(format!("'pairs': {m}")))?,
            );
            check_dim(&x, d, "pairs")?;
            check_dim(&y, d, "pairs")?;
            pairs.push((x, y));
        }
        Ok(pairs)
    }
}

fn check_dim(v: &[f64], d: usize, key: &str) -> Result<(), CliError> {
    if v.len() == d {
        Ok(())
    } else {
        Err(CliError::Config(format!("'{key}': point has {} coordinates, domain has dimension {d}", v.len())))
    }
}

fn number(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", s.trim()))
}

pub fn parse_coords(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(number).collect()
}

pub fn parse_points(s: &str, d: usize) -> Result<Vec<Vec<f64>>, String> {
    if d == 1 && !s.contains(';') {
        return s.split(',').map(|c| number(c).map(|v| vec![v])).collect();
    }
    s.split(';').map(str::trim).filter(|i| !i.is_empty()).map(parse_coords).collect()
}

/// `a,b,c`, `log:lo:hi:n` or `lin:lo:hi:n`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    let spaced = |kind: &str, rest: &str| -> Result<Vec<f64>, String> {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("'{s}' must look like {kind}:lo:hi:n"));
        };
        let (lo, hi) = (number(lo)?, number(hi)?);
        let n: usize = n.trim().parse().map_err(|_| format!("'{n}' is not a count"))?;
        if n < 2 || !(hi > lo) || (kind == "log" && !(lo > 0.0)) {
            return Err(format!("'{s}' needs n ≥ 2 and 0 < lo < hi"));
        }
        Ok((0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                if kind == "log" {
                    (lo.ln() + u * (hi / lo).ln()).exp()
                } else {
                    lo + u * (hi - lo)
                }
            })
            .collect())
    };
    if let Some(rest) = s.strip_prefix("log:") {
        spaced("log", rest)
    } else if let Some(rest) = s.strip_prefix("lin:") {
        spaced("lin", rest)
    } else {
        s.split(',').map(number).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.05, 0.1,0.5").unwrap(), vec![0.05, 0.1, 0.5]);
        let g = parse_grid("log:1e-3:1:4").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[1] - 0.01).abs() < 1e-15 && (g[3] - 1.0).abs() < 1e-15);
        assert_eq!(parse_grid("lin:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("log:0:1:3").is_err());
        assert!(parse_grid("1,x").is_err());
    }

    #[test]
    fn points_and_pairs() {
        assert_eq!(parse_points("-0.5,0,0.5", 1).unwrap(), vec![vec![-0.5], vec![0.0], vec![0.5]]);
        assert_eq!(parse_points("0,0; 0.5,0", 2).unwrap(), vec![vec![0.0, 0.0], vec![0.5, 0.0]]);
        let mut s = Settings::default();
        s.set("pairs", "0,0/0.5,0; 0.1,0.1/0,-0.5");
        assert_eq!(s.pairs(2).unwrap().len(), 2);
        s.set("pairs", "0/0.5");
        assert!(matches!(s.pairs(2), Err(CliError::Config(_))));
        let mut s = Settings::default();
        s.set("points", "0;0.5;-0.5");
        assert_eq!(s.pairs(1).unwrap().len(), 6);
    }

    #[test]
    fn later_layers_win() {
        let mut a = Settings::default();
        a.set("n", "10");
        a.set("h", "0.1");
        let mut b = Settings::default();
        b.set("n", "20");
        let m = a.merge(b);
        assert_eq!(m.get("n"), Some("20"));
        assert_eq!(m.get("h"), Some("0.1"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut m = BTreeMap::new();
        m.insert("bogus".to_string(), "1".to_string());
        let err = Settings::from_map(m).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
