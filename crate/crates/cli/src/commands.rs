use std::io::Write as _;
use std::path::Path;

use levykern::bounds::{
    c11_shape, check_green_condition, global_shape, green_horizon, green_shape, green_shape_special,
    lambert_green_shape, large_time_shape, survival_shape, GreenCondition,
};
use levykern::geometry::{dist, Domain};
use levykern::quad::Tolerance;
use levykern::report::{emit_csv, emit_svg, to_csv};
use levykern::simulate::{estimate_exit_time, run_killed, PathConfig};
use levykern::verify::{
    green_report, heat_kernel_report, large_time_reports, simulate_green, simulate_grid, survival_report,
    verify_free_kernel, verify_h_t, GreenForm, RatioPoint, RatioReport, ShapeName, DEFAULT_EXCLUSION,
};
use levykern::ProcessSpec;

use crate::manifest::{self, Manifest};
use crate::settings::Settings;
use crate::CliError;

pub fn phi(s: &Settings) -> Result<(), CliError> {
    let f = s.family("family")?;
    let queries = [("eval", 0), ("capital", 1), ("capital-inv", 2)];
    let mut printed = false;
    for (key, which) in queries {
        if let Some(v) = s.parse::<f64>(key)? {
            let out = match which {
                0 => f.phi(v),
                1 => f.capital_phi(v),
                _ => f.capital_phi_inv(v),
            }
            .map_err(CliError::run)?;
            println!("{out}");
            printed = true;
        }
    }
    if printed {
        Ok(())
    } else {
        Err(CliError::Config("phi needs one of 'eval', 'capital' or 'capital-inv'".into()))
    }
}

pub fn kernel(s: &Settings) -> Result<(), CliError> {
    let p = s.process(s.parse_or("dim", 1)?)?;
    let v = p.free_kernel(s.required("t")?, s.required("r")?).map_err(CliError::run)?;
    println!("{v}");
    Ok(())
}

pub fn jump(s: &Settings) -> Result<(), CliError> {
    let p = s.process(s.parse_or("dim", 1)?)?;
    println!("{}", p.jump_density_jx(s.required("r")?).map_err(CliError::run)?);
    Ok(())
}

fn condition(s: &Settings) -> Result<Option<GreenCondition>, CliError> {
    match s.get("condition") {
        None => Ok(None),
        Some("upper-tail") => Ok(Some(GreenCondition::UpperTail)),
        Some("lower-tail") => Ok(Some(GreenCondition::LowerTail)),
        Some(other) => Err(CliError::Config(format!("unknown condition '{other}'"))),
    }
}

// The condition that holds on the horizon of `dom`, if the user did not name one.
fn pick_condition(s: &Settings, p: &ProcessSpec, dom: &Domain) -> Result<GreenCondition, CliError> {
    if let Some(c) = condition(s)? {
        return Ok(c);
    }
    for c in [GreenCondition::UpperTail, GreenCondition::LowerTail] {
        if check_green_condition(p, c, dom.diam()).map_err(CliError::run)?.pass {
            return Ok(c);
        }
    }
    Err(CliError::Run("neither integral condition holds for this process".into()))
}

fn shape_name(s: &Settings, default: ShapeName) -> Result<ShapeName, CliError> {
    match s.get("shape") {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| CliError::Config(format!("unknown shape '{v}'"))),
    }
}

pub fn shape(s: &Settings) -> Result<(), CliError> {
    let dom = s.domain()?;
    let d = dom.dim();
    let p = s.process(d)?;
    let name = shape_name(s, ShapeName::C11)?;
    let t = || s.required::<f64>("t");
    let x = s.point("x", d)?;
    let y = || s.point("y", d);
    let run = CliError::run;
    let value = match name {
        ShapeName::Global => global_shape(&p, t()?, dist(&x, &y()?)).map_err(run)?.value,
        ShapeName::C11 => c11_shape(&p, &dom, t()?, &x, &y()?).map_err(run)?.value,
        ShapeName::Survival => survival_shape(&p, &dom, t()?, &x).map_err(run)?,
        ShapeName::LargeTime => large_time_shape(&p, &dom, t()?, &x, &y()?, s.required("lambda1")?).map_err(run)?.value,
        ShapeName::Green => green_shape(&p, &dom, &x, &y()?).map_err(run)?.value,
        ShapeName::GreenSpecial => {
            let c = pick_condition(s, &p, &dom)?;
            green_shape_special(&p, &dom, &x, &y()?, c).map_err(run)?.value
        }
        ShapeName::Lambert => lambert_green_shape(&p, &dom, &x, &y()?).map_err(run)?.value,
        ShapeName::Factorized => {
            return Err(CliError::Config("the factorized shape needs simulated survival; use 'verify hk'".into()))
        }
    };
    println!("{value}");
    Ok(())
}

fn path_config(s: &Settings, default_horizon: f64) -> Result<PathConfig, CliError> {
    let seed: u64 = s.required("seed")?;
    let cfg = PathConfig::new(
        s.parse_or("h", 1e-3)?,
        s.parse_or("horizon", default_horizon)?,
        s.parse_or("n", 20_000)?,
        seed,
    )
    .map_err(CliError::config)?;
    match s.parse::<f64>("cutoff")? {
        Some(eps) => cfg.with_cutoff(eps).map_err(CliError::config),
        None => Ok(cfg),
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn write_output(s: &Settings, text: &str) -> Result<(), CliError> {
    match s.get("out") {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Run(format!("{path}: {e}"))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(CliError::run),
    }
}

fn write_manifest(s: &Settings, command: &str, kind: Option<&str>) -> Result<(), CliError> {
    let seed = s.parse::<u64>("seed")?;
    Manifest::new(command, kind, seed, s).write(&manifest::path_for(s))
}

pub fn simulate(s: &Settings, exit_time: bool) -> Result<(), CliError> {
    let dom = s.domain()?;
    let p = s.process(dom.dim())?;
    let x = s.point("x", dom.dim())?;
    let times = s.grid("t-grid")?;
    let mut horizon = max_of(&times);
    if exit_time {
        horizon = horizon.max(8.0 * p.bernstein().capital_phi(dom.diam() / 2.0).map_err(CliError::run)?);
    }
    let cfg = path_config(s, horizon)?;
    let run = run_killed(&p, &dom, &x, &times, None, &cfg).map_err(CliError::run)?;
    let mut csv = String::from("t,survival,stderr\n");
    for (i, t) in times.iter().enumerate() {
        let e = run.survival(i);
        csv.push_str(&format!("{t},{},{}\n", e.value, e.stderr));
    }
    write_manifest(s, "simulate", None)?;
    write_output(s, &csv)?;
    if exit_time {
        let e = estimate_exit_time(&p, &dom, &x, &cfg).map_err(CliError::run)?;
        eprintln!(
            "mean exit time {} ± {} ({} of paths still inside at the horizon)",
            e.estimate.value, e.estimate.stderr, e.truncated
        );
    }
    Ok(())
}

fn summary(report: &RatioReport, cap: Option<f64>) -> String {
    let cap_s = cap.map_or_else(|| "-".to_string(), |c| c.to_string());
    let verdict = match cap {
        Some(c) if !(report.is_bounded() && report.spread <= c) => "FAIL",
        _ => "ok",
    };
    format!(
        "{:<16} {:>7} {:>9} {:>12} {:>12} {:>10} {:>6} {:>6}\n{:<16} {:>7} {:>9} {:>12.4e} {:>12.4e} {:>10.4} {:>6} {:>6}\n",
        "shape", "points", "included", "min ratio", "max ratio", "spread", "cap", "result",
        report.shape, report.points.len(), report.included(), report.min_ratio, report.max_ratio, report.spread, cap_s, verdict
    )
}

fn finish(s: &Settings, mut report: RatioReport, default_cap: f64, extra: &str) -> Result<(), CliError> {
    if let Some(th) = s.parse::<f64>("threshold")? {
        report = report.rethreshold(th);
    }
    let cap = s.parse_or("cap", default_cap)?;
    match s.get("out") {
        Some(path) => emit_csv(&report, Path::new(path)).map_err(CliError::run)?,
        None => write_output(s, &to_csv(&report))?,
    }
    if let Some(path) = s.get("svg") {
        emit_svg(&report, Path::new(path)).map_err(CliError::run)?;
    }
    let text = summary(&report, Some(cap)) + extra;
    if s.get("out").is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    if report.is_bounded() && report.spread <= cap {
        Ok(())
    } else {
        Err(CliError::Failed(format!("spread {} of '{}' exceeds cap {cap}", report.spread, report.shape)))
    }
}

pub fn verify(kind: &str, s: &Settings) -> Result<(), CliError> {
    let run = CliError::run;
    let (report, cap, extra) = match kind {
        "hk" | "survival" => {
            let dom = s.domain()?;
            let p = s.process(dom.dim())?;
            let times = s.grid("t-grid")?;
            let points = s.points(dom.dim())?;
            let cfg = path_config(s, max_of(&times))?;
            let runs = simulate_grid(&p, &dom, &times, &points, s.parse_or("cell-width", 0.02)?, &cfg).map_err(run)?;
            let report = if kind == "survival" {
                survival_report(&p, &dom, &runs, &times)
            } else {
                heat_kernel_report(&p, &dom, &runs, &times, shape_name(s, ShapeName::C11)?)
            }
            .map_err(run)?;
            (report, 100.0, String::new())
        }
        "green" => {
            let dom = s.domain()?;
            let p = s.process(dom.dim())?;
            let pairs = s.pairs(dom.dim())?;
            let phi_half = p.bernstein().capital_phi(dom.diam() / 2.0).map_err(run)?;
            let cfg = path_config(s, 8.0 * phi_half)?;
            let form = match shape_name(s, ShapeName::Green)? {
                ShapeName::Green => GreenForm::General,
                ShapeName::GreenSpecial => GreenForm::Special(pick_condition(s, &p, &dom)?),
                ShapeName::Lambert => GreenForm::Lambert,
                other => return Err(CliError::Config(format!("'{other}' is not a Green function shape"))),
            };
            let runs = simulate_green(&p, &dom, &pairs, s.parse_or("eps", 0.02)?, &cfg).map_err(run)?;
            let report = green_report(&p, &dom, &runs, form).map_err(run)?;
            let extra = format!("occupation and Riemann-sum estimates differ by at most {:.3} stderr\n", runs.max_z());
            (report, 100.0, extra)
        }
        "largetime" => {
            let dom = s.domain()?;
            let p = s.process(dom.dim())?;
            let window = s.grid("t-grid")?;
            let points = s.points(dom.dim())?;
            let mut times = window.clone();
            if !times.iter().any(|&t| (t - 1.0).abs() < 1e-12) {
                times.push(1.0);
            }
            times.sort_by(f64::total_cmp);
            let cfg = path_config(s, max_of(&times))?;
            let runs = simulate_grid(&p, &dom, &times, &points, s.parse_or("cell-width", 0.1)?, &cfg).map_err(run)?;
            let (lambda1, extra) = match s.parse::<f64>("lambda1")? {
                Some(l) => (l, String::new()),
                None => {
                    // Fit the decay rate at the point furthest from the boundary.
                    let deepest = (0..points.len())
                        .max_by(|&a, &b| dom.delta(&points[a]).total_cmp(&dom.delta(&points[b])))
                        .unwrap();
                    let first = times.iter().position(|&t| t >= window[0]).unwrap();
                    let last = times.iter().rposition(|&t| t <= max_of(&window)).unwrap();
                    let e = runs.runs[deepest].lambda1(first..last + 1).map_err(run)?;
                    (e.value, format!("fitted lambda1 {} ± {}\n", e.value, e.stderr))
                }
            };
            let (_, report) = large_time_reports(&p, &dom, &runs, &window, lambda1).map_err(run)?;
            (report, 50.0, extra)
        }
        "ht" => {
            let p = s.process(1)?;
            let t_cap = match s.parse::<f64>("horizon")? {
                Some(t) => t,
                None => green_horizon(&p, s.domain()?.diam()).map_err(run)?.t,
            };
            let tol = Tolerance::new(0.0, s.parse_or("tolerance", 1e-10)?);
            let report = verify_h_t(&p, t_cap, s.parse_or("size", 24)?, tol).map_err(run)?;
            (report, 100.0, String::new())
        }
        "free" => {
            let p = s.process(s.parse_or("dim", 1)?)?;
            let report = verify_free_kernel(&p, &s.grid("t-grid")?, &s.grid("r-grid")?).map_err(run)?;
            (report, 100.0, String::new())
        }
        other => return Err(CliError::Config(format!("unknown verify kind '{other}'"))),
    };
    write_manifest(s, "verify", Some(kind))?;
    finish(s, report, cap, &extra)
}

/// Reads a CSV written by [`to_csv`] back into a report.
pub fn parse_report(text: &str, label: &str, threshold: f64) -> Result<RatioReport, CliError> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| CliError::Config(format!("{label}: empty CSV")))?.split(',').collect();
    let col = |name: &str| {
        header.iter().position(|h| *h == name).ok_or_else(|| CliError::Config(format!("{label}: no '{name}' column")))
    };
    let is_axis = |h: &str, a: char| h.starts_with(a) && h[1..].chars().all(|c| c.is_ascii_digit());
    let xs: Vec<usize> = (0..header.len()).filter(|&i| is_axis(header[i], 'x')).collect();
    let ys: Vec<usize> = (0..header.len()).filter(|&i| is_axis(header[i], 'y')).collect();
    let (ct, ce, cs, csh) = (col("t")?, col("empirical")?, col("stderr")?, col("shape")?);
    let mut points = Vec::new();
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(CliError::Config(format!("{label}: row {} has {} fields", k + 2, fields.len())));
        }
        let num = |i: usize| {
            fields[i].parse::<f64>().map_err(|_| CliError::Config(format!("{label}: '{}' is not a number", fields[i])))
        };
        let coords = |idx: &[usize]| -> Result<Vec<f64>, CliError> {
            idx.iter().filter(|&&i| !fields[i].is_empty()).map(|&i| num(i)).collect()
        };
        let t = if fields[ct].is_empty() { None } else { Some(num(ct)?) };
        points.push(RatioPoint::new(t, coords(&xs)?, coords(&ys)?, num(ce)?, num(cs)?, num(csh)?));
    }
    Ok(RatioReport::with_threshold(label, "report", points, threshold))
}

pub fn report(s: &Settings) -> Result<(), CliError> {
    let path = s.require("csv")?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Run(format!("{path}: {e}")))?;
    let report = parse_report(&text, path, s.parse_or("threshold", DEFAULT_EXCLUSION)?)?;
    if let Some(svg) = s.get("svg") {
        emit_svg(&report, Path::new(svg)).map_err(CliError::run)?;
    }
    let cap = s.parse::<f64>("cap")?;
    print!("{}", summary(&report, cap));
    match cap {
        Some(c) if !(report.is_bounded() && report.spread <= c) => {
            Err(CliError::Failed(format!("spread {} exceeds cap {c}", report.spread)))
        }
        _ => Ok(()),
    }
}
