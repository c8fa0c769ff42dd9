use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

mod commands;
mod manifest;
mod settings;

use settings::{Settings, KEYS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Failed(String),
    #[error("error: {0}")]
    Run(String),
}

impl CliError {
    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn run(e: impl std::fmt::Display) -> Self {
        CliError::Run(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Failed(_) | CliError::Run(_) => 1,
        }
    }
}

// Run settings each subcommand accepts as `--key value`.
const PHI_KEYS: &[&str] = &["family", "eval", "capital", "capital-inv"];
const KERNEL_KEYS: &[&str] = &["process", "perturb", "dim", "t", "r"];
const SHAPE_KEYS: &[&str] = &["process", "perturb", "domain", "shape", "condition", "t", "x", "y", "lambda1"];
const SIMULATE_KEYS: &[&str] =
    &["process", "perturb", "domain", "x", "t-grid", "n", "h", "horizon", "seed", "cutoff", "out", "manifest"];
const VERIFY_KEYS: &[&str] = &[
    "process", "perturb", "domain", "dim", "shape", "condition", "t-grid", "r-grid", "points", "pairs", "cell-width",
    "eps", "n", "h", "horizon", "seed", "cutoff", "cap", "threshold", "lambda1", "size", "tolerance", "out", "svg",
    "manifest",
];
const REPORT_KEYS: &[&str] = &["csv", "svg", "threshold", "cap"];

pub const VERIFY_KINDS: &[&str] = &["hk", "survival", "green", "largetime", "ht", "free"];

fn with_keys(mut cmd: Command, keys: &[&'static str]) -> Command {
    for &key in keys {
        let help = KEYS.iter().find(|(k, _)| *k == key).map(|(_, h)| *h).unwrap_or("");
        cmd = cmd.arg(Arg::new(key).long(key).value_name("VALUE").help(help).allow_hyphen_values(true));
    }
    cmd
}

fn cli() -> Command {
    let from_manifest = Arg::new("from-manifest")
        .long("from-manifest")
        .value_name("FILE")
        .value_parser(clap::value_parser!(PathBuf))
        .help("replay the settings recorded in a manifest; other settings override them");
    Command::new("levykern")
        .about("Heat kernel, survival and Green function shapes for killed subordinate Brownian motions")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("INI file of settings; command-line flags win"),
        )
        .subcommand(with_keys(Command::new("phi").about("Evaluate φ, Φ or Φ⁻¹"), PHI_KEYS))
        .subcommand(
            with_keys(Command::new("kernel").about("Free-space transition density or jump density"), KERNEL_KEYS)
                .arg(Arg::new("jump").long("jump").action(ArgAction::SetTrue).help("print j(r) instead of p(t, r)")),
        )
        .subcommand(with_keys(Command::new("shape").about("Evaluate an analytic shape"), SHAPE_KEYS))
        .subcommand(
            with_keys(Command::new("simulate").about("Monte Carlo survival estimates from one point"), SIMULATE_KEYS)
                .arg(from_manifest.clone())
                .arg(Arg::new("exit-time").long("exit-time").action(ArgAction::SetTrue).help("also estimate E τ_D")),
        )
        .subcommand(
            with_keys(Command::new("verify").about("Compare simulated quantities with analytic shapes"), VERIFY_KEYS)
                .arg(
                    Arg::new("kind")
                        .value_parser(clap::builder::PossibleValuesParser::new(VERIFY_KINDS))
                        .required_unless_present("from-manifest")
                        .help("what to verify"),
                )
                .arg(from_manifest),
        )
        .subcommand(with_keys(Command::new("report").about("Summarise a ratio CSV and render it as SVG"), REPORT_KEYS))
}

fn flag_settings(m: &ArgMatches, keys: &[&str]) -> Result<Settings, CliError> {
    let mut values = BTreeMap::new();
    for &k in keys {
        if let Some(v) = m.get_one::<String>(k) {
            values.insert(k.to_string(), v.clone());
        }
    }
    Settings::from_map(values)
}

fn layered(global: &ArgMatches, m: &ArgMatches, keys: &[&str], base: Settings) -> Result<Settings, CliError> {
    let mut s = base;
    if let Some(path) = global.get_one::<PathBuf>("config") {
        s = s.merge(Settings::from_ini(path)?);
    }
    Ok(s.merge(flag_settings(m, keys)?))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LEVYKERN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("LEVYKERN_THREADS must be a positive integer, got '{raw}'")))?;
    let available = std::thread::available_parallelism().map_or(n, |a| a.get());
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.min(available))
        .build_global()
        .map_err(CliError::run)
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let matches = match cli().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    configure_threads()?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    match name {
        "phi" => commands::phi(&layered(&matches, sub, PHI_KEYS, Settings::default())?),
        "kernel" => {
            let s = layered(&matches, sub, KERNEL_KEYS, Settings::default())?;
            if sub.get_flag("jump") {
                commands::jump(&s)
            } else {
                commands::kernel(&s)
            }
        }
        "shape" => commands::shape(&layered(&matches, sub, SHAPE_KEYS, Settings::default())?),
        "simulate" => {
            let (base, _) = manifest::base(sub, "simulate")?;
            let s = layered(&matches, sub, SIMULATE_KEYS, base)?;
            commands::simulate(&s, sub.get_flag("exit-time"))
        }
        "verify" => {
            let (base, recorded) = manifest::base(sub, "verify")?;
            let kind = match (sub.get_one::<String>("kind"), recorded) {
                (Some(k), Some(r)) if *k != r => {
                    return Err(CliError::Config(format!("manifest records 'verify {r}', not 'verify {k}'")))
                }
                (Some(k), _) => k.clone(),
                (None, Some(r)) => r,
                (None, None) => return Err(CliError::Usage("verify needs a kind".into())),
            };
            if !VERIFY_KINDS.contains(&kind.as_str()) {
                return Err(CliError::Config(format!("unknown verify kind '{kind}'")));
            }
            commands::verify(&kind, &layered(&matches, sub, VERIFY_KEYS, base)?)
        }
        "report" => commands::report(&layered(&matches, sub, REPORT_KEYS, Settings::default())?),
        other => Err(CliError::Usage(format!("unknown subcommand '{other}'"))),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprint!("{msg}"),
                other => eprintln!("{other}"),
            }
            ExitCode::from(e.code())
        }
    }
}
