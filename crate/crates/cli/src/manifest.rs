//! Run manifests: the full settings of a run plus the seed and versions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ArgMatches;
use serde::{Deserialize, Serialize};

use crate::settings::{Settings, OUTPUT_KEYS};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub settings: BTreeMap<String, String>,
    pub versions: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, kind: Option<&str>, seed: Option<u64>, settings: &Settings) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("levykern".to_string(), levykern::VERSION.to_string());
        versions.insert("levykern-cli".to_string(), env!("CARGO_PKG_VERSION").to_string());
        let settings = settings
            .map()
            .iter()
            .filter(|(k, _)| !OUTPUT_KEYS.contains(&k.as_str()) && k.as_str() != "seed")
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Self { command: command.to_string(), kind: kind.map(str::to_string), seed, settings, versions }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(CliError::run)?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::Run(format!("{}: {e}", path.display())))
    }
}

/// Settings recorded by `--from-manifest`, if given, and the recorded verify kind.
pub fn base(sub: &ArgMatches, command: &str) -> Result<(Settings, Option<String>), CliError> {
    let Some(path) = sub.get_one::<PathBuf>("from-manifest") else {
        return Ok((Settings::default(), None));
    };
    let m = Manifest::load(path)?;
    if m.command != command {
        return Err(CliError::Config(format!("{} records a '{}' run, not '{command}'", path.display(), m.command)));
    }
    let mut s = Settings::from_map(m.settings)?;
    if let Some(seed) = m.seed {
        s.set("seed", seed.to_string());
    }
    Ok((s, m.kind))
}

/// Where a run's manifest goes: `manifest`, else next to `out`, else the working directory.
pub fn path_for(s: &Settings) -> PathBuf {
    if let Some(p) = s.get("manifest") {
        return PathBuf::from(p);
    }
    match s.get("out") {
        Some(out) => PathBuf::from(out).with_extension("manifest.json"),
        None => PathBuf::from("levykern-manifest.json"),
    }
}
