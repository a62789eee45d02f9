//! Settings resolution: command-line flag, then config file, then the
//! built-in defaults. The config file comes from `--config` or, failing
//! that, the `ZTCHAIN_CONFIG` environment variable.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use ztchain_core::engine::Mitigation;
use ztchain_core::sim::SimConfig;
use ztchain_core::{AccountAddress, EngineConfig, GasSchedule, HashAlgorithm, StakeTable};

pub const CONFIG_ENV: &str = "ZTCHAIN_CONFIG";

/// Deploys the contracts unless the config names another owner.
pub const DEFAULT_OWNER: AccountAddress = AccountAddress::from_index(0xad01);

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Read { .. } => "IO_ERROR",
            _ => "CONFIG_ERROR",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub hash: Option<HashAlgorithm>,
    pub jit_threshold_ms: Option<u64>,
    pub owner: Option<AccountAddress>,
    pub stakes: Option<Vec<u64>>,
    pub gas_schedule: Option<GasSchedule>,
    pub simulation: Option<SimConfig>,
    #[serde(default)]
    pub disable: Vec<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }
}

/// Values given on the command line. `None` defers to the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jit_threshold_ms: Option<u64>,
    pub disable: Vec<Mitigation>,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub engine: EngineConfig,
    pub owner: AccountAddress,
    pub sim: SimConfig,
    pub source: Option<PathBuf>,
}

pub fn config_path(flag: Option<&Path>, env: Option<String>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf).or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
}

pub fn resolve(path: Option<PathBuf>, overrides: &Overrides) -> Result<Settings, ConfigError> {
    let file = match &path {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut engine = EngineConfig::default();
    if let Some(h) = file.hash {
        engine.hash = h;
    }
    if let Some(ms) = overrides.jit_threshold_ms.or(file.jit_threshold_ms) {
        if ms == 0 {
            return Err(ConfigError::Invalid("jit_threshold_ms must be positive".into()));
        }
        engine.jit_threshold_ms = ms;
    }
    if let Some(s) = file.stakes {
        engine.stakes = StakeTable::new(s).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    }
    if let Some(g) = file.gas_schedule {
        engine.schedule = g;
    }
    let mut sim = file.simulation.unwrap_or_default();
    let seed = overrides.seed.or(file.seed);
    if let Some(seed) = seed {
        engine.seed = seed;
        sim.seed = seed;
    }
    for name in &file.disable {
        let m: Mitigation = name.parse().map_err(ConfigError::Invalid)?;
        engine.mitigations = engine.mitigations.without(m);
    }
    for &m in &overrides.disable {
        engine.mitigations = engine.mitigations.without(m);
    }
    Ok(Settings { engine, owner: file.owner.unwrap_or(DEFAULT_OWNER), sim, source: path })
}
