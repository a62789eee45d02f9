use alloc::string::String;
use alloc::format;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::consensus::StakeTable;

use super::SimError;

/// Bundled stage-delay calibration. The values are fitted to the reference
/// table, not measured on any network.
pub const CALIBRATION_JSON: &str = include_str!("../../resources/sim_calibration.json");

pub const DEFAULT_NODE_COUNT: u32 = 200;
pub const DEFAULT_REQUEST_COUNT: u64 = 1000;
pub const DEFAULT_NODE_STAKE: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SimMode {
    ZeroTrust,
    Perimeter,
}

impl SimMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimMode::ZeroTrust => "ZERO_TRUST",
            SimMode::Perimeter => "PERIMETER",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    Uniform { low_ms: f64, high_ms: f64 },
    Constant { ms: f64 },
}

fn to_us(ms: f64) -> u64 {
    (ms * 1000.0).round() as u64
}

impl Distribution {
    pub fn validate(&self, stage: &str) -> Result<(), SimError> {
        let ok = match *self {
            Distribution::Uniform { low_ms, high_ms } => {
                low_ms.is_finite() && high_ms.is_finite() && low_ms > 0.0 && high_ms >= low_ms
            }
            Distribution::Constant { ms } => ms.is_finite() && ms > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::Config(format!("{stage}: parameters must be positive and ordered")))
        }
    }

    pub fn mean_ms(&self) -> f64 {
        match *self {
            Distribution::Uniform { low_ms, high_ms } => (low_ms + high_ms) / 2.0,
            Distribution::Constant { ms } => ms,
        }
    }

    /// Draws a delay in whole microseconds.
    pub fn sample_us<R: RngExt + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            Distribution::Uniform { low_ms, high_ms } => rng.random_range(to_us(low_ms)..=to_us(high_ms)),
            Distribution::Constant { ms } => to_us(ms),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    pub network_hop: Distribution,
    pub contract_execution: Distribution,
    pub consensus_validation: Distribution,
    pub central_lookup: Distribution,
}

impl LatencyModel {
    pub fn validate(&self) -> Result<(), SimError> {
        self.network_hop.validate("network_hop")?;
        self.contract_execution.validate("contract_execution")?;
        self.consensus_validation.validate("consensus_validation")?;
        self.central_lookup.validate("central_lookup")
    }

    /// Mean time the serialized server spends on one request.
    pub fn mean_service_ms(&self, mode: SimMode) -> f64 {
        match mode {
            SimMode::ZeroTrust => self.contract_execution.mean_ms() + self.consensus_validation.mean_ms(),
            SimMode::Perimeter => self.central_lookup.mean_ms(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloodParams {
    pub base_rate_rps: f64,
    pub window_ms: f64,
    pub queue_capacity: u32,
}

#[derive(Deserialize)]
struct Calibration {
    clients: u32,
    latency: LatencyModel,
    flood: FloodParams,
}

fn calibration() -> Calibration {
    serde_json::from_str(CALIBRATION_JSON).expect("bundled calibration parses")
}

impl Default for LatencyModel {
    fn default() -> Self {
        calibration().latency
    }
}

impl Default for FloodParams {
    fn default() -> Self {
        calibration().flood
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub node_count: u32,
    pub request_count: u64,
    pub seed: u64,
    pub mode: SimMode,
    /// Requests kept in flight at once; each issues its next request as
    /// soon as the previous one returns.
    pub clients: u32,
    pub latency: LatencyModel,
    /// Validator stakes. `None` gives every node the same stake.
    pub stakes: Option<StakeTable>,
    pub flood: FloodParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        let cal = calibration();
        SimConfig {
            node_count: DEFAULT_NODE_COUNT,
            request_count: DEFAULT_REQUEST_COUNT,
            seed: 0,
            mode: SimMode::ZeroTrust,
            clients: cal.clients,
            latency: cal.latency,
            stakes: None,
            flood: cal.flood,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what: &str| Err(SimError::Config(String::from(what)));
        if self.node_count == 0 {
            return bad("node_count must be at least 1");
        }
        if self.request_count == 0 {
            return bad("request_count must be at least 1");
        }
        if self.clients == 0 {
            return bad("clients must be at least 1");
        }
        if let Some(stakes) = &self.stakes {
            if stakes.len() != self.node_count as usize {
                return bad("stakes must list one entry per node");
            }
        }
        let f = &self.flood;
        if !(f.base_rate_rps.is_finite() && f.base_rate_rps > 0.0 && f.window_ms.is_finite() && f.window_ms > 0.0) {
            return bad("flood rate and window must be positive");
        }
        self.latency.validate()
    }

    pub fn stake_table(&self) -> StakeTable {
        self.stakes.clone().unwrap_or_else(|| {
            StakeTable::uniform(self.node_count as usize, DEFAULT_NODE_STAKE).expect("node_count validated")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_means() {
        let m = LatencyModel::default();
        assert_eq!(m.mean_service_ms(SimMode::ZeroTrust), 32.5);
        assert_eq!(m.mean_service_ms(SimMode::Perimeter), 20.0);
        assert_eq!(SimConfig::default().clients, 2);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut c = SimConfig { request_count: 0, ..Default::default() };
        assert!(matches!(c.validate(), Err(SimError::Config(_))));
        c.request_count = 5;
        c.latency.network_hop = Distribution::Uniform { low_ms: 3.0, high_ms: 1.0 };
        assert!(c.validate().is_err());
        c.latency.network_hop = Distribution::Constant { ms: 0.0 };
        assert!(c.validate().is_err());
        c.latency.network_hop = Distribution::Constant { ms: 1.0 };
        assert!(c.validate().is_ok());
    }

    #[test]
    fn config_json_defaults_missing_fields() {
        let c: SimConfig = serde_json::from_str(r#"{"request_count": 50, "mode": "PERIMETER"}"#).unwrap();
        assert_eq!(c.node_count, 200);
        assert_eq!(c.mode, SimMode::Perimeter);
        let d: Distribution = serde_json::from_str(r#"{"kind":"constant","ms":4.5}"#).unwrap();
        assert_eq!(d, Distribution::Constant { ms: 4.5 });
    }
}
