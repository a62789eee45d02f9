//! Discrete-event simulation of authentication traffic in zero-trust and
//! perimeter modes, plus the flood experiment and reference-table replay.

mod config;
mod flood;
mod metrics;
mod queue;
mod run;
mod table4;

pub use config::{
    Distribution, FloodParams, LatencyModel, SimConfig, SimMode, CALIBRATION_JSON, DEFAULT_NODE_COUNT,
    DEFAULT_NODE_STAKE, DEFAULT_REQUEST_COUNT,
};
pub use flood::{dos_flood, Availability, FloodReport};
pub use metrics::{compute_metrics, MetricsReport};
pub use queue::EventQueue;
pub use run::{node_address, node_device, node_email, run_simulation, simulate, SimRun, TraceEvent, TraceKind, SIM_ADMIN, SIM_ROLE};
pub use table4::{replay_table4, Discrepancy, ModeComparison, Table4Replay, Table4Row, TABLE4_CSV};

use alloc::string::String;

use crate::engine::EngineError;
use crate::error_code::ErrorCode;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("metrics need at least one sample")]
    EmptyInput,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("contract call failed: {0}")]
    Contract(#[from] ErrorCode),
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::Config(_) => "CONFIG_ERROR",
            SimError::EmptyInput => "EMPTY_INPUT",
            SimError::Engine(_) => "ENGINE_ERROR",
            SimError::Contract(e) => e.code(),
        }
    }
}
