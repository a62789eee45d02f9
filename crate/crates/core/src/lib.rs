//! Core of a zero-trust access-control framework built on a hash-chained
//! ledger.
//!
//! The ledger acts as policy storage and audit trail. Two contract state
//! machines sit on top of it: multi-factor authentication with role
//! assignment, and just-in-time execution windows. Blocks are sealed by a
//! stake-weighted validator draw. A seeded discrete-event simulator compares
//! the ledger-backed mode against a centralized perimeter baseline, and a
//! scripted STRIDE harness replays threats against both.
//!
//! The crate is `no_std` and needs only `alloc`. File handling, config
//! loading and the command line live in the `ztchain` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod consensus;
pub mod contracts;
pub mod engine;
pub mod error_code;
pub mod fingerprint;
pub mod gas;
pub mod ledger;
pub mod perimeter;
pub mod rng;
pub mod sim;
pub mod threats;

pub use consensus::{pick_sealer, select_validator, selection_frequencies, RandomDraw, StakeTable};
pub use engine::{EngineConfig, Mitigations, PolicyEngine, Receipt};
pub use error_code::ErrorCode;
pub use fingerprint::DeviceInfo;
pub use gas::{GasReport, GasSchedule};
pub use ledger::{AccountAddress, Block, Chain, Digest, HashAlgorithm, Transaction, TxStatus};
