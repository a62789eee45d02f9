//! Off-chain state machines mirroring the two access-control contracts.
//!
//! Every entry point takes the caller address explicitly, in place of
//! `msg.sender`, and returns either a value or the [`ErrorCode`] the
//! contract would revert with. Recording calls on the ledger is the job of
//! [`crate::engine::PolicyEngine`].
//!
//! [`ErrorCode`]: crate::error_code::ErrorCode

pub mod jit;
pub mod mfa;

pub use jit::{JitContract, SimulatedTarget, TargetContract, Termination, DEFAULT_THRESHOLD_MS};
pub use mfa::{MfaContract, MfaPolicy, RedactedUser, UserRecord, NO_DESCRIPTION, NO_ROLE, REDACTED};

pub const MFA_CONTRACT: &str = "MultifactorAuthentication";
pub const JIT_CONTRACT: &str = "JustInTimeAccess";
