//! Append-only hash-chained block store.
//!
//! Every contract call, accepted or rejected, becomes a [`Transaction`].
//! Pending transactions are sealed into a [`Block`] whose hash covers a
//! canonical JSON rendering of every field, so any later edit to a committed
//! block shows up in [`Chain::verify`].

mod address;
mod block;
mod chain;
mod codec;
mod digest;

pub use address::{AccountAddress, ParseAddressError};
pub use block::{Block, Transaction, TxStatus};
pub use chain::{Chain, VerifyFailure, VerifyReport};
pub use codec::{decode_jsonl, encode_block_line, encode_jsonl, CHAIN_FILE_EXTENSION};
pub use digest::{Digest, HashAlgorithm, ParseDigestError};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("no pending transactions to seal")]
    EmptyPending,
    #[error("validator index must be at least 1, got {0}")]
    InvalidValidator(u64),
    #[error("block time {time} precedes the previous block time {previous}")]
    TimeRegression { time: u64, previous: u64 },
    #[error("transaction {seq} needs {gas} gas, above the block limit {limit}")]
    GasLimitExceeded { seq: u64, gas: u64, limit: u64 },
    #[error("malformed chain data at line {line}: {reason}")]
    Format { line: usize, reason: String },
}
