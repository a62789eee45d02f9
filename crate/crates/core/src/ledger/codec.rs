//! JSON-lines chain files: one block per line, each line the block's
//! canonical form with an extra `block_hash` key.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde_json::{Map, Value};

use super::{AccountAddress, Block, Chain, Digest, HashAlgorithm, LedgerError, Transaction, TxStatus};
use crate::error_code::ErrorCode;

pub const CHAIN_FILE_EXTENSION: &str = ".chain.jsonl";

/// The stored line for one block, without the trailing newline.
pub fn encode_block_line(block: &Block) -> String {
    let mut obj = Map::new();
    obj.insert("block_hash".into(), block.block_hash.to_string().into());
    obj.extend(block.header_value());
    serde_json::to_string(&Value::Object(obj)).expect("JSON values always serialize")
}

/// Committed blocks as JSON lines. Pending transactions are not written.
pub fn encode_jsonl(chain: &Chain) -> String {
    let mut out = String::new();
    for block in chain.blocks() {
        out.push_str(&encode_block_line(block));
        out.push('\n');
    }
    out
}

/// Parses a chain file. Stored hashes are kept as-is so that
/// [`Chain::verify`] can compare them against recomputed ones.
///
/// A line must be exactly the canonical rendering of the block it decodes
/// to; anything else (reordered keys, spacing, uppercase hex, duplicate
/// keys) is a format error.
pub fn decode_jsonl(text: &str, algorithm: HashAlgorithm) -> Result<Chain, LedgerError> {
    if !text.is_empty() && !text.ends_with('\n') {
        return Err(format_err(text.lines().count(), "file does not end with a newline (truncated?)"));
    }
    let mut blocks = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let value: Value = serde_json::from_str(line).map_err(|e| format_err(line_no, &e.to_string()))?;
        let block = decode_block(&value).map_err(|reason| format_err(line_no, &reason))?;
        if encode_block_line(&block) != line {
            return Err(format_err(line_no, "line is not in canonical form"));
        }
        blocks.push(block);
    }
    Chain::from_blocks(algorithm, blocks)
}

fn format_err(line: usize, reason: &str) -> LedgerError {
    LedgerError::Format { line, reason: reason.into() }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, String> {
    obj.get(key).ok_or_else(|| format!("missing `{key}`"))
}

fn as_u64(obj: &Map<String, Value>, key: &str) -> Result<u64, String> {
    field(obj, key)?.as_u64().ok_or_else(|| format!("`{key}` must be a non-negative integer"))
}

fn as_str<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a str, String> {
    field(obj, key)?.as_str().ok_or_else(|| format!("`{key}` must be a string"))
}

fn as_digest(obj: &Map<String, Value>, key: &str) -> Result<Digest, String> {
    as_str(obj, key)?.parse().map_err(|_| format!("`{key}` is not a digest"))
}

fn decode_block(value: &Value) -> Result<Block, String> {
    let obj = value.as_object().ok_or("block must be a JSON object")?;
    let txs = field(obj, "transactions")?
        .as_array()
        .ok_or("`transactions` must be an array")?
        .iter()
        .map(decode_tx)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Block {
        index: as_u64(obj, "index")?,
        prev_hash: as_digest(obj, "prev_hash")?,
        timestamp: as_u64(obj, "timestamp")?,
        transactions: txs,
        validator: as_u64(obj, "validator")?,
        block_hash: as_digest(obj, "block_hash")?,
    })
}

fn decode_tx(value: &Value) -> Result<Transaction, String> {
    let obj = value.as_object().ok_or("transaction must be a JSON object")?;
    let caller: AccountAddress = as_str(obj, "caller")?.parse().map_err(|_| "`caller` is not an address")?;
    let status = match as_str(obj, "status")? {
        "ACCEPTED" => TxStatus::Accepted,
        "REJECTED" => TxStatus::Rejected,
        other => return Err(format!("unknown status `{other}`")),
    };
    let error_code = match field(obj, "error_code")? {
        Value::Null => None,
        Value::String(s) => Some(s.parse::<ErrorCode>().map_err(|_| format!("unknown error code `{s}`"))?),
        _ => return Err("`error_code` must be a string or null".into()),
    };
    if (status == TxStatus::Rejected) != error_code.is_some() {
        return Err("error_code must be present exactly when status is REJECTED".into());
    }
    let payload = field(obj, "payload")?
        .as_object()
        .ok_or("`payload` must be an object")?
        .iter()
        .map(|(k, v)| {
            v.as_str()
                .map(|s| (k.clone(), s.to_string()))
                .ok_or_else(|| format!("payload value `{k}` must be a string"))
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    Ok(Transaction {
        seq: as_u64(obj, "seq")?,
        caller,
        contract: as_str(obj, "contract")?.into(),
        operation: as_str(obj, "operation")?.into(),
        payload,
        logical_time: as_u64(obj, "logical_time")?,
        status,
        error_code,
        gas_used: as_u64(obj, "gas_used")?,
    })
}
