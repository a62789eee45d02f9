use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{AccountAddress, Digest, HashAlgorithm};
use crate::error_code::ErrorCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TxStatus {
    Accepted,
    Rejected,
}

impl TxStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TxStatus::Accepted => "ACCEPTED",
            TxStatus::Rejected => "REJECTED",
        }
    }
}

/// One recorded contract call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    /// Assigned by [`super::Chain::record_transaction`]; zero until then.
    pub seq: u64,
    pub caller: AccountAddress,
    pub contract: String,
    pub operation: String,
    pub payload: BTreeMap<String, String>,
    pub logical_time: u64,
    pub status: TxStatus,
    /// Present iff `status` is [`TxStatus::Rejected`].
    pub error_code: Option<ErrorCode>,
    pub gas_used: u64,
}

impl Transaction {
    pub fn new(
        caller: AccountAddress,
        contract: impl Into<String>,
        operation: impl Into<String>,
        payload: BTreeMap<String, String>,
        logical_time: u64,
        outcome: Result<(), ErrorCode>,
        gas_used: u64,
    ) -> Self {
        let (status, error_code) = match outcome {
            Ok(()) => (TxStatus::Accepted, None),
            Err(code) => (TxStatus::Rejected, Some(code)),
        };
        Transaction {
            seq: 0,
            caller,
            contract: contract.into(),
            operation: operation.into(),
            payload,
            logical_time,
            status,
            error_code,
            gas_used,
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.status == TxStatus::Accepted
    }

    pub(crate) fn to_value(&self) -> Value {
        // Keys are inserted in sorted order so the output is canonical even
        // if serde_json's `preserve_order` feature gets unified in.
        let mut obj = Map::new();
        obj.insert("caller".into(), self.caller.to_string().into());
        obj.insert("contract".into(), self.contract.clone().into());
        obj.insert(
            "error_code".into(),
            match self.error_code {
                Some(code) => code.code().into(),
                None => Value::Null,
            },
        );
        obj.insert("gas_used".into(), self.gas_used.into());
        obj.insert("logical_time".into(), self.logical_time.into());
        obj.insert("operation".into(), self.operation.clone().into());
        let payload: Map<String, Value> = self
            .payload
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        obj.insert("payload".into(), Value::Object(payload));
        obj.insert("seq".into(), self.seq.into());
        obj.insert("status".into(), self.status.as_str().into());
        Value::Object(obj)
    }
}

/// A sealed batch of transactions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub index: u64,
    pub prev_hash: Digest,
    pub timestamp: u64,
    pub transactions: Vec<Transaction>,
    /// 1-based validator index; 0 only for genesis.
    pub validator: u64,
    pub block_hash: Digest,
}

impl Block {
    pub(crate) fn genesis(algorithm: HashAlgorithm, timestamp: u64) -> Block {
        let mut block = Block {
            index: 0,
            prev_hash: Digest::ZERO,
            timestamp,
            transactions: Vec::new(),
            validator: 0,
            block_hash: Digest::ZERO,
        };
        block.block_hash = block.compute_hash(algorithm);
        block
    }

    /// Every field except `block_hash`, with keys in sorted order.
    pub(crate) fn header_value(&self) -> Map<String, Value> {
        let mut obj = Map::new();
        obj.insert("index".into(), self.index.into());
        obj.insert("prev_hash".into(), self.prev_hash.to_string().into());
        obj.insert("timestamp".into(), self.timestamp.into());
        obj.insert(
            "transactions".into(),
            Value::Array(self.transactions.iter().map(Transaction::to_value).collect()),
        );
        obj.insert("validator".into(), self.validator.into());
        obj
    }

    /// Canonical JSON of the block without its hash: sorted keys, no
    /// whitespace, integers in decimal, byte strings as lowercase `0x` hex.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&Value::Object(self.header_value())).expect("JSON values always serialize")
    }

    pub fn compute_hash(&self, algorithm: HashAlgorithm) -> Digest {
        algorithm.digest(&self.canonical_bytes())
    }

    pub fn gas_used(&self) -> u64 {
        self.transactions.iter().map(|tx| tx.gas_used).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_tx() -> Transaction {
        let mut payload = BTreeMap::new();
        payload.insert("email".to_string(), "alice@example.com".to_string());
        let mut tx = Transaction::new(
            AccountAddress::from_index(7),
            "MultifactorAuthentication",
            "login",
            payload,
            1500,
            Err(ErrorCode::InvalidPassword),
            0,
        );
        tx.seq = 3;
        tx
    }

    #[test]
    fn canonical_form_is_sorted_and_compact() {
        let block = Block {
            index: 1,
            prev_hash: Digest::ZERO,
            timestamp: 1500,
            transactions: alloc::vec![sample_tx()],
            validator: 2,
            block_hash: Digest::ZERO,
        };
        let text = String::from_utf8(block.canonical_bytes()).unwrap();
        let expected = concat!(
            "{\"index\":1,\"prev_hash\":\"0x0000000000000000000000000000000000000000000000000000000000000000\",",
            "\"timestamp\":1500,\"transactions\":[{\"caller\":\"0x0000000000000000000000000000000000000007\",",
            "\"contract\":\"MultifactorAuthentication\",\"error_code\":\"INVALID_PASSWORD\",\"gas_used\":0,",
            "\"logical_time\":1500,\"operation\":\"login\",\"payload\":{\"email\":\"alice@example.com\"},",
            "\"seq\":3,\"status\":\"REJECTED\"}],\"validator\":2}"
        );
        assert_eq!(text, expected);
    }

    #[test]
    fn identical_blocks_hash_identically() {
        let a = Block::genesis(HashAlgorithm::Sha256, 0);
        let b = Block::genesis(HashAlgorithm::Sha256, 0);
        assert_eq!(a.block_hash, b.block_hash);
        assert_ne!(a.block_hash, Block::genesis(HashAlgorithm::Keccak256, 0).block_hash);
    }

    #[test]
    fn rejected_status_carries_code() {
        let tx = sample_tx();
        assert_eq!(tx.status, TxStatus::Rejected);
        assert_eq!(tx.error_code, Some(ErrorCode::InvalidPassword));
        let ok = Transaction::new(AccountAddress::from_index(1), "c", "o", BTreeMap::new(), 0, Ok(()), 5);
        assert!(ok.is_accepted() && ok.error_code.is_none());
    }
}
