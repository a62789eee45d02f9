use alloc::vec::Vec;

use super::{Block, Digest, HashAlgorithm, LedgerError, Transaction};

/// Why [`Chain::verify`] rejected a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyFailure {
    /// Recomputed hash differs from the stored `block_hash`.
    HashMismatch,
    /// `prev_hash` does not equal the previous block's hash.
    BrokenLink,
    /// Stored index differs from the block's position.
    IndexOutOfPlace,
    /// Genesis is malformed (non-zero link, validator or transactions).
    BadGenesis,
    /// Non-genesis block names validator 0.
    BadValidator,
    /// Timestamps go backwards.
    TimeRegression,
    /// Transaction sequence numbers skip or repeat.
    SequenceGap,
}

/// Outcome of [`Chain::verify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyReport {
    pub ok: bool,
    pub first_bad_index: Option<u64>,
    pub failure: Option<VerifyFailure>,
}

impl VerifyReport {
    const OK: VerifyReport = VerifyReport { ok: true, first_bad_index: None, failure: None };

    fn bad(index: usize, failure: VerifyFailure) -> Self {
        VerifyReport { ok: false, first_bad_index: Some(index as u64), failure: Some(failure) }
    }
}

/// Committed blocks plus the not-yet-sealed transactions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    algorithm: HashAlgorithm,
    blocks: Vec<Block>,
    pending: Vec<Transaction>,
    next_seq: u64,
}

impl Chain {
    /// A chain holding only a genesis block at logical time 0.
    pub fn new(algorithm: HashAlgorithm) -> Self {
        Chain {
            algorithm,
            blocks: alloc::vec![Block::genesis(algorithm, 0)],
            pending: Vec::new(),
            next_seq: 1,
        }
    }

    /// Rebuilds a chain from stored blocks without checking them; call
    /// [`Chain::verify`] afterwards.
    pub fn from_blocks(algorithm: HashAlgorithm, blocks: Vec<Block>) -> Result<Self, LedgerError> {
        if blocks.is_empty() {
            return Err(LedgerError::Format { line: 0, reason: "chain has no genesis block".into() });
        }
        let last_seq = blocks
            .iter()
            .flat_map(|b| b.transactions.iter())
            .map(|tx| tx.seq)
            .max()
            .unwrap_or(0);
        Ok(Chain { algorithm, blocks, pending: Vec::new(), next_seq: last_seq + 1 })
    }

    pub fn algorithm(&self) -> HashAlgorithm {
        self.algorithm
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Mutable access to committed blocks. Exists for tamper experiments;
    /// anything changed here is caught by [`Chain::verify`].
    pub fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    pub fn pending(&self) -> &[Transaction] {
        &self.pending
    }

    pub fn head(&self) -> &Block {
        self.blocks.last().expect("chain always has genesis")
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Committed transactions in sequence order.
    pub fn transactions(&self) -> impl Iterator<Item = &Transaction> {
        self.blocks.iter().flat_map(|b| b.transactions.iter())
    }

    pub fn find_transaction(&self, seq: u64) -> Option<&Transaction> {
        self.transactions()
            .chain(self.pending.iter())
            .find(|tx| tx.seq == seq)
    }

    /// Appends `tx` to the pending list and returns its sequence number.
    /// Any `seq` already on `tx` is overwritten.
    pub fn record_transaction(&mut self, mut tx: Transaction) -> u64 {
        let seq = self.next_seq;
        tx.seq = seq;
        self.next_seq += 1;
        self.pending.push(tx);
        seq
    }

    /// Moves every pending transaction into a new block.
    pub fn seal_block(&mut self, validator: u64, time: u64) -> Result<&Block, LedgerError> {
        self.seal_within(validator, time, u64::MAX)
    }

    /// Seals the longest pending prefix whose gas fits in `gas_limit`; the
    /// remainder stays pending for the next block.
    pub fn seal_within(&mut self, validator: u64, time: u64, gas_limit: u64) -> Result<&Block, LedgerError> {
        if self.pending.is_empty() {
            return Err(LedgerError::EmptyPending);
        }
        if validator == 0 {
            return Err(LedgerError::InvalidValidator(validator));
        }
        let previous = self.head().timestamp;
        if time < previous {
            return Err(LedgerError::TimeRegression { time, previous });
        }
        let mut used = 0u64;
        let mut take = 0usize;
        for tx in &self.pending {
            match used.checked_add(tx.gas_used) {
                Some(total) if total <= gas_limit => {
                    used = total;
                    take += 1;
                }
                _ => break,
            }
        }
        if take == 0 {
            let tx = &self.pending[0];
            return Err(LedgerError::GasLimitExceeded { seq: tx.seq, gas: tx.gas_used, limit: gas_limit });
        }
        let transactions: Vec<Transaction> = self.pending.drain(..take).collect();
        let mut block = Block {
            index: self.blocks.len() as u64,
            prev_hash: self.head().block_hash,
            timestamp: time,
            transactions,
            validator,
            block_hash: Digest::ZERO,
        };
        block.block_hash = block.compute_hash(self.algorithm);
        self.blocks.push(block);
        Ok(self.head())
    }

    /// Walks the chain from genesis and reports the first inconsistent block.
    pub fn verify(&self) -> VerifyReport {
        let mut expected_seq = 1u64;
        let mut prev: Option<&Block> = None;
        for (i, block) in self.blocks.iter().enumerate() {
            if block.index != i as u64 {
                return VerifyReport::bad(i, VerifyFailure::IndexOutOfPlace);
            }
            if block.compute_hash(self.algorithm) != block.block_hash {
                return VerifyReport::bad(i, VerifyFailure::HashMismatch);
            }
            match prev {
                None => {
                    if block.prev_hash != Digest::ZERO || block.validator != 0 || !block.transactions.is_empty() {
                        return VerifyReport::bad(i, VerifyFailure::BadGenesis);
                    }
                }
                Some(p) => {
                    if block.prev_hash != p.block_hash {
                        return VerifyReport::bad(i, VerifyFailure::BrokenLink);
                    }
                    if block.validator == 0 {
                        return VerifyReport::bad(i, VerifyFailure::BadValidator);
                    }
                    if block.timestamp < p.timestamp {
                        return VerifyReport::bad(i, VerifyFailure::TimeRegression);
                    }
                }
            }
            for tx in &block.transactions {
                if tx.seq != expected_seq {
                    return VerifyReport::bad(i, VerifyFailure::SequenceGap);
                }
                expected_seq += 1;
            }
            prev = Some(block);
        }
        VerifyReport::OK
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::AccountAddress;
    use alloc::collections::BTreeMap;
    use alloc::string::ToString;

    fn tx(gas: u64) -> Transaction {
        let mut payload = BTreeMap::new();
        payload.insert("k".to_string(), "v".to_string());
        Transaction::new(AccountAddress::from_index(1), "C", "op", payload, 0, Ok(()), gas)
    }

    #[test]
    fn genesis_convention() {
        let chain = Chain::new(HashAlgorithm::Sha256);
        let g = chain.head();
        assert_eq!(g.index, 0);
        assert_eq!(g.prev_hash, Digest::ZERO);
        assert_eq!(g.validator, 0);
        assert!(chain.verify().ok);
        assert_eq!(g.block_hash, Chain::new(HashAlgorithm::Sha256).head().block_hash);
    }

    #[test]
    fn sequence_numbers_start_at_one_and_increase() {
        let mut chain = Chain::new(HashAlgorithm::Sha256);
        assert_eq!(chain.record_transaction(tx(0)), 1);
        assert_eq!(chain.record_transaction(tx(0)), 2);
    }

    #[test]
    fn seal_moves_all_pending() {
        let mut chain = Chain::new(HashAlgorithm::Sha256);
        for _ in 0..3 {
            chain.record_transaction(tx(1));
        }
        let block = chain.seal_block(1, 10).unwrap();
        assert_eq!(block.index, 1);
        assert_eq!(block.transactions.len(), 3);
        assert!(chain.pending().is_empty());
        assert!(chain.verify().ok);
    }

    #[test]
    fn seal_errors() {
        let mut chain = Chain::new(HashAlgorithm::Sha256);
        assert_eq!(chain.seal_block(1, 0).unwrap_err(), LedgerError::EmptyPending);
        chain.record_transaction(tx(1));
        assert_eq!(chain.seal_block(0, 0).unwrap_err(), LedgerError::InvalidValidator(0));
        chain.seal_block(1, 50).unwrap();
        chain.record_transaction(tx(1));
        assert!(matches!(chain.seal_block(1, 49), Err(LedgerError::TimeRegression { .. })));
    }

    #[test]
    fn gas_limit_defers_overflow() {
        let mut chain = Chain::new(HashAlgorithm::Sha256);
        for _ in 0..5 {
            chain.record_transaction(tx(10));
        }
        let block = chain.seal_within(1, 0, 25).unwrap();
        assert_eq!(block.transactions.len(), 2);
        assert_eq!(chain.pending().len(), 3);
        chain.seal_within(1, 0, 25).unwrap();
        chain.seal_within(1, 0, 25).unwrap();
        assert!(chain.pending().is_empty());
        assert!(chain.blocks().iter().all(|b| b.gas_used() <= 25));
        assert!(chain.verify().ok);

        chain.record_transaction(tx(30));
        assert!(matches!(chain.seal_within(1, 0, 25), Err(LedgerError::GasLimitExceeded { .. })));
    }

    #[test]
    fn tampered_payload_is_located() {
        let mut chain = Chain::new(HashAlgorithm::Sha256);
        for t in 0..4 {
            chain.record_transaction(tx(1));
            chain.seal_block(1, t).unwrap();
        }
        chain.blocks_mut()[2].transactions[0].payload.insert("k".into(), "w".into());
        let report = chain.verify();
        assert!(!report.ok);
        assert_eq!(report.first_bad_index, Some(2));
        assert_eq!(report.failure, Some(VerifyFailure::HashMismatch));
    }

    #[test]
    fn broken_link_is_reported() {
        let mut chain = Chain::new(HashAlgorithm::Sha256);
        for t in 0..3 {
            chain.record_transaction(tx(1));
            chain.seal_block(1, t).unwrap();
        }
        // Rewrite block 2's link and re-hash it so only the link is wrong.
        let alg = chain.algorithm();
        let block = &mut chain.blocks_mut()[2];
        block.prev_hash = Digest([9; 32]);
        block.block_hash = block.compute_hash(alg);
        let report = chain.verify();
        assert_eq!(report.first_bad_index, Some(2));
        assert_eq!(report.failure, Some(VerifyFailure::BrokenLink));
    }
}
