//! Stake-weighted validator selection.
//!
//! Selection follows the cumulative-probability walk: with stakes
//! `S[1..N]`, `P[i] = S[i] / sum(S)` and `C[i] = P[1] + ... + P[i]`, a draw
//! `r` in `[0, 1]` picks the smallest `i` with `r <= C[i]`. `C[N]` is pinned
//! to exactly 1.0 so `r = 1.0` always lands on a validator, and validators
//! with zero stake are never picked even when `r` sits on their boundary.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ConsensusError {
    #[error("stake table is empty")]
    EmptyTable,
    #[error("total stake is zero")]
    ZeroTotalStake,
    #[error("random draw must lie in [0, 1]")]
    DrawOutOfRange,
    #[error("at least one draw is required")]
    NoDraws,
}

/// Validator stakes, indexed from 1 in the public API.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StakeFile", into = "StakeFile")]
pub struct StakeTable {
    stakes: Vec<u64>,
}

/// On-disk shape: `{"stakes": [ints]}`.
#[derive(Serialize, Deserialize)]
struct StakeFile {
    stakes: Vec<u64>,
}

impl TryFrom<StakeFile> for StakeTable {
    type Error = ConsensusError;

    fn try_from(file: StakeFile) -> Result<Self, Self::Error> {
        StakeTable::new(file.stakes)
    }
}

impl From<StakeTable> for StakeFile {
    fn from(table: StakeTable) -> Self {
        StakeFile { stakes: table.stakes }
    }
}

impl StakeTable {
    pub fn new(stakes: Vec<u64>) -> Result<Self, ConsensusError> {
        if stakes.is_empty() {
            return Err(ConsensusError::EmptyTable);
        }
        if stakes.iter().all(|&s| s == 0) {
            return Err(ConsensusError::ZeroTotalStake);
        }
        Ok(StakeTable { stakes })
    }

    /// `n` validators with the same stake.
    pub fn uniform(n: usize, stake: u64) -> Result<Self, ConsensusError> {
        StakeTable::new(alloc::vec![stake; n])
    }

    pub fn stakes(&self) -> &[u64] {
        &self.stakes
    }

    pub fn len(&self) -> usize {
        self.stakes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stakes.is_empty()
    }

    pub fn total(&self) -> u128 {
        self.stakes.iter().map(|&s| s as u128).sum()
    }

    /// `P[i] = S[i] / S_total`.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.stakes.iter().map(|&s| s as f64 / total).collect()
    }

    /// Running sum of [`StakeTable::probabilities`], last entry clamped to 1.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut c: Vec<f64> = self
            .probabilities()
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = c.last_mut() {
            *last = 1.0;
        }
        c
    }
}

/// A uniform draw in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RandomDraw(f64);

impl RandomDraw {
    pub fn new(r: f64) -> Result<Self, ConsensusError> {
        if (0.0..=1.0).contains(&r) {
            Ok(RandomDraw(r))
        } else {
            Err(ConsensusError::DrawOutOfRange)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Returns the 1-based index of the selected validator.
pub fn select_validator(stakes: &StakeTable, r: RandomDraw) -> usize {
    select_with_cumulative(stakes.stakes(), &stakes.cumulative(), r.0)
}

fn select_with_cumulative(stakes: &[u64], cumulative: &[f64], r: f64) -> usize {
    let mut fallback = 0;
    for (i, (&s, &c)) in stakes.iter().zip(cumulative).enumerate() {
        if s == 0 {
            continue;
        }
        fallback = i;
        if r <= c {
            return i + 1;
        }
    }
    // Unreachable for r <= 1 since C[N] == 1.0, but stay total anyway.
    fallback + 1
}

/// Draws `draws` validators and returns how often each was picked.
pub fn selection_frequencies(stakes: &StakeTable, draws: usize, seed: u64) -> Result<Vec<f64>, ConsensusError> {
    if draws == 0 {
        return Err(ConsensusError::NoDraws);
    }
    let cumulative = stakes.cumulative();
    let mut counts = alloc::vec![0usize; stakes.len()];
    let mut rng = rng::stream(seed, streams::FREQUENCIES);
    for _ in 0..draws {
        let r = rng::unit_f64(rng.next_u64());
        counts[select_with_cumulative(stakes.stakes(), &cumulative, r) - 1] += 1;
    }
    Ok(counts.into_iter().map(|c| c as f64 / draws as f64).collect())
}

/// The draw used for sealing tick `tick`: the tick-th 64-bit output of the
/// sealer stream, so ticks can be evaluated in any order.
pub fn sealer_draw(tick: u64, seed: u64) -> RandomDraw {
    let mut rng = rng::stream(seed, streams::SEALER);
    rng.advance(tick.wrapping_mul(2));
    let hi = rng.next_u32() as u64;
    let lo = rng.next_u32() as u64;
    RandomDraw(rng::unit_f64((hi << 32) | lo))
}

/// Validator that seals block `tick`.
pub fn pick_sealer(stakes: &StakeTable, tick: u64, seed: u64) -> usize {
    select_validator(stakes, sealer_draw(tick, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn draw(r: f64) -> RandomDraw {
        RandomDraw::new(r).unwrap()
    }

    #[test]
    fn single_validator_always_wins() {
        let t = StakeTable::new(vec![5]).unwrap();
        for r in [0.0, 0.3, 1.0] {
            assert_eq!(select_validator(&t, draw(r)), 1);
        }
    }

    #[test]
    fn boundary_is_inclusive() {
        let t = StakeTable::new(vec![1, 1]).unwrap();
        assert_eq!(t.cumulative(), vec![0.5, 1.0]);
        assert_eq!(select_validator(&t, draw(0.5)), 1);
        assert_eq!(select_validator(&t, draw(0.5000001)), 2);
    }

    #[test]
    fn hand_computed_cumulative() {
        // C = [0.1, 0.4, 1.0]
        let t = StakeTable::new(vec![10, 30, 60]).unwrap();
        assert_eq!(select_validator(&t, draw(0.35)), 2);
        assert_eq!(select_validator(&t, draw(0.05)), 1);
        assert_eq!(select_validator(&t, draw(0.41)), 3);
        assert_eq!(select_validator(&t, draw(1.0)), 3);
    }

    #[test]
    fn table_errors() {
        assert_eq!(StakeTable::new(vec![]), Err(ConsensusError::EmptyTable));
        assert_eq!(StakeTable::new(vec![0, 0]), Err(ConsensusError::ZeroTotalStake));
        assert_eq!(RandomDraw::new(1.5), Err(ConsensusError::DrawOutOfRange));
        assert_eq!(RandomDraw::new(-0.1), Err(ConsensusError::DrawOutOfRange));
        assert!(RandomDraw::new(f64::NAN).is_err());
    }

    #[test]
    fn zero_stake_validator_never_selected() {
        let t = StakeTable::new(vec![0, 5]).unwrap();
        assert_eq!(select_validator(&t, draw(0.0)), 2);
        let f = selection_frequencies(&t, 1000, 3).unwrap();
        assert_eq!(f, vec![0.0, 1.0]);
    }

    #[test]
    fn frequencies_single_validator() {
        let t = StakeTable::new(vec![1]).unwrap();
        assert_eq!(selection_frequencies(&t, 1000, 0).unwrap(), vec![1.0]);
        assert_eq!(selection_frequencies(&t, 0, 0), Err(ConsensusError::NoDraws));
    }

    #[test]
    fn frequencies_follow_stakes() {
        let t = StakeTable::new(vec![10, 30, 60]).unwrap();
        let f = selection_frequencies(&t, 100_000, 7).unwrap();
        for (got, want) in f.iter().zip([0.1, 0.3, 0.6]) {
            assert!((got - want).abs() <= 0.01, "{f:?}");
        }
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(f, selection_frequencies(&t, 100_000, 7).unwrap());
    }

    #[test]
    fn sealer_is_deterministic_and_fair() {
        let t = StakeTable::new(vec![50, 50]).unwrap();
        assert_eq!(pick_sealer(&t, 17, 9), pick_sealer(&t, 17, 9));
        let picks: Vec<usize> = (0..10_000).map(|tick| pick_sealer(&t, tick, 9)).collect();
        let again: Vec<usize> = (0..10_000).map(|tick| pick_sealer(&t, tick, 9)).collect();
        assert_eq!(picks, again);
        let ones = picks.iter().filter(|&&v| v == 1).count() as f64 / 10_000.0;
        assert!((ones - 0.5).abs() <= 0.03, "{ones}");
    }

    #[test]
    fn stake_file_shape() {
        let t: StakeTable = serde_json::from_str(r#"{"stakes":[1,2,3]}"#).unwrap();
        assert_eq!(t.stakes(), &[1, 2, 3]);
        assert!(serde_json::from_str::<StakeTable>(r#"{"stakes":[0]}"#).is_err());
        assert_eq!(serde_json::to_string(&t).unwrap(), r#"{"stakes":[1,2,3]}"#);
    }
}
