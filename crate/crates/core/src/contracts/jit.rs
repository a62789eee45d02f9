use alloc::collections::BTreeMap;
use core::num::NonZeroU64;

use crate::error_code::ErrorCode;
use crate::ledger::AccountAddress;

/// Five minutes.
pub const DEFAULT_THRESHOLD_MS: u64 = 300_000;

/// A contract whose execution can be halted from outside.
pub trait TargetContract {
    /// Halts execution; `false` means the halt failed.
    fn terminate(&mut self) -> bool;
}

/// In-memory stand-in for a guarded contract such as an audit-report job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulatedTarget {
    pub address: AccountAddress,
    pub running: bool,
    /// Makes [`TargetContract::terminate`] report failure.
    pub fail_on_terminate: bool,
}

impl SimulatedTarget {
    pub fn new(address: AccountAddress) -> Self {
        SimulatedTarget { address, running: true, fail_on_terminate: false }
    }
}

impl TargetContract for SimulatedTarget {
    fn terminate(&mut self) -> bool {
        if self.fail_on_terminate {
            return false;
        }
        self.running = false;
        true
    }
}

/// Result of [`JitContract::terminate_execution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Still inside the window; nothing was done.
    WithinWindow,
    /// The target was told to halt and confirmed.
    Halted,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::WithinWindow => "within_window",
            Termination::Halted => "halted",
        }
    }
}

/// Per-target execution deadlines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JitContract {
    threshold_ms: NonZeroU64,
    deadlines: BTreeMap<AccountAddress, u64>,
    enforce_window: bool,
}

impl JitContract {
    pub fn new(threshold_ms: NonZeroU64) -> Self {
        JitContract { threshold_ms, deadlines: BTreeMap::new(), enforce_window: true }
    }

    /// With `enforce` off the window never expires. Fault injection only.
    pub fn with_enforcement(mut self, enforce: bool) -> Self {
        self.enforce_window = enforce;
        self
    }

    pub fn threshold_ms(&self) -> u64 {
        self.threshold_ms.get()
    }

    pub fn deadline(&self, target: AccountAddress) -> Option<u64> {
        self.deadlines.get(&target).copied()
    }

    /// Opens (or reopens) the window for `target`; returns the deadline.
    pub fn start_execution(&mut self, target: AccountAddress, now: u64) -> Result<u64, ErrorCode> {
        if target.is_null() {
            return Err(ErrorCode::InvalidContractAddress);
        }
        let deadline = now.saturating_add(self.threshold_ms.get());
        self.deadlines.insert(target, deadline);
        Ok(deadline)
    }

    /// `true` strictly after the deadline. Null and never-started targets
    /// are not overtime.
    pub fn is_overtime(&self, target: AccountAddress, now: u64) -> bool {
        if target.is_null() || !self.enforce_window {
            return false;
        }
        match self.deadlines.get(&target) {
            Some(&deadline) => now > deadline,
            None => false,
        }
    }

    /// Halts `hook` if its window has passed.
    pub fn terminate_execution(
        &self,
        target: AccountAddress,
        now: u64,
        hook: &mut dyn TargetContract,
    ) -> Result<Termination, ErrorCode> {
        if target.is_null() {
            return Err(ErrorCode::InvalidContractAddress);
        }
        if !self.is_overtime(target, now) {
            return Ok(Termination::WithinWindow);
        }
        if !hook.terminate() {
            return Err(ErrorCode::TerminateFailed);
        }
        Ok(Termination::Halted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TARGET: AccountAddress = AccountAddress::from_index(0xa0d1);

    fn jit() -> JitContract {
        JitContract::new(NonZeroU64::new(DEFAULT_THRESHOLD_MS).unwrap())
    }

    #[test]
    fn start_sets_deadline() {
        let mut c = jit();
        assert_eq!(c.start_execution(TARGET, 1000), Ok(301_000));
        assert_eq!(c.deadline(TARGET), Some(301_000));
        assert_eq!(c.start_execution(AccountAddress::NULL, 1000), Err(ErrorCode::InvalidContractAddress));
    }

    #[test]
    fn restart_replaces_window() {
        let mut c = jit();
        c.start_execution(TARGET, 1000).unwrap();
        c.start_execution(TARGET, 5000).unwrap();
        assert_eq!(c.deadline(TARGET), Some(305_000));
    }

    #[test]
    fn overtime_boundary_is_strict() {
        let mut c = jit();
        let deadline = c.start_execution(TARGET, 1000).unwrap();
        assert!(!c.is_overtime(TARGET, 2000));
        assert!(!c.is_overtime(TARGET, deadline));
        assert!(c.is_overtime(TARGET, deadline + 1));
        assert!(!c.is_overtime(AccountAddress::NULL, u64::MAX));
        assert!(!c.is_overtime(AccountAddress::from_index(5), u64::MAX));
    }

    #[test]
    fn terminate_paths() {
        let mut c = jit();
        let mut target = SimulatedTarget::new(TARGET);
        let deadline = c.start_execution(TARGET, 0).unwrap();

        assert_eq!(c.terminate_execution(TARGET, deadline, &mut target), Ok(Termination::WithinWindow));
        assert!(target.running);

        assert_eq!(c.terminate_execution(TARGET, deadline + 1, &mut target), Ok(Termination::Halted));
        assert!(!target.running);
        // Halting an already halted target is a clean success.
        assert_eq!(c.terminate_execution(TARGET, deadline + 2, &mut target), Ok(Termination::Halted));
        assert!(!target.running);

        let mut stuck = SimulatedTarget { fail_on_terminate: true, ..SimulatedTarget::new(TARGET) };
        assert_eq!(c.terminate_execution(TARGET, deadline + 1, &mut stuck), Err(ErrorCode::TerminateFailed));
        assert_eq!(
            c.terminate_execution(AccountAddress::NULL, 0, &mut stuck),
            Err(ErrorCode::InvalidContractAddress)
        );
    }

    #[test]
    fn disabled_window_never_expires() {
        let mut c = jit().with_enforcement(false);
        c.start_execution(TARGET, 0).unwrap();
        assert!(!c.is_overtime(TARGET, u64::MAX));
    }

    proptest! {
        #[test]
        fn window_is_exact(start in 0u64..1_000_000_000, threshold in 1u64..10_000_000, probe in 0u64..20_000_000) {
            let mut c = JitContract::new(NonZeroU64::new(threshold).unwrap());
            c.start_execution(TARGET, start).unwrap();
            let now = start + probe;
            prop_assert_eq!(c.is_overtime(TARGET, now), now > start + threshold);
        }
    }
}
