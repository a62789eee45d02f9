//! The ledger-backed policy engine.
//!
//! [`PolicyEngine`] is the decision and enforcement point: it owns the
//! contract state machines, charges gas, records every call on the chain
//! (rejections included) and seals blocks with a stake-weighted validator.
//! State can always be rebuilt from the chain alone with
//! [`PolicyEngine::replay`]; rejected and read-only calls are skipped there.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;
use core::num::NonZeroU64;

use crate::consensus::{pick_sealer, StakeTable};
use crate::contracts::{
    JitContract, MfaContract, MfaPolicy, SimulatedTarget, Termination, UserRecord, DEFAULT_THRESHOLD_MS, JIT_CONTRACT,
    MFA_CONTRACT, REDACTED,
};
use crate::error_code::ErrorCode;
use crate::gas::{GasError, GasSchedule, DEPLOY_OPERATION};
use crate::ledger::{AccountAddress, Chain, Digest, HashAlgorithm, LedgerError, Transaction, VerifyReport};

/// Operations the engine can record, as `(contract, operation)`.
pub const ENGINE_OPERATIONS: [(&str, &str); 9] = [
    (MFA_CONTRACT, DEPLOY_OPERATION),
    (MFA_CONTRACT, "register"),
    (MFA_CONTRACT, "assignRole"),
    (MFA_CONTRACT, "login"),
    (MFA_CONTRACT, "getAllUsers"),
    (JIT_CONTRACT, DEPLOY_OPERATION),
    (JIT_CONTRACT, "startExecution"),
    (JIT_CONTRACT, "isOvertime"),
    (JIT_CONTRACT, "terminateExecution"),
];

/// Payload keys whose values never leave the engine unmasked.
pub const SENSITIVE_KEYS: [&str; 1] = ["password_hash"];

/// A single safeguard that fault-injection runs may switch off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mitigation {
    DeviceCheck,
    RbacOwnerGuard,
    JitWindow,
    ChainVerification,
}

impl Mitigation {
    pub const ALL: [Mitigation; 4] =
        [Mitigation::DeviceCheck, Mitigation::RbacOwnerGuard, Mitigation::JitWindow, Mitigation::ChainVerification];

    pub fn name(self) -> &'static str {
        match self {
            Mitigation::DeviceCheck => "device-check",
            Mitigation::RbacOwnerGuard => "rbac-owner-guard",
            Mitigation::JitWindow => "jit-window",
            Mitigation::ChainVerification => "chain-verification",
        }
    }
}

impl core::str::FromStr for Mitigation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mitigation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mitigation `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mitigations {
    pub device_check: bool,
    pub rbac_owner_guard: bool,
    pub jit_window: bool,
    pub chain_verification: bool,
}

impl Default for Mitigations {
    fn default() -> Self {
        Mitigations { device_check: true, rbac_owner_guard: true, jit_window: true, chain_verification: true }
    }
}

impl Mitigations {
    pub fn without(mut self, m: Mitigation) -> Self {
        match m {
            Mitigation::DeviceCheck => self.device_check = false,
            Mitigation::RbacOwnerGuard => self.rbac_owner_guard = false,
            Mitigation::JitWindow => self.jit_window = false,
            Mitigation::ChainVerification => self.chain_verification = false,
        }
        self
    }

    pub fn disabled(&self) -> Vec<Mitigation> {
        Mitigation::ALL.into_iter().filter(|&m| self.without(m) == *self).collect()
    }

    fn mfa_policy(&self) -> MfaPolicy {
        MfaPolicy { check_device: self.device_check, owner_guard: self.rbac_owner_guard }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub hash: HashAlgorithm,
    pub jit_threshold_ms: u64,
    pub schedule: GasSchedule,
    pub stakes: StakeTable,
    pub seed: u64,
    pub mitigations: Mitigations,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            hash: HashAlgorithm::Sha256,
            jit_threshold_ms: DEFAULT_THRESHOLD_MS,
            schedule: GasSchedule::default(),
            stakes: StakeTable::uniform(4, 32).expect("non-empty positive table"),
            seed: 0,
            mitigations: Mitigations::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Gas(#[from] GasError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("invalid engine configuration: {0}")]
    Config(String),
    #[error("chain has no {0} deployment")]
    NotDeployed(&'static str),
    #[error("replay diverged at seq {seq}: {reason}")]
    ReplayDiverged { seq: u64, reason: String },
}

/// Sequence number of the recorded call plus its result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receipt<T> {
    pub seq: u64,
    pub result: Result<T, ErrorCode>,
}

/// Everything the contracts hold. Two engines agree iff their states are
/// equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractState {
    pub mfa: MfaContract,
    pub jit: JitContract,
    pub halted_targets: BTreeSet<AccountAddress>,
}

#[derive(Debug, Clone)]
pub struct PolicyEngine {
    config: EngineConfig,
    chain: Chain,
    mfa: MfaContract,
    jit: JitContract,
    targets: BTreeMap<AccountAddress, SimulatedTarget>,
    halted: BTreeSet<AccountAddress>,
    clock: u64,
}

fn payload<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn threshold(ms: u64) -> Result<NonZeroU64, EngineError> {
    NonZeroU64::new(ms).ok_or_else(|| EngineError::Config("jit threshold must be positive".into()))
}

fn check_schedule(schedule: &GasSchedule) -> Result<(), EngineError> {
    schedule.validate()?;
    for (contract, op) in ENGINE_OPERATIONS {
        schedule.charge(contract, op, 0)?;
    }
    Ok(())
}

impl PolicyEngine {
    /// Fresh chain with both contracts deployed by `owner` in block 1.
    pub fn deploy(config: EngineConfig, owner: AccountAddress, now: u64) -> Result<Self, EngineError> {
        check_schedule(&config.schedule)?;
        if owner.is_null() {
            return Err(EngineError::Config("owner cannot be the null address".into()));
        }
        let jit = JitContract::new(threshold(config.jit_threshold_ms)?).with_enforcement(config.mitigations.jit_window);
        let mut engine = PolicyEngine {
            mfa: MfaContract::with_policy(owner, config.hash, config.mitigations.mfa_policy()),
            jit,
            chain: Chain::new(config.hash),
            targets: BTreeMap::new(),
            halted: BTreeSet::new(),
            clock: now,
            config,
        };
        engine.record(owner, MFA_CONTRACT, DEPLOY_OPERATION, payload([("hash", engine.config.hash.name().into())]), Ok(()));
        engine.record(
            owner,
            JIT_CONTRACT,
            DEPLOY_OPERATION,
            payload([("threshold_ms", engine.config.jit_threshold_ms.to_string())]),
            Ok(()),
        );
        engine.seal(now)?;
        Ok(engine)
    }

    /// Resumes from a stored chain by replaying it.
    pub fn from_chain(chain: Chain, config: EngineConfig) -> Result<Self, EngineError> {
        check_schedule(&config.schedule)?;
        let state = Self::replay(&chain, &config)?;
        let targets = state
            .halted_targets
            .iter()
            .map(|&a| (a, SimulatedTarget { running: false, ..SimulatedTarget::new(a) }))
            .collect();
        Ok(PolicyEngine {
            clock: chain.head().timestamp,
            mfa: state.mfa,
            jit: state.jit,
            halted: state.halted_targets,
            targets,
            chain,
            config,
        })
    }

    /// Rebuilds contract state from the committed, accepted transactions.
    pub fn replay(chain: &Chain, config: &EngineConfig) -> Result<ContractState, EngineError> {
        let mut mfa: Option<MfaContract> = None;
        let mut jit: Option<JitContract> = None;
        let mut halted = BTreeSet::new();
        for tx in chain.transactions().filter(|tx| tx.is_accepted()) {
            let diverged = |reason: String| EngineError::ReplayDiverged { seq: tx.seq, reason };
            let get = |key: &str| tx.payload.get(key).map(String::as_str).ok_or_else(|| diverged(format!("missing `{key}`")));
            match (tx.contract.as_str(), tx.operation.as_str()) {
                (MFA_CONTRACT, DEPLOY_OPERATION) => {
                    mfa = Some(MfaContract::with_policy(tx.caller, chain.algorithm(), config.mitigations.mfa_policy()));
                }
                (JIT_CONTRACT, DEPLOY_OPERATION) => {
                    let ms = get("threshold_ms")?.parse::<u64>().map_err(|_| diverged("bad threshold_ms".into()))?;
                    jit = Some(JitContract::new(threshold(ms)?).with_enforcement(config.mitigations.jit_window));
                }
                (MFA_CONTRACT, "register") => {
                    let c = mfa.as_mut().ok_or(EngineError::NotDeployed(MFA_CONTRACT))?;
                    let hash: Digest = get("password_hash")?.parse().map_err(|_| diverged("bad password_hash".into()))?;
                    c.register_hashed(tx.caller, get("email")?, hash, get("device_checksum")?, get("mac_address")?)
                        .map_err(|e| diverged(e.code().into()))?;
                }
                (MFA_CONTRACT, "assignRole") => {
                    let c = mfa.as_mut().ok_or(EngineError::NotDeployed(MFA_CONTRACT))?;
                    c.assign_role(tx.caller, get("email")?, get("role")?, get("role_description")?)
                        .map_err(|e| diverged(e.code().into()))?;
                }
                (JIT_CONTRACT, "startExecution") => {
                    let c = jit.as_mut().ok_or(EngineError::NotDeployed(JIT_CONTRACT))?;
                    let target = get("target")?.parse().map_err(|_| diverged("bad target".into()))?;
                    c.start_execution(target, tx.logical_time).map_err(|e| diverged(e.code().into()))?;
                }
                (JIT_CONTRACT, "terminateExecution") if get("outcome")? == Termination::Halted.as_str() => {
                    halted.insert(get("target")?.parse().map_err(|_| diverged("bad target".into()))?);
                }
                _ => {}
            }
        }
        Ok(ContractState {
            mfa: mfa.ok_or(EngineError::NotDeployed(MFA_CONTRACT))?,
            jit: jit.ok_or(EngineError::NotDeployed(JIT_CONTRACT))?,
            halted_targets: halted,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn chain_mut(&mut self) -> &mut Chain {
        &mut self.chain
    }

    pub fn into_chain(self) -> Chain {
        self.chain
    }

    pub fn mfa(&self) -> &MfaContract {
        &self.mfa
    }

    pub fn jit(&self) -> &JitContract {
        &self.jit
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn state(&self) -> ContractState {
        ContractState { mfa: self.mfa.clone(), jit: self.jit.clone(), halted_targets: self.halted.clone() }
    }

    /// Makes a simulated contract available to `terminate_execution`.
    pub fn attach_target(&mut self, target: SimulatedTarget) {
        if !target.running {
            self.halted.insert(target.address);
        }
        self.targets.insert(target.address, target);
    }

    pub fn target(&self, address: AccountAddress) -> Option<&SimulatedTarget> {
        self.targets.get(&address)
    }

    fn tick(&mut self, now: u64) -> u64 {
        self.clock = self.clock.max(now);
        self.clock
    }

    fn record(
        &mut self,
        caller: AccountAddress,
        contract: &str,
        operation: &str,
        payload: BTreeMap<String, String>,
        outcome: Result<(), ErrorCode>,
    ) -> u64 {
        let gas = match outcome {
            Ok(()) => {
                let bytes = payload.iter().map(|(k, v)| (k.len() + v.len()) as u64).sum();
                self.config.schedule.charge(contract, operation, bytes).unwrap_or(0)
            }
            Err(_) => 0,
        };
        let tx = Transaction::new(caller, contract, operation, payload, self.clock, outcome, gas);
        self.chain.record_transaction(tx)
    }

    pub fn register(
        &mut self,
        caller: AccountAddress,
        email: &str,
        password: &str,
        device_checksum: &str,
        mac_address: &str,
        now: u64,
    ) -> Receipt<bool> {
        self.tick(now);
        let result = self.mfa.register(caller, email, password, device_checksum, mac_address);
        let stored_mac = match self.mfa.user(email) {
            Some(u) if result.is_ok() => u.mac_address.clone(),
            _ => mac_address.to_string(),
        };
        let mut fields = payload([
            ("email", email.to_string()),
            ("device_checksum", device_checksum.to_string()),
            ("mac_address", stored_mac),
        ]);
        if !password.is_empty() {
            fields.insert("password_hash".into(), self.mfa.password_digest(password).to_string());
        }
        let seq = self.record(caller, MFA_CONTRACT, "register", fields, result.map(|_| ()));
        Receipt { seq, result }
    }

    pub fn assign_role(
        &mut self,
        caller: AccountAddress,
        email: &str,
        role: &str,
        role_description: &str,
        now: u64,
    ) -> Receipt<bool> {
        self.tick(now);
        let result = self.mfa.assign_role(caller, email, role, role_description);
        let fields = payload([
            ("email", email.to_string()),
            ("role", role.to_string()),
            ("role_description", role_description.to_string()),
        ]);
        let seq = self.record(caller, MFA_CONTRACT, "assignRole", fields, result.map(|_| ()));
        Receipt { seq, result }
    }

    /// The submitted password is never written to the ledger.
    pub fn login(
        &mut self,
        caller: AccountAddress,
        email: &str,
        password: &str,
        device_checksum: &str,
        mac_address: &str,
        now: u64,
    ) -> Receipt<bool> {
        self.tick(now);
        let result = self.mfa.login(caller, email, password, device_checksum, mac_address);
        let fields = payload([
            ("email", email.to_string()),
            ("device_checksum", device_checksum.to_string()),
            ("mac_address", mac_address.to_string()),
        ]);
        let seq = self.record(caller, MFA_CONTRACT, "login", fields, result.map(|_| ()));
        Receipt { seq, result }
    }

    pub fn get_all_users(&mut self, caller: AccountAddress, now: u64) -> Receipt<Vec<UserRecord>> {
        self.tick(now);
        let result = self.mfa.get_all_users(caller).map(|users| users.into_iter().cloned().collect::<Vec<_>>());
        let count = result.as_ref().map(|u| u.len().to_string()).unwrap_or_default();
        let seq = self.record(caller, MFA_CONTRACT, "getAllUsers", payload([("count", count)]), result.as_ref().map(|_| ()).map_err(|e| *e));
        Receipt { seq, result }
    }

    pub fn start_execution(&mut self, caller: AccountAddress, target: AccountAddress, now: u64) -> Receipt<u64> {
        let now = self.tick(now);
        let result = self.jit.start_execution(target, now);
        let deadline = result.map(|d| d.to_string()).unwrap_or_default();
        let fields = payload([("target", target.to_string()), ("deadline", deadline)]);
        let seq = self.record(caller, JIT_CONTRACT, "startExecution", fields, result.map(|_| ()));
        Receipt { seq, result }
    }

    pub fn is_overtime(&mut self, caller: AccountAddress, target: AccountAddress, now: u64) -> Receipt<bool> {
        let now = self.tick(now);
        let overtime = self.jit.is_overtime(target, now);
        let fields = payload([("target", target.to_string()), ("overtime", overtime.to_string())]);
        let seq = self.record(caller, JIT_CONTRACT, "isOvertime", fields, Ok(()));
        Receipt { seq, result: Ok(overtime) }
    }

    /// Targets never attached behave as if their halt call failed.
    pub fn terminate_execution(&mut self, caller: AccountAddress, target: AccountAddress, now: u64) -> Receipt<Termination> {
        let now = self.tick(now);
        let mut missing = SimulatedTarget { fail_on_terminate: true, ..SimulatedTarget::new(target) };
        let hook = self.targets.get_mut(&target).unwrap_or(&mut missing);
        let result = self.jit.terminate_execution(target, now, hook);
        if result == Ok(Termination::Halted) {
            self.halted.insert(target);
        }
        let outcome = result.map(|t| t.as_str().to_string()).unwrap_or_default();
        let fields = payload([("target", target.to_string()), ("outcome", outcome)]);
        let seq = self.record(caller, JIT_CONTRACT, "terminateExecution", fields, result.map(|_| ()));
        Receipt { seq, result }
    }

    /// Seals all pending transactions, splitting across blocks when the gas
    /// limit requires it. Returns the indices of the new blocks.
    pub fn seal(&mut self, now: u64) -> Result<Vec<u64>, EngineError> {
        let now = self.tick(now);
        let mut sealed = Vec::new();
        while !self.chain.pending().is_empty() {
            let tick = self.chain.len() as u64;
            let validator = pick_sealer(&self.config.stakes, tick, self.config.seed) as u64;
            let block = self.chain.seal_within(validator, now, self.config.schedule.block_gas_limit)?;
            sealed.push(block.index);
        }
        Ok(sealed)
    }

    /// Chain integrity check. With chain verification switched off this
    /// reports success unconditionally.
    pub fn verify(&self) -> VerifyReport {
        if !self.config.mitigations.chain_verification {
            return VerifyReport { ok: true, first_bad_index: None, failure: None };
        }
        self.chain.verify()
    }

    /// One line per committed transaction with sensitive payload values
    /// masked.
    pub fn audit_log(&self) -> Vec<String> {
        self.chain.transactions().map(audit_line).collect()
    }
}

/// Renders a transaction for logs and reports. Password digests are masked.
pub fn audit_line(tx: &Transaction) -> String {
    let mut line = format!(
        "seq={} t={} caller={} {}.{} {}",
        tx.seq,
        tx.logical_time,
        tx.caller,
        tx.contract,
        tx.operation,
        tx.status.as_str()
    );
    if let Some(code) = tx.error_code {
        let _ = write!(line, " error={}", code.code());
    }
    for (k, v) in &tx.payload {
        let shown = if SENSITIVE_KEYS.contains(&k.as_str()) { REDACTED } else { v.as_str() };
        let _ = write!(line, " {k}={shown}");
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::TxStatus;

    const OWNER: AccountAddress = AccountAddress::from_index(0xad);
    const ALICE: AccountAddress = AccountAddress::from_index(0xa1);
    const TARGET: AccountAddress = AccountAddress::from_index(0xa0d1);

    fn engine() -> PolicyEngine {
        PolicyEngine::deploy(EngineConfig::default(), OWNER, 0).unwrap()
    }

    #[test]
    fn deploy_records_both_contracts() {
        let e = engine();
        assert_eq!(e.chain().len(), 2);
        let ops: Vec<_> = e.chain().transactions().map(|t| (t.contract.as_str(), t.gas_used)).collect();
        assert_eq!(ops, [(MFA_CONTRACT, 2275063), (JIT_CONTRACT, 419174)]);
        assert!(e.verify().ok);
    }

    #[test]
    fn rejected_login_is_recorded() {
        let mut e = engine();
        e.register(ALICE, "alice@x", "pw", "dev", "00:11:22:33:44:55", 10);
        e.assign_role(OWNER, "alice@x", "Customer_Support", "Access to customer transaction histories", 20);
        let r = e.login(ALICE, "alice@x", "bad", "dev", "00:11:22:33:44:55", 30);
        assert_eq!(r.result, Err(ErrorCode::InvalidPassword));
        e.seal(30).unwrap();
        let tx = e.chain().find_transaction(r.seq).unwrap();
        assert_eq!(tx.status, TxStatus::Rejected);
        assert_eq!(tx.error_code, Some(ErrorCode::InvalidPassword));
        assert_eq!(tx.gas_used, 0);
        assert!(!tx.payload.contains_key("password_hash"));
    }

    #[test]
    fn replay_matches_live_state() {
        let mut e = engine();
        e.attach_target(SimulatedTarget::new(TARGET));
        e.register(ALICE, "alice@x", "pw", "dev", "00:11:22:33:44:55", 10);
        e.register(ALICE, "alice@x", "pw", "dev", "00:11:22:33:44:55", 10);
        e.assign_role(ALICE, "alice@x", "Admin", "all", 20);
        e.assign_role(OWNER, "alice@x", "Customer_Support", "Access", 20);
        e.start_execution(ALICE, TARGET, 100);
        e.terminate_execution(ALICE, TARGET, 100 + DEFAULT_THRESHOLD_MS + 1);
        e.seal(400_000).unwrap();
        assert!(!e.target(TARGET).unwrap().running);
        let replayed = PolicyEngine::replay(e.chain(), e.config()).unwrap();
        assert_eq!(replayed, e.state());

        let resumed = PolicyEngine::from_chain(e.chain().clone(), e.config().clone()).unwrap();
        assert_eq!(resumed.state(), e.state());
    }

    #[test]
    fn terminate_without_attached_target_fails_when_overtime() {
        let mut e = engine();
        e.start_execution(OWNER, TARGET, 0);
        assert_eq!(e.terminate_execution(OWNER, TARGET, 1).result, Ok(Termination::WithinWindow));
        assert_eq!(
            e.terminate_execution(OWNER, TARGET, DEFAULT_THRESHOLD_MS + 1).result,
            Err(ErrorCode::TerminateFailed)
        );
    }

    #[test]
    fn audit_log_masks_digests() {
        let mut e = engine();
        e.register(ALICE, "alice@x", "pw", "dev", "00:11:22:33:44:55", 10);
        e.seal(10).unwrap();
        let digest = e.mfa().user("alice@x").unwrap().password_hash.to_hex();
        let log = e.audit_log().join("\n");
        assert!(log.contains("password_hash=«redacted»"));
        assert!(!log.contains(&digest));
    }

    #[test]
    fn seal_respects_gas_limit() {
        let mut config = EngineConfig::default();
        config.schedule.block_gas_limit = 600_000;
        let mut e = PolicyEngine::deploy(config, OWNER, 0);
        // Deployment alone exceeds this limit.
        assert!(matches!(e, Err(EngineError::Ledger(LedgerError::GasLimitExceeded { .. }))));

        let mut config = EngineConfig::default();
        config.schedule.block_gas_limit = 3_000_000;
        e = PolicyEngine::deploy(config, OWNER, 0);
        let mut e = e.unwrap();
        for i in 0..30u64 {
            e.register(AccountAddress::from_index(100 + i), &format!("u{i}@x"), "pw", "d", "m", 1);
        }
        let sealed = e.seal(1).unwrap();
        assert!(sealed.len() > 1);
        assert!(e.chain().blocks().iter().all(|b| b.gas_used() <= 3_000_000));
        assert!(e.verify().ok);
    }

    #[test]
    fn disabled_verification_reports_ok() {
        let config = EngineConfig { mitigations: Mitigations::default().without(Mitigation::ChainVerification), ..Default::default() };
        let mut e = PolicyEngine::deploy(config, OWNER, 0).unwrap();
        e.chain_mut().blocks_mut()[1].timestamp = 99;
        assert!(e.verify().ok);
        assert!(!e.chain().verify().ok);
    }

    #[test]
    fn mitigation_names_round_trip() {
        for m in Mitigation::ALL {
            assert_eq!(m.name().parse::<Mitigation>().unwrap(), m);
            assert_eq!(Mitigations::default().without(m).disabled(), [m]);
        }
    }
}
