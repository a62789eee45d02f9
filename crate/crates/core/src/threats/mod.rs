//! Scripted STRIDE scenarios replayed against the policy engine, each with
//! a perimeter-baseline comparison and ledger-backed evidence.

mod script;

pub use script::{
    bundled_scenarios, bundled_world, BaselineProbe, Mutation, StaffProfile, Step, ThreatScenario, Verdict, World,
    SCENARIO_JSON, WORLD_JSON,
};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::contracts::{SimulatedTarget, Termination};
use crate::engine::{audit_line, EngineConfig, Mitigation, Mitigations, PolicyEngine};
use crate::error_code::ErrorCode;
use crate::gas::gas_report;
use crate::ledger::{decode_jsonl, encode_jsonl, AccountAddress, TxStatus};
use crate::perimeter::PerimeterDirectory;
use crate::sim::{dos_flood, SimConfig};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ThreatError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

impl ThreatError {
    pub fn code(&self) -> &'static str {
        "UNKNOWN_SCENARIO"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ThreatOptions {
    pub mitigations: Mitigations,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    LedgerTx { seq: u64, operation: String, status: TxStatus, code: Option<String>, logical_time: u64 },
    Integrity { mutation: String, detected: bool, detail: String },
    Availability { multiplier: f64, zero_trust: f64, perimeter: f64 },
    Scan { artifacts: u32, leaks: u32 },
    State { detail: String },
}

impl Evidence {
    pub fn summary(&self) -> String {
        match self {
            Evidence::LedgerTx { seq, status, code, .. } => match code {
                Some(c) => format!("tx#{seq} {} {c}", status.as_str()),
                None => format!("tx#{seq} {}", status.as_str()),
            },
            Evidence::Integrity { mutation, detected, .. } => {
                format!("{mutation}: {}", if *detected { "detected" } else { "undetected" })
            }
            Evidence::Availability { zero_trust, perimeter, .. } => {
                format!("success zt {:.1}% vs perimeter {:.1}%", zero_trust * 100.0, perimeter * 100.0)
            }
            Evidence::Scan { artifacts, leaks } => format!("{leaks} leaks in {artifacts} artifacts"),
            Evidence::State { detail } => detail.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BaselineOutcome {
    Exposed,
    Degraded,
    Resisted,
}

impl BaselineOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineOutcome::Exposed => "EXPOSED",
            BaselineOutcome::Degraded => "DEGRADED",
            BaselineOutcome::Resisted => "RESISTED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub id: String,
    pub category: String,
    pub description: String,
    pub mitigation: String,
    pub expected_verdict: Verdict,
    pub observed_verdict: Verdict,
    pub pass: bool,
    pub evidence: Vec<Evidence>,
    pub failures: Vec<String>,
    pub baseline: BaselineOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatReport {
    pub disabled_mitigations: Vec<String>,
    pub passed: usize,
    pub total: usize,
    pub results: Vec<ScenarioResult>,
}

impl ThreatReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| Threat ID | Category | Description | Mitigation | Expected | Observed | Perimeter baseline | Evidence |\n\
             |---|---|---|---|---|---|---|---|\n",
        );
        for r in &self.results {
            let evidence: Vec<String> = r.evidence.iter().map(Evidence::summary).collect();
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} |",
                r.id,
                r.category,
                r.description,
                r.mitigation,
                r.expected_verdict.as_str(),
                r.observed_verdict.as_str(),
                r.baseline.as_str(),
                evidence.join("; ").replace('|', "/"),
            );
        }
        let _ = writeln!(out, "\n{}/{} scenarios passed", self.passed, self.total);
        out
    }
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, key: &str) -> Result<&'a T, String> {
    map.get(key).ok_or_else(|| format!("fixture names unknown {kind} `{key}`"))
}

fn outcome_str<T>(r: &Result<T, ErrorCode>) -> &'static str {
    match r {
        Ok(_) => "OK",
        Err(e) => e.code(),
    }
}

struct Run<'w> {
    world: &'w World,
    options: ThreatOptions,
    engine: PolicyEngine,
    now: u64,
    evidence: Vec<Evidence>,
    failures: Vec<String>,
    recorded: Vec<u64>,
    listings: Vec<String>,
}

impl<'w> Run<'w> {
    fn new(world: &'w World, options: ThreatOptions) -> Result<Self, String> {
        let admin = *lookup(&world.actors, "actor", "admin")?;
        let config = EngineConfig { seed: options.seed, mitigations: options.mitigations, ..Default::default() };
        let mut engine = PolicyEngine::deploy(config, admin, 0).map_err(|e| e.to_string())?;
        for &address in world.targets.values() {
            engine.attach_target(SimulatedTarget::new(address));
        }
        Ok(Run {
            world,
            options,
            engine,
            now: 1,
            evidence: Vec::new(),
            failures: Vec::new(),
            recorded: Vec::new(),
            listings: Vec::new(),
        })
    }

    fn actor(&self, name: &str) -> Result<AccountAddress, String> {
        lookup(&self.world.actors, "actor", name).copied()
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }

    /// Checks a receipt against the expected outcome and keeps the ledger
    /// entry as evidence.
    fn expect(&mut self, what: &str, seq: u64, observed: &'static str, expected: &str) {
        self.recorded.push(seq);
        let (status, code) = if observed == "OK" {
            (TxStatus::Accepted, None)
        } else {
            (TxStatus::Rejected, Some(observed.to_string()))
        };
        let operation = what.to_string();
        self.evidence.push(Evidence::LedgerTx { seq, operation, status, code, logical_time: self.engine.clock() });
        if observed != expected {
            self.fail(format!("{what}: expected {expected}, observed {observed}"));
        }
    }

    fn step(&mut self, step: &Step) -> Result<(), String> {
        let now = self.now;
        match step {
            Step::Enroll { user } => {
                let profile = lookup(&self.world.users, "user", user)?;
                let device = lookup(&self.world.devices, "device", &profile.device)?;
                let checksum = device.checksum().map_err(|e| e.to_string())?;
                let (addr, admin) = (self.actor(user)?, self.actor("admin")?);
                let r = self.engine.register(addr, &profile.email, &profile.password, &checksum, &device.mac, now);
                if r.result.is_err() {
                    return Err(format!("enrolling {user}: {}", outcome_str(&r.result)));
                }
                self.recorded.push(r.seq);
                let r = self.engine.assign_role(admin, &profile.email, &profile.role, &profile.role_description, now);
                if r.result.is_err() {
                    return Err(format!("enrolling {user}: {}", outcome_str(&r.result)));
                }
                self.recorded.push(r.seq);
            }
            Step::AssignRole { caller, user, role, description, expect } => {
                let email = &lookup(&self.world.users, "user", user)?.email;
                let r = self.engine.assign_role(self.actor(caller)?, email, role, description, now);
                self.expect("assignRole", r.seq, outcome_str(&r.result), expect);
            }
            Step::Login { caller, account, device, password, expect } => {
                let profile = lookup(&self.world.users, "user", account)?;
                let info = lookup(&self.world.devices, "device", device)?;
                let checksum = info.checksum().map_err(|e| e.to_string())?;
                let password = password.as_deref().unwrap_or(&profile.password);
                let r = self.engine.login(self.actor(caller)?, &profile.email, password, &checksum, &info.mac, now);
                self.expect("login", r.seq, outcome_str(&r.result), expect);
            }
            Step::ListUsers { caller, expect } => {
                let r = self.engine.get_all_users(self.actor(caller)?, now);
                if let Ok(users) = &r.result {
                    let shown: Vec<_> = users.iter().map(|u| u.redacted()).collect();
                    self.listings.push(serde_json::to_string(&shown).map_err(|e| e.to_string())?);
                }
                self.expect("getAllUsers", r.seq, outcome_str(&r.result), expect);
            }
            Step::CheckRole { user, role } => {
                let email = &lookup(&self.world.users, "user", user)?.email;
                let actual = self.engine.mfa().user(email).map(|u| u.role.clone()).unwrap_or_default();
                self.evidence.push(Evidence::State { detail: format!("{user} role {actual}") });
                if actual != *role {
                    self.fail(format!("{user} role is {actual}, expected {role}"));
                }
            }
            Step::Advance { ms } => self.now += ms,
            Step::Seal => {
                self.engine.seal(now).map_err(|e| e.to_string())?;
            }
            Step::JitStart { caller, target, expect } => {
                let target = *lookup(&self.world.targets, "target", target)?;
                let r = self.engine.start_execution(self.actor(caller)?, target, now);
                self.expect("startExecution", r.seq, outcome_str(&r.result), expect);
            }
            Step::JitCheck { caller, target, overtime } => {
                let target = *lookup(&self.world.targets, "target", target)?;
                let r = self.engine.is_overtime(self.actor(caller)?, target, now);
                let observed = r.result == Ok(true);
                self.expect("isOvertime", r.seq, "OK", "OK");
                if observed != *overtime {
                    self.fail(format!("isOvertime: expected {overtime}, observed {observed}"));
                }
            }
            Step::JitTerminate { caller, target, expect } => {
                let target = *lookup(&self.world.targets, "target", target)?;
                let r = self.engine.terminate_execution(self.actor(caller)?, target, now);
                self.expect("terminateExecution", r.seq, outcome_str(&r.result), "OK");
                let observed = match r.result {
                    Ok(Termination::Halted) => "HALTED",
                    Ok(Termination::WithinWindow) => "WITHIN_WINDOW",
                    Err(e) => e.code(),
                };
                if observed != expect {
                    self.fail(format!("terminateExecution: expected {expect}, observed {observed}"));
                }
            }
            Step::TargetRunning { target, running } => {
                let address = *lookup(&self.world.targets, "target", target)?;
                let actual = self.engine.target(address).is_some_and(|t| t.running);
                self.evidence.push(Evidence::State { detail: format!("{target} running={actual}") });
                if actual != *running {
                    self.fail(format!("{target}: expected running={running}, observed {actual}"));
                }
            }
            Step::AuditTrail => self.audit_trail(),
            Step::ScanDisclosure => self.scan_disclosure(),
            Step::Tamper { mutation } => self.tamper(mutation)?,
            Step::Flood { multiplier } => {
                let config = SimConfig { seed: self.options.seed, ..Default::default() };
                let r = dos_flood(&config, *multiplier).map_err(|e| e.to_string())?;
                let (zt, p) = (r.zero_trust.success_rate, r.perimeter.success_rate);
                self.evidence.push(Evidence::Availability { multiplier: *multiplier, zero_trust: zt, perimeter: p });
                if zt <= p {
                    self.fail(format!("flood x{multiplier}: zero-trust success {zt:.3} not above perimeter {p:.3}"));
                }
            }
        }
        Ok(())
    }

    /// Every call made so far must be committed with a timestamp, in order.
    fn audit_trail(&mut self) {
        let chain = self.engine.chain();
        let mut missing = Vec::new();
        let mut last = 0;
        for &seq in &self.recorded {
            match chain.find_transaction(seq) {
                Some(tx) if tx.logical_time >= last => last = tx.logical_time,
                _ => missing.push(seq),
            }
        }
        let detail = format!("{} calls committed with timestamps, {} missing", self.recorded.len() - missing.len(), missing.len());
        self.evidence.push(Evidence::State { detail });
        if !missing.is_empty() {
            self.fail(format!("calls without ledger record: {missing:?}"));
        }
    }

    fn scan_disclosure(&mut self) {
        let digests: Vec<String> = self.engine.mfa().emails().iter().filter_map(|e| self.engine.mfa().user(e)).map(|u| u.password_hash.to_hex()).collect();
        let mut artifacts = self.listings.clone();
        let report = gas_report(self.engine.chain().blocks(), &self.engine.config().schedule);
        artifacts.push(report.to_text());
        artifacts.push(report.to_csv());
        artifacts.push(self.engine.audit_log().join("\n"));
        artifacts.extend(self.engine.chain().pending().iter().map(audit_line));
        let leaks = artifacts.iter().filter(|a| digests.iter().any(|d| a.contains(d.as_str()))).count() as u32;
        self.evidence.push(Evidence::Scan { artifacts: artifacts.len() as u32, leaks });
        if leaks > 0 {
            self.fail(format!("{leaks} artifacts expose password digests"));
        }
    }

    /// Edits the serialized chain the way an attacker with file access
    /// would, then reloads it.
    fn tamper(&mut self, mutation: &Mutation) -> Result<(), String> {
        self.engine.seal(self.now).map_err(|e| e.to_string())?;
        let chain = self.engine.chain();
        let operation = match mutation {
            Mutation::DeleteTransaction { operation } | Mutation::EditPayload { operation, .. } => operation,
        };
        let (block, pos) = chain
            .blocks()
            .iter()
            .find_map(|b| b.transactions.iter().position(|t| &t.operation == operation).map(|p| (b.index, p)))
            .ok_or_else(|| format!("no committed {operation} transaction to tamper with"))?;
        let text = encode_jsonl(chain);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut value: serde_json::Value = serde_json::from_str(&lines[block as usize]).map_err(|e| e.to_string())?;
        let txs = value["transactions"].as_array_mut().ok_or("block without transactions")?;
        let label = match mutation {
            Mutation::DeleteTransaction { .. } => {
                txs.remove(pos);
                format!("delete {operation} in block {block}")
            }
            Mutation::EditPayload { field, value: v, .. } => {
                txs[pos]["payload"][field.as_str()] = serde_json::Value::String(v.clone());
                format!("edit {operation}.{field} in block {block}")
            }
        };
        lines[block as usize] = serde_json::to_string(&value).map_err(|e| e.to_string())?;
        let mut tampered = lines.join("\n");
        tampered.push('\n');

        let (detected, detail) = if !self.options.mitigations.chain_verification {
            (false, String::from("verification disabled"))
        } else {
            match decode_jsonl(&tampered, chain.algorithm()) {
                Err(e) => (true, format!("load rejected: {e}")),
                Ok(loaded) => {
                    let report = loaded.verify();
                    let replay = PolicyEngine::replay(&loaded, self.engine.config());
                    let diverges = replay.map(|s| s != self.engine.state()).unwrap_or(true);
                    match report.failure {
                        Some(f) => (true, format!("verify failed at block {:?}: {f:?}; replay diverges: {diverges}", report.first_bad_index)),
                        None => (false, format!("verify passed; replay diverges: {diverges}")),
                    }
                }
            }
        };
        self.evidence.push(Evidence::Integrity { mutation: label.clone(), detected, detail });
        if !detected {
            self.fail(format!("{label} went undetected"));
        }
        Ok(())
    }
}

fn baseline(world: &World, probe: BaselineProbe, options: ThreatOptions) -> BaselineOutcome {
    let mut dir = PerimeterDirectory::new(Default::default());
    for p in world.users.values() {
        let _ = dir.register(&p.email, &p.password, 0);
        let _ = dir.assign_role("admin", &p.email, &p.role, 0);
    }
    let (victim, digest) = match world.users.values().next() {
        Some(p) => (p.email.clone(), dir.user(&p.email).map(|u| u.password_hash.to_hex())),
        None => return BaselineOutcome::Resisted,
    };
    let exposed = |hit: bool| if hit { BaselineOutcome::Exposed } else { BaselineOutcome::Resisted };
    match probe {
        BaselineProbe::PasswordLogin => {
            let password = world.users.values().next().map(|p| p.password.clone()).unwrap_or_default();
            exposed(dir.login(&victim, &password, 1).is_ok())
        }
        BaselineProbe::UnguardedRoleEdit => exposed(dir.assign_role("charlie", &victim, "Admin", 1).is_ok()),
        BaselineProbe::ListingExposesDigests => {
            let listing: Vec<String> = dir.list_users().iter().map(|u| u.password_hash.to_hex()).collect();
            exposed(digest.is_some_and(|d| listing.contains(&d)))
        }
        BaselineProbe::LogRewrite => {
            dir.log_mut().retain(|e| e.actor != victim);
            exposed(dir.audit())
        }
        BaselineProbe::RecordEdit => {
            let _ = dir.assign_role("charlie", &victim, "Admin", 1);
            dir.log_mut().pop();
            exposed(dir.audit())
        }
        BaselineProbe::SessionNeverExpires => exposed(dir.session_active(0, u64::MAX)),
        BaselineProbe::CentralFlood => {
            let config = SimConfig { seed: options.seed, ..Default::default() };
            match dos_flood(&config, 20.0) {
                Ok(r) if r.perimeter.success_rate < r.zero_trust.success_rate => BaselineOutcome::Degraded,
                _ => BaselineOutcome::Resisted,
            }
        }
    }
}

/// Runs one scenario on fresh state.
pub fn run_script(world: &World, scenario: &ThreatScenario, options: ThreatOptions) -> ScenarioResult {
    let mut failures = Vec::new();
    let mut evidence = Vec::new();
    match Run::new(world, options) {
        Ok(mut run) => {
            for (i, step) in scenario.steps.iter().enumerate() {
                if let Err(e) = run.step(step) {
                    run.fail(format!("step {}: {e}", i + 1));
                    break;
                }
            }
            failures = run.failures;
            evidence = run.evidence;
        }
        Err(e) => failures.push(e),
    }
    if evidence.is_empty() {
        failures.push(String::from("scenario produced no evidence"));
    }
    let pass = failures.is_empty();
    ScenarioResult {
        id: scenario.id.clone(),
        category: scenario.category.clone(),
        description: scenario.description.clone(),
        mitigation: scenario.mitigation.clone(),
        expected_verdict: scenario.expected_verdict,
        observed_verdict: if pass { scenario.expected_verdict } else { Verdict::NotMitigated },
        pass,
        evidence,
        failures,
        baseline: baseline(world, scenario.baseline, options),
    }
}

pub fn scenario_ids() -> Vec<String> {
    bundled_scenarios().into_iter().map(|s| s.id).collect()
}

pub fn run_scenario(id: &str, options: ThreatOptions) -> Result<ScenarioResult, ThreatError> {
    let scenario = bundled_scenarios()
        .into_iter()
        .find(|s| s.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| ThreatError::UnknownScenario(id.to_string()))?;
    Ok(run_script(&bundled_world(), &scenario, options))
}

pub fn run_all(options: ThreatOptions) -> ThreatReport {
    let world = bundled_world();
    let results: Vec<_> = bundled_scenarios().iter().map(|s| run_script(&world, s, options)).collect();
    ThreatReport {
        disabled_mitigations: options.mitigations.disabled().iter().map(|m| m.name().to_string()).collect(),
        passed: results.iter().filter(|r| r.pass).count(),
        total: results.len(),
        results,
    }
}

/// For each mitigation, the scenarios that fail once it alone is removed.
pub fn mutation_sensitivity(seed: u64) -> Vec<(Mitigation, Vec<String>)> {
    Mitigation::ALL
        .into_iter()
        .map(|m| {
            let options = ThreatOptions { mitigations: Mitigations::default().without(m), seed };
            let failing = run_all(options).results.into_iter().filter(|r| !r.pass).map(|r| r.id).collect();
            (m, failing)
        })
        .collect()
}
