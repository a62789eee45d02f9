//! Gas accounting.
//!
//! Costs are table-driven: each `(contract, method)` pair carries a
//! measured `{min, max, avg}` envelope and each contract a deployment cost.
//! The default table holds the figures measured on a Hardhat test net
//! (solc 0.8.18, optimizer off, 30M block limit). Calls are charged the
//! average unless size-dependent charging is switched on.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::contracts::{JIT_CONTRACT, MFA_CONTRACT};
use crate::ledger::Block;

pub const DEFAULT_BLOCK_GAS_LIMIT: u64 = 30_000_000;
/// Operation name under which deployments are recorded on the ledger.
pub const DEPLOY_OPERATION: &str = "deploy";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GasError {
    #[error("no gas entry for {contract}.{operation}")]
    UnknownOperation { contract: String, operation: String },
    #[error("invalid gas schedule: {0}")]
    InvalidSchedule(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodCost {
    pub contract: String,
    pub method: String,
    pub min: u64,
    pub max: u64,
    pub avg: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeploymentCost {
    pub contract: String,
    pub gas: u64,
}

/// Interpolates `min..=max` linearly over payload sizes
/// `min_bytes..=max_bytes` for methods whose envelope is not a single value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeModel {
    pub min_bytes: u64,
    pub max_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleFile")]
pub struct GasSchedule {
    pub methods: Vec<MethodCost>,
    pub deployments: Vec<DeploymentCost>,
    pub block_gas_limit: u64,
    #[serde(default)]
    pub per_byte_surcharge: u64,
    #[serde(default)]
    pub size_model: Option<SizeModel>,
}

#[derive(Deserialize)]
struct ScheduleFile {
    methods: Vec<MethodCost>,
    deployments: Vec<DeploymentCost>,
    #[serde(default = "default_limit")]
    block_gas_limit: u64,
    #[serde(default)]
    per_byte_surcharge: u64,
    #[serde(default)]
    size_model: Option<SizeModel>,
}

fn default_limit() -> u64 {
    DEFAULT_BLOCK_GAS_LIMIT
}

impl TryFrom<ScheduleFile> for GasSchedule {
    type Error = GasError;

    fn try_from(f: ScheduleFile) -> Result<Self, Self::Error> {
        let schedule = GasSchedule {
            methods: f.methods,
            deployments: f.deployments,
            block_gas_limit: f.block_gas_limit,
            per_byte_surcharge: f.per_byte_surcharge,
            size_model: f.size_model,
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

fn method(contract: &str, name: &str, min: u64, max: u64, avg: u64) -> MethodCost {
    MethodCost { contract: contract.into(), method: name.into(), min, max, avg }
}

impl Default for GasSchedule {
    fn default() -> Self {
        GasSchedule {
            methods: alloc::vec![
                method(JIT_CONTRACT, "startExecution", 44313, 44313, 44313),
                method(JIT_CONTRACT, "terminateExecution", 24194, 24194, 24194),
                // View calls cost nothing when not sent as transactions.
                method(JIT_CONTRACT, "isOvertime", 0, 0, 0),
                method(MFA_CONTRACT, "assignRole", 42220, 42220, 42220),
                method(MFA_CONTRACT, "register", 219332, 253556, 245956),
                method(MFA_CONTRACT, "login", 0, 0, 0),
                method(MFA_CONTRACT, "getAllUsers", 0, 0, 0),
            ],
            deployments: alloc::vec![
                DeploymentCost { contract: JIT_CONTRACT.into(), gas: 419174 },
                DeploymentCost { contract: MFA_CONTRACT.into(), gas: 2275063 },
            ],
            block_gas_limit: DEFAULT_BLOCK_GAS_LIMIT,
            per_byte_surcharge: 0,
            size_model: None,
        }
    }
}

impl GasSchedule {
    pub fn validate(&self) -> Result<(), GasError> {
        if self.block_gas_limit == 0 {
            return Err(GasError::InvalidSchedule("block_gas_limit must be positive".into()));
        }
        for m in &self.methods {
            if !(m.min <= m.avg && m.avg <= m.max) {
                return Err(GasError::InvalidSchedule(format!(
                    "{}.{}: need min <= avg <= max, got {}/{}/{}",
                    m.contract, m.method, m.min, m.avg, m.max
                )));
            }
        }
        if let Some(size) = self.size_model {
            if size.max_bytes <= size.min_bytes {
                return Err(GasError::InvalidSchedule("size_model needs max_bytes > min_bytes".into()));
            }
        }
        Ok(())
    }

    pub fn method_cost(&self, contract: &str, operation: &str) -> Option<&MethodCost> {
        self.methods.iter().find(|m| m.contract == contract && m.method == operation)
    }

    pub fn deployment_cost(&self, contract: &str) -> Option<u64> {
        self.deployments.iter().find(|d| d.contract == contract).map(|d| d.gas)
    }

    /// Gas for one call with a payload of `payload_bytes`.
    pub fn charge(&self, contract: &str, operation: &str, payload_bytes: u64) -> Result<u64, GasError> {
        let unknown = || GasError::UnknownOperation { contract: contract.into(), operation: operation.into() };
        if operation == DEPLOY_OPERATION {
            return self.deployment_cost(contract).ok_or_else(unknown);
        }
        let cost = self.method_cost(contract, operation).ok_or_else(unknown)?;
        let base = match self.size_model {
            Some(size) if cost.min < cost.max => {
                let clamped = payload_bytes.clamp(size.min_bytes, size.max_bytes) - size.min_bytes;
                let span = (size.max_bytes - size.min_bytes) as u128;
                cost.min + ((cost.max - cost.min) as u128 * clamped as u128 / span) as u64
            }
            _ => cost.avg,
        };
        Ok(base.saturating_add(self.per_byte_surcharge.saturating_mul(payload_bytes)))
    }
}

/// One line of the gas table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GasReportRow {
    pub contract: String,
    pub method: String,
    /// Envelope from the schedule.
    pub min: u64,
    pub max: u64,
    pub avg: u64,
    /// Accepted calls found on the ledger.
    pub call_count: u64,
    /// Gas actually charged across those calls.
    pub total_gas: u64,
    /// Deployments only: cost as a percentage of the block gas limit.
    pub percent_of_block_limit: Option<f64>,
}

impl GasReportRow {
    pub fn observed_avg(&self) -> Option<u64> {
        (self.call_count > 0).then(|| self.total_gas / self.call_count)
    }

    /// Percentage rendered with one decimal, e.g. `7.6`.
    pub fn percent_text(&self) -> Option<String> {
        self.percent_of_block_limit.map(|p| format!("{p:.1}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GasReport {
    pub block_gas_limit: u64,
    pub methods: Vec<GasReportRow>,
    pub deployments: Vec<GasReportRow>,
}

/// Aggregates accepted, gas-charging transactions per `(contract, method)`.
/// View calls (zero-cost entries) and rejected calls are left out. Rows are
/// sorted by contract, then method.
pub fn gas_report<'a>(blocks: impl IntoIterator<Item = &'a Block>, schedule: &GasSchedule) -> GasReport {
    let mut calls: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
    for tx in blocks.into_iter().flat_map(|b| b.transactions.iter()) {
        if !tx.is_accepted() {
            continue;
        }
        let entry = calls.entry((tx.contract.clone(), tx.operation.clone())).or_default();
        entry.0 += 1;
        entry.1 += tx.gas_used;
    }
    let limit = schedule.block_gas_limit;
    let mut methods = Vec::new();
    let mut deployments = Vec::new();
    for ((contract, op), (count, total)) in calls {
        if op == DEPLOY_OPERATION {
            let gas = schedule.deployment_cost(&contract).unwrap_or(total / count.max(1));
            deployments.push(GasReportRow {
                contract,
                method: op,
                min: gas,
                max: gas,
                avg: gas,
                call_count: count,
                total_gas: total,
                percent_of_block_limit: Some(gas as f64 * 100.0 / limit as f64),
            });
        } else if let Some(cost) = schedule.method_cost(&contract, &op) {
            if cost.max == 0 {
                continue;
            }
            methods.push(GasReportRow {
                contract,
                method: op,
                min: cost.min,
                max: cost.max,
                avg: cost.avg,
                call_count: count,
                total_gas: total,
                percent_of_block_limit: None,
            });
        }
    }
    GasReport { block_gas_limit: limit, methods, deployments }
}

/// The schedule itself as a report, one row per charging method and per
/// deployment, with no calls counted.
pub fn schedule_report(schedule: &GasSchedule) -> GasReport {
    let limit = schedule.block_gas_limit;
    let row = |contract: &str, method: &str, min, max, avg, pct| GasReportRow {
        contract: contract.into(),
        method: method.into(),
        min,
        max,
        avg,
        call_count: 0,
        total_gas: 0,
        percent_of_block_limit: pct,
    };
    let mut methods: Vec<_> = schedule
        .methods
        .iter()
        .filter(|m| m.max > 0)
        .map(|m| row(&m.contract, &m.method, m.min, m.max, m.avg, None))
        .collect();
    methods.sort_by(|a, b| (&a.contract, &a.method).cmp(&(&b.contract, &b.method)));
    let mut deployments: Vec<_> = schedule
        .deployments
        .iter()
        .map(|d| row(&d.contract, DEPLOY_OPERATION, d.gas, d.gas, d.gas, Some(d.gas as f64 * 100.0 / limit as f64)))
        .collect();
    deployments.sort_by(|a, b| a.contract.cmp(&b.contract));
    GasReport { block_gas_limit: limit, methods, deployments }
}

fn min_max_cell(row: &GasReportRow, value: u64) -> String {
    if row.min == row.max {
        "-".into()
    } else {
        value.to_string()
    }
}

impl GasReport {
    pub fn method(&self, contract: &str, method: &str) -> Option<&GasReportRow> {
        self.methods.iter().find(|r| r.contract == contract && r.method == method)
    }

    pub fn deployment(&self, contract: &str) -> Option<&GasReportRow> {
        self.deployments.iter().find(|r| r.contract == contract)
    }

    /// Aligned text table: methods, then deployments with their share of
    /// the block limit. Single-valued envelopes print `-` for min and max.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<[String; 6]> = Vec::new();
        rows.push(["Contract", "Method", "Min", "Max", "Avg", "# calls"].map(String::from));
        for r in &self.methods {
            rows.push([
                r.contract.clone(),
                r.method.clone(),
                min_max_cell(r, r.min),
                min_max_cell(r, r.max),
                r.avg.to_string(),
                r.call_count.to_string(),
            ]);
        }
        let mut deploy_rows: Vec<[String; 6]> = Vec::new();
        deploy_rows.push(["Deployments", "", "", "", "", "% of limit"].map(String::from));
        for r in &self.deployments {
            deploy_rows.push([
                r.contract.clone(),
                String::new(),
                "-".into(),
                "-".into(),
                r.avg.to_string(),
                format!("{} %", r.percent_text().unwrap_or_default()),
            ]);
        }
        let mut widths = [0usize; 6];
        for row in rows.iter().chain(deploy_rows.iter()) {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = format!("Block limit: {} gas\nMethods\n", self.block_gas_limit);
        let emit = |out: &mut String, row: &[String; 6]| {
            let line: Vec<String> = row
                .iter()
                .zip(widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        };
        for row in &rows {
            emit(&mut out, row);
        }
        for row in &deploy_rows {
            emit(&mut out, row);
        }
        out
    }

    /// `section,contract,method,min,max,avg,calls,total_gas,percent_of_limit`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,contract,method,min,max,avg,calls,total_gas,percent_of_limit\n");
        for r in &self.methods {
            let _ = writeln!(out, "method,{},{},{},{},{},{},{},", r.contract, r.method, r.min, r.max, r.avg, r.call_count, r.total_gas);
        }
        for r in &self.deployments {
            let _ = writeln!(
                out,
                "deployment,{},{},{},{},{},{},{},{}",
                r.contract,
                r.method,
                r.min,
                r.max,
                r.avg,
                r.call_count,
                r.total_gas,
                r.percent_text().unwrap_or_default()
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{AccountAddress, Chain, HashAlgorithm, Transaction};
    use crate::ErrorCode;

    #[test]
    fn default_charges() {
        let s = GasSchedule::default();
        assert_eq!(s.charge(MFA_CONTRACT, "assignRole", 100), Ok(42220));
        assert_eq!(s.charge(JIT_CONTRACT, "terminateExecution", 0), Ok(24194));
        assert_eq!(s.charge(JIT_CONTRACT, "startExecution", 0), Ok(44313));
        assert_eq!(s.charge(MFA_CONTRACT, "register", 10_000), Ok(245956));
        assert_eq!(s.charge(MFA_CONTRACT, "login", 10), Ok(0));
        assert_eq!(s.charge(MFA_CONTRACT, DEPLOY_OPERATION, 0), Ok(2275063));
        assert!(matches!(s.charge(MFA_CONTRACT, "selfdestruct", 0), Err(GasError::UnknownOperation { .. })));
    }

    #[test]
    fn size_model_interpolates_register() {
        let s = GasSchedule {
            size_model: Some(SizeModel { min_bytes: 100, max_bytes: 300 }),
            ..GasSchedule::default()
        };
        assert_eq!(s.charge(MFA_CONTRACT, "register", 0), Ok(219332));
        assert_eq!(s.charge(MFA_CONTRACT, "register", 300), Ok(253556));
        assert_eq!(s.charge(MFA_CONTRACT, "register", 200), Ok(219332 + (253556 - 219332) / 2));
        // Single-valued entries ignore the size model.
        assert_eq!(s.charge(MFA_CONTRACT, "assignRole", 300), Ok(42220));
    }

    #[test]
    fn surcharge_per_byte() {
        let s = GasSchedule { per_byte_surcharge: 16, ..GasSchedule::default() };
        assert_eq!(s.charge(MFA_CONTRACT, "assignRole", 10), Ok(42220 + 160));
    }

    #[test]
    fn schedule_validation() {
        let mut s = GasSchedule::default();
        s.methods[0].avg = s.methods[0].max + 1;
        assert!(s.validate().is_err());
        let json = r#"{"methods":[{"contract":"C","method":"m","min":5,"max":4,"avg":4}],"deployments":[]}"#;
        assert!(serde_json::from_str::<GasSchedule>(json).is_err());
        let json = r#"{"methods":[{"contract":"C","method":"m","min":1,"max":4,"avg":2}],"deployments":[]}"#;
        let s: GasSchedule = serde_json::from_str(json).unwrap();
        assert_eq!(s.block_gas_limit, DEFAULT_BLOCK_GAS_LIMIT);
    }

    #[test]
    fn report_counts_accepted_calls_and_deployments() {
        let s = GasSchedule::default();
        let mut chain = Chain::new(HashAlgorithm::Sha256);
        let owner = AccountAddress::from_index(1);
        let mut record = |contract: &str, op: &str, outcome: Result<(), ErrorCode>| {
            let gas = if outcome.is_ok() { s.charge(contract, op, 0).unwrap() } else { 0 };
            chain.record_transaction(Transaction::new(owner, contract, op, BTreeMap::new(), 0, outcome, gas));
        };
        record(MFA_CONTRACT, DEPLOY_OPERATION, Ok(()));
        record(JIT_CONTRACT, DEPLOY_OPERATION, Ok(()));
        record(MFA_CONTRACT, "register", Ok(()));
        record(MFA_CONTRACT, "register", Err(ErrorCode::DuplicateUser));
        record(MFA_CONTRACT, "login", Ok(()));
        chain.seal_block(1, 0).unwrap();

        let report = gas_report(chain.blocks(), &s);
        let register = report.method(MFA_CONTRACT, "register").unwrap();
        assert_eq!((register.min, register.max, register.avg), (219332, 253556, 245956));
        assert_eq!(register.call_count, 1);
        assert!(report.method(MFA_CONTRACT, "login").is_none());
        assert_eq!(report.deployment(MFA_CONTRACT).unwrap().percent_text().as_deref(), Some("7.6"));
        assert_eq!(report.deployment(JIT_CONTRACT).unwrap().percent_text().as_deref(), Some("1.4"));
        assert_eq!(report, gas_report(chain.blocks(), &s));

        let text = report.to_text();
        assert!(text.contains("Block limit: 30000000 gas"));
        assert!(text.contains("219332") && text.contains("7.6 %"));
        assert!(report.to_csv().contains("deployment,JustInTimeAccess,deploy,419174,419174,419174,1,419174,1.4"));
    }

    #[test]
    fn schedule_report_lists_every_charging_method() {
        let r = schedule_report(&GasSchedule::default());
        let cells: Vec<_> = r.methods.iter().map(|m| (m.method.as_str(), m.min, m.max, m.avg)).collect();
        assert_eq!(
            cells,
            [
                ("startExecution", 44313, 44313, 44313),
                ("terminateExecution", 24194, 24194, 24194),
                ("assignRole", 42220, 42220, 42220),
                ("register", 219332, 253556, 245956),
            ]
        );
        let pct: Vec<_> = r.deployments.iter().map(|d| (d.avg, d.percent_text().unwrap())).collect();
        assert_eq!(pct, [(419174, "1.4".into()), (2275063, "7.6".into())]);
    }
}