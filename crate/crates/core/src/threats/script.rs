use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fingerprint::DeviceInfo;
use crate::ledger::AccountAddress;

pub const WORLD_JSON: &str = include_str!("../../resources/threats/world.json");

/// The bundled scenario scripts, in id order.
pub const SCENARIO_JSON: [&str; 7] = [
    include_str!("../../resources/threats/t1.json"),
    include_str!("../../resources/threats/t2.json"),
    include_str!("../../resources/threats/t3.json"),
    include_str!("../../resources/threats/t4.json"),
    include_str!("../../resources/threats/t5.json"),
    include_str!("../../resources/threats/t6.json"),
    include_str!("../../resources/threats/t7.json"),
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaffProfile {
    pub email: String,
    pub password: String,
    pub device: String,
    pub role: String,
    pub role_description: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct World {
    pub organization: String,
    pub actors: BTreeMap<String, AccountAddress>,
    pub users: BTreeMap<String, StaffProfile>,
    pub devices: BTreeMap<String, DeviceInfo>,
    pub targets: BTreeMap<String, AccountAddress>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Mitigated,
    MitigatedByImmutability,
    NotApplicableDecentralized,
    NotMitigated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Mitigated => "MITIGATED",
            Verdict::MitigatedByImmutability => "MITIGATED_BY_IMMUTABILITY",
            Verdict::NotApplicableDecentralized => "NOT_APPLICABLE_DECENTRALIZED",
            Verdict::NotMitigated => "NOT_MITIGATED",
        }
    }
}

/// Attack replayed against the perimeter directory for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineProbe {
    PasswordLogin,
    UnguardedRoleEdit,
    ListingExposesDigests,
    LogRewrite,
    CentralFlood,
    SessionNeverExpires,
    RecordEdit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mutation {
    DeleteTransaction { operation: String },
    EditPayload { operation: String, field: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    /// Registration by the user plus role assignment by the owner.
    Enroll { user: String },
    AssignRole { caller: String, user: String, role: String, description: String, expect: String },
    Login {
        caller: String,
        account: String,
        device: String,
        #[serde(default)]
        password: Option<String>,
        expect: String,
    },
    ListUsers { caller: String, expect: String },
    CheckRole { user: String, role: String },
    Advance { ms: u64 },
    Seal,
    JitStart { caller: String, target: String, expect: String },
    JitCheck { caller: String, target: String, overtime: bool },
    JitTerminate { caller: String, target: String, expect: String },
    TargetRunning { target: String, running: bool },
    AuditTrail,
    ScanDisclosure,
    Tamper { mutation: Mutation },
    Flood { multiplier: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreatScenario {
    pub id: String,
    pub category: String,
    pub description: String,
    pub mitigation: String,
    pub expected_verdict: Verdict,
    pub paired_mitigation: Option<String>,
    pub baseline: BaselineProbe,
    pub steps: Vec<Step>,
}

pub fn bundled_world() -> World {
    serde_json::from_str(WORLD_JSON).expect("bundled world parses")
}

pub fn bundled_scenarios() -> Vec<ThreatScenario> {
    SCENARIO_JSON.iter().map(|s| serde_json::from_str(s).expect("bundled scenario parses")).collect()
}
