//! Argument parsing and verb dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use ztchain_core::contracts::{SimulatedTarget, Termination};
use ztchain_core::engine::{EngineError, Mitigation};
use ztchain_core::gas::{gas_report, schedule_report};
use ztchain_core::sim::{dos_flood, replay_table4, simulate, SimMode};
use ztchain_core::threats::{run_all, run_scenario, ThreatOptions, ThreatReport};
use ztchain_core::{AccountAddress, DeviceInfo, ErrorCode, HashAlgorithm, PolicyEngine};

use crate::config::{self, Overrides, Settings, CONFIG_ENV};
use crate::exports;
use crate::io::{load_chain, load_chain_if_exists, save_chain};

#[derive(Debug, Parser)]
#[command(name = "ztchain", version, about = "Zero-trust access control on a hash-chained ledger")]
pub struct Cli {
    /// Chain file that state-changing verbs read and extend.
    #[arg(long, global = true, value_name = "PATH")]
    chain: Option<PathBuf>,
    /// JSON config file. Falls back to $ZTCHAIN_CONFIG.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long = "jit-threshold-ms", global = true, value_name = "MS")]
    jit_threshold_ms: Option<u64>,
    /// Switch off a safeguard (fault injection). Repeatable.
    #[arg(long, global = true, value_name = "MITIGATION", value_parser = parse_mitigation)]
    disable: Vec<Mitigation>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

fn parse_mitigation(s: &str) -> Result<Mitigation, String> {
    s.parse()
}

#[derive(Debug, Args)]
struct DeviceArgs {
    #[arg(long, allow_hyphen_values = true)]
    lat: f64,
    #[arg(long, allow_hyphen_values = true)]
    lon: f64,
    #[arg(long)]
    browser: String,
    #[arg(long)]
    ip: String,
    #[arg(long = "os-name")]
    os_name: String,
    #[arg(long = "os-version")]
    os_version: String,
    #[arg(long)]
    mac: String,
}

impl DeviceArgs {
    fn info(&self) -> DeviceInfo {
        DeviceInfo {
            latitude: self.lat,
            longitude: self.lon,
            browser: self.browser.clone(),
            ip: self.ip.clone(),
            os_name: self.os_name.clone(),
            os_version: self.os_version.clone(),
            mac: self.mac.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    ZeroTrust,
    Perimeter,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enroll a user bound to one device.
    Register {
        #[arg(long)]
        email: String,
        #[arg(long)]
        password: String,
        #[command(flatten)]
        device: DeviceArgs,
        /// Account registering; defaults to one derived from the email.
        #[arg(long)]
        caller: Option<AccountAddress>,
        #[arg(long = "time-ms")]
        time_ms: Option<u64>,
    },
    /// Set a user's role (owner only).
    AssignRole {
        #[arg(long)]
        email: String,
        #[arg(long)]
        role: String,
        #[arg(long)]
        description: String,
        /// Defaults to the configured owner.
        #[arg(long)]
        caller: Option<AccountAddress>,
        #[arg(long = "time-ms")]
        time_ms: Option<u64>,
    },
    /// Authenticate with password and device.
    Login {
        #[arg(long)]
        email: String,
        #[arg(long)]
        password: String,
        #[command(flatten)]
        device: DeviceArgs,
        #[arg(long)]
        caller: Option<AccountAddress>,
        #[arg(long = "time-ms")]
        time_ms: Option<u64>,
    },
    /// Open a just-in-time window for a target contract.
    JitStart {
        #[arg(long)]
        target: AccountAddress,
        #[arg(long)]
        caller: Option<AccountAddress>,
        #[arg(long = "time-ms")]
        time_ms: Option<u64>,
    },
    /// Check a window and optionally enforce it.
    JitCheck {
        #[arg(long)]
        target: AccountAddress,
        #[arg(long)]
        caller: Option<AccountAddress>,
        /// Halt the target if its window has passed.
        #[arg(long)]
        terminate: bool,
        #[arg(long = "time-ms")]
        time_ms: Option<u64>,
    },
    /// Run the latency/throughput simulation.
    Simulate {
        #[arg(long)]
        nodes: Option<u32>,
        #[arg(long)]
        requests: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Also run the flood experiment at this load multiplier.
        #[arg(long, value_name = "MULTIPLIER")]
        flood: Option<f64>,
        /// Write per-request CSV, summary JSON and plot series here.
        #[arg(long = "out-dir", value_name = "DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Replay the STRIDE threat scenarios.
    Threats {
        /// Run every scenario (the default).
        #[arg(long, conflicts_with = "id")]
        all: bool,
        /// Run a single scenario, e.g. T-3.
        #[arg(long)]
        id: Option<String>,
        /// Write the markdown report here.
        #[arg(long, value_name = "PATH")]
        markdown: Option<PathBuf>,
        /// Write the JSON report here.
        #[arg(long = "report-json", value_name = "PATH")]
        report_json: Option<PathBuf>,
    },
    /// Gas usage per method and deployment (schedule envelope without --chain)
    GasReport {
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Check the integrity of a chain file.
    VerifyChain,
    /// Recompute the reference latency/throughput table.
    ReplayTable4,
}

enum Failure {
    Usage(String),
    Domain { code: String, message: String },
}

impl Failure {
    fn domain(code: &str, message: impl ToString) -> Self {
        Failure::Domain { code: code.to_string(), message: message.to_string() }
    }
}

impl From<ErrorCode> for Failure {
    fn from(e: ErrorCode) -> Self {
        Failure::domain(e.code(), e.message())
    }
}

impl From<crate::io::IoError> for Failure {
    fn from(e: crate::io::IoError) -> Self {
        Failure::domain(e.code(), e)
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::domain(e.code(), e)
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::domain("ENGINE_ERROR", e)
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::domain("IO_ERROR", format!("{}: {e}", path.display()))
}

/// Default account for a user who does not name one.
pub fn account_for(email: &str) -> AccountAddress {
    let d = HashAlgorithm::Sha256.digest(format!("ztchain-account:{email}").as_bytes());
    let mut bytes = [0u8; 20];
    bytes.copy_from_slice(&d.0[..20]);
    AccountAddress::new(bytes)
}

struct Ctx<'a> {
    cli: &'a Cli,
    settings: Settings,
    out: &'a mut dyn Write,
}

type Verb = Result<i32, Failure>;

impl Ctx<'_> {
    fn chain_path(&self) -> Result<&Path, Failure> {
        self.cli.chain.as_deref().ok_or_else(|| Failure::Usage("this verb needs --chain <PATH>".into()))
    }

    fn open_engine(&self) -> Result<PolicyEngine, Failure> {
        let path = self.chain_path()?;
        let config = self.settings.engine.clone();
        Ok(match load_chain_if_exists(path, config.hash)? {
            Some(chain) => PolicyEngine::from_chain(chain, config)?,
            None => PolicyEngine::deploy(config, self.settings.owner, 0)?,
        })
    }

    /// Loads the chain, runs one call, seals and saves whatever it recorded.
    fn mutate<T>(
        &mut self,
        time_ms: Option<u64>,
        call: impl FnOnce(&mut PolicyEngine, u64) -> (u64, Result<T, ErrorCode>),
    ) -> Result<(T, u64, u64), Failure> {
        let mut engine = self.open_engine()?;
        let now = time_ms.unwrap_or(engine.clock() + 1);
        let (seq, result) = call(&mut engine, now);
        engine.seal(now)?;
        save_chain(self.chain_path()?, engine.chain())?;
        let block = engine
            .chain()
            .blocks()
            .iter()
            .find(|b| b.transactions.iter().any(|t| t.seq == seq))
            .map_or(0, |b| b.index);
        let value = result?;
        Ok((value, seq, block))
    }

    fn emit(&mut self, text: &str, value: serde_json::Value) -> Result<(), Failure> {
        let r = if self.cli.json { writeln!(self.out, "{value}") } else { write!(self.out, "{text}") };
        r.map_err(|e| Failure::domain("IO_ERROR", e))
    }

    fn run(&mut self) -> Verb {
        let owner = self.settings.owner;
        match &self.cli.command {
            Command::Register { email, password, device, caller, time_ms } => {
                let checksum = device.info().checksum().map_err(|e| Failure::domain("INVALID_DEVICE_FIELD", e))?;
                let mac = device.mac.clone();
                let caller = caller.unwrap_or_else(|| account_for(email));
                let (_, seq, block) = self.mutate(*time_ms, |e, now| {
                    let r = e.register(caller, email, password, &checksum, &mac, now);
                    (r.seq, r.result)
                })?;
                let text = format!("registered {email} as {caller} (tx {seq}, block {block})\ndevice checksum {checksum}\n");
                let v = json!({"verb": "register", "ok": true, "seq": seq, "block": block, "caller": caller, "device_checksum": checksum});
                self.emit(&text, v)?;
            }
            Command::AssignRole { email, role, description, caller, time_ms } => {
                let caller = caller.unwrap_or(owner);
                let (_, seq, block) = self.mutate(*time_ms, |e, now| {
                    let r = e.assign_role(caller, email, role, description, now);
                    (r.seq, r.result)
                })?;
                let text = format!("assigned {role} to {email} (tx {seq}, block {block})\n");
                self.emit(&text, json!({"verb": "assign-role", "ok": true, "seq": seq, "block": block}))?;
            }
            Command::Login { email, password, device, caller, time_ms } => {
                let checksum = device.info().checksum().map_err(|e| Failure::domain("INVALID_DEVICE_FIELD", e))?;
                let mac = device.mac.clone();
                let caller = caller.unwrap_or_else(|| account_for(email));
                let (_, seq, block) = self.mutate(*time_ms, |e, now| {
                    let r = e.login(caller, email, password, &checksum, &mac, now);
                    (r.seq, r.result)
                })?;
                let text = format!("login granted for {email} (tx {seq}, block {block})\n");
                self.emit(&text, json!({"verb": "login", "ok": true, "seq": seq, "block": block}))?;
            }
            Command::JitStart { target, caller, time_ms } => {
                let caller = caller.unwrap_or(owner);
                let (deadline, seq, block) = self.mutate(*time_ms, |e, now| {
                    let r = e.start_execution(caller, *target, now);
                    (r.seq, r.result)
                })?;
                let text = format!("window open for {target} until {deadline} ms (tx {seq}, block {block})\n");
                let v = json!({"verb": "jit-start", "ok": true, "seq": seq, "block": block, "deadline_ms": deadline});
                self.emit(&text, v)?;
            }
            Command::JitCheck { target, caller, terminate, time_ms } => {
                let caller = caller.unwrap_or(owner);
                let target = *target;
                let terminate = *terminate;
                let mut overtime = false;
                let (outcome, seq, block) = self.mutate(*time_ms, |e, now| {
                    if e.target(target).is_none() {
                        e.attach_target(SimulatedTarget::new(target));
                    }
                    let check = e.is_overtime(caller, target, now);
                    overtime = check.result == Ok(true);
                    if terminate {
                        let r = e.terminate_execution(caller, target, now);
                        (r.seq, r.result.map(Some))
                    } else {
                        (check.seq, Ok(None))
                    }
                })?;
                let mut text = format!("overtime: {overtime} (block {block})\n");
                if let Some(t) = outcome {
                    text += &format!("terminate: {} (tx {seq})\n", t.as_str());
                }
                let v = json!({
                    "verb": "jit-check", "ok": true, "seq": seq, "block": block, "overtime": overtime,
                    "termination": outcome.map(Termination::as_str),
                });
                self.emit(&text, v)?;
            }
            Command::Simulate { nodes, requests, mode, flood, out_dir } => {
                let mut sim = self.settings.sim.clone();
                if let Some(n) = nodes {
                    sim.node_count = *n;
                    sim.stakes = None;
                }
                if let Some(r) = requests {
                    sim.request_count = *r;
                }
                if let Some(m) = mode {
                    sim.mode = match m {
                        ModeArg::ZeroTrust => SimMode::ZeroTrust,
                        ModeArg::Perimeter => SimMode::Perimeter,
                    };
                }
                let sim_err = |e: ztchain_core::sim::SimError| Failure::domain(e.code(), e);
                let run = simulate(&sim).map_err(sim_err)?;
                let flood = flood.map(|m| dos_flood(&sim, m)).transpose().map_err(sim_err)?;
                if let Some(dir) = out_dir {
                    exports::write_simulation(dir, &run.report, flood.as_ref()).map_err(|e| io_failure(dir, e))?;
                }
                let mut text = exports::summary_text(&run.report);
                if let Some(f) = &flood {
                    text += &exports::flood_text(f);
                }
                let v = serde_json::to_value(exports::summary(&run.report, flood.as_ref())).expect("summary serializes");
                self.emit(&text, v)?;
            }
            Command::Threats { all: _, id, markdown, report_json } => {
                let options = ThreatOptions { mitigations: self.settings.engine.mitigations, seed: self.settings.engine.seed };
                let report = match id {
                    Some(id) => {
                        let r = run_scenario(id, options).map_err(|e| Failure::domain(e.code(), e))?;
                        let passed = usize::from(r.pass);
                        ThreatReport {
                            disabled_mitigations: options.mitigations.disabled().iter().map(|m| m.name().to_string()).collect(),
                            passed,
                            total: 1,
                            results: vec![r],
                        }
                    }
                    None => run_all(options),
                };
                let md = report.to_markdown();
                let js = serde_json::to_string_pretty(&report).expect("report serializes");
                if let Some(p) = markdown {
                    std::fs::write(p, &md).map_err(|e| io_failure(p, e))?;
                }
                if let Some(p) = report_json {
                    std::fs::write(p, format!("{js}\n")).map_err(|e| io_failure(p, e))?;
                }
                let v = serde_json::to_value(&report).expect("report serializes");
                self.emit(&md, v)?;
                return Ok(if report.all_passed() { 0 } else { 1 });
            }
            Command::GasReport { csv } => {
                let schedule = self.settings.engine.schedule.clone();
                let report = match &self.cli.chain {
                    Some(_) => gas_report(self.open_engine()?.chain().blocks(), &schedule),
                    None => schedule_report(&schedule),
                };
                if let Some(p) = csv {
                    std::fs::write(p, report.to_csv()).map_err(|e| io_failure(p, e))?;
                }
                let v = serde_json::to_value(&report).expect("report serializes");
                self.emit(&report.to_text(), v)?;
            }
            Command::VerifyChain => {
                let path = self.chain_path()?;
                let chain = load_chain(path, self.settings.engine.hash)?;
                let report = chain.verify();
                let txs = chain.transactions().count();
                if report.ok {
                    let text = format!("OK ({} blocks, {txs} transactions)\n", chain.len());
                    self.emit(&text, json!({"ok": true, "blocks": chain.len(), "transactions": txs}))?;
                } else {
                    let failure = report.failure.map(|f| format!("{f:?}")).unwrap_or_default();
                    let index = report.first_bad_index.unwrap_or(0);
                    let text = format!("FAILED at block {index}: {failure}\n");
                    self.emit(&text, json!({"ok": false, "first_bad_index": index, "failure": failure}))?;
                    return Ok(1);
                }
            }
            Command::ReplayTable4 => {
                let r = replay_table4();
                let v = serde_json::to_value(&r).expect("replay serializes");
                self.emit(&exports::table4_text(&r), v)?;
            }
        }
        Ok(0)
    }
}

/// Runs one invocation. `env_config` stands in for `$ZTCHAIN_CONFIG`.
pub fn dispatch_with<I, T>(argv: I, env_config: Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let overrides = Overrides { seed: cli.seed, jit_threshold_ms: cli.jit_threshold_ms, disable: cli.disable.clone() };
    let result = config::resolve(config::config_path(cli.config.as_deref(), env_config), &overrides)
        .map_err(Failure::from)
        .and_then(|settings| Ctx { cli: &cli, settings, out }.run());
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Domain { code, message }) => {
            let _ = writeln!(err, "{code}: {message}");
            1
        }
    }
}

pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(CONFIG_ENV).ok();
    dispatch_with(argv, env, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
