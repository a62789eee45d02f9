use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::engine::{EngineConfig, PolicyEngine};
use crate::fingerprint::DeviceInfo;
use crate::ledger::{AccountAddress, Chain};
use crate::rng::{stream, streams};

use super::queue::EventQueue;
use super::{compute_metrics, MetricsReport, SimConfig, SimError, SimMode};

/// Account that deploys the contracts in zero-trust runs.
pub const SIM_ADMIN: AccountAddress = AccountAddress::from_index(0xad);
pub const SIM_ROLE: &str = "Staff";

pub fn node_address(node: u32) -> AccountAddress {
    AccountAddress::from_index(0x1_0000 + u64::from(node))
}

pub fn node_email(node: u32) -> String {
    format!("node{node}@sim.local")
}

fn node_password(node: u32) -> String {
    format!("node{node}-pass")
}

/// Synthetic but distinct device for every node.
pub fn node_device(node: u32) -> DeviceInfo {
    let n = u64::from(node);
    DeviceInfo {
        latitude: -60.0 + (n * 37 % 120) as f64 + 0.25,
        longitude: -170.0 + (n * 53 % 340) as f64 + 0.5,
        browser: String::from("Firefox 128.0"),
        ip: format!("10.{}.{}.{}", (n >> 16) & 0xff, (n >> 8) & 0xff, n & 0xff),
        os_name: String::from("Linux"),
        os_version: String::from("6.8"),
        mac: format!("02:00:00:{:02x}:{:02x}:{:02x}", (n >> 16) & 0xff, (n >> 8) & 0xff, n & 0xff),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TraceKind {
    Issued,
    Arrived,
    ServiceStart,
    Completed,
    Returned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time_us: u64,
    pub request: u64,
    pub kind: TraceKind,
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub report: MetricsReport,
    pub trace: Vec<TraceEvent>,
    /// Ledger produced by a zero-trust run.
    pub chain: Option<Chain>,
}

struct Loop<'a> {
    config: &'a SimConfig,
    queue: EventQueue<Event>,
    trace: Vec<TraceEvent>,
    net: Pcg32,
    svc: Pcg32,
    issued_at: Vec<u64>,
    next: u64,
}

impl Loop<'_> {
    fn note(&mut self, time_us: u64, request: u64, kind: TraceKind) {
        self.trace.push(TraceEvent { time_us, request, kind });
    }

    fn issue(&mut self, t: u64) {
        let req = self.next;
        self.next += 1;
        self.issued_at[req as usize] = t;
        self.note(t, req, TraceKind::Issued);
        let arrive = t + self.config.latency.network_hop.sample_us(&mut self.net);
        self.queue.push(arrive, Event::Arrive(req));
    }

    fn serve(&mut self, t: u64, req: u64) {
        self.note(t, req, TraceKind::ServiceStart);
        let lat = &self.config.latency;
        let service = match self.config.mode {
            SimMode::ZeroTrust => lat.contract_execution.sample_us(&mut self.svc) + lat.consensus_validation.sample_us(&mut self.svc),
            SimMode::Perimeter => lat.central_lookup.sample_us(&mut self.svc),
        };
        self.queue.push(t + service, Event::Done(req));
    }
}

enum Event {
    Arrive(u64),
    Done(u64),
    Return(u64),
}

struct Nodes {
    engine: PolicyEngine,
    checksums: Vec<(String, String)>,
}

fn enroll(config: &SimConfig) -> Result<Nodes, SimError> {
    let engine_config = EngineConfig { stakes: config.stake_table(), seed: config.seed, ..Default::default() };
    let mut engine = PolicyEngine::deploy(engine_config, SIM_ADMIN, 0)?;
    let mut checksums = Vec::with_capacity(config.node_count as usize);
    for node in 0..config.node_count {
        let device = node_device(node);
        let checksum = device.checksum().map_err(|e| SimError::Config(format!("node {node}: {e}")))?;
        let email = node_email(node);
        engine.register(node_address(node), &email, &node_password(node), &checksum, &device.mac, 0).result?;
        engine.assign_role(SIM_ADMIN, &email, SIM_ROLE, "Routine authentication traffic", 0).result?;
        checksums.push((checksum, device.mac));
    }
    engine.seal(0)?;
    Ok(Nodes { engine, checksums })
}

/// Runs the closed-loop workload and returns metrics, the event trace and
/// (in zero-trust mode) the resulting ledger.
pub fn simulate(config: &SimConfig) -> Result<SimRun, SimError> {
    config.validate()?;
    let mut nodes = match config.mode {
        SimMode::ZeroTrust => Some(enroll(config)?),
        SimMode::Perimeter => None,
    };
    let n = config.request_count;
    let mut st = Loop {
        config,
        queue: EventQueue::new(),
        trace: Vec::new(),
        net: stream(config.seed, streams::NETWORK),
        svc: stream(config.seed, streams::SERVICE),
        issued_at: vec![0; n as usize],
        next: 0,
    };
    let mut latency_ms = vec![0.0; n as usize];
    let mut completion_ms = Vec::with_capacity(n as usize);
    let mut waiting = VecDeque::new();
    let mut busy = false;

    for _ in 0..u64::from(config.clients).min(n) {
        st.issue(0);
    }
    while let Some((t, event)) = st.queue.pop() {
        match event {
            Event::Arrive(req) => {
                st.note(t, req, TraceKind::Arrived);
                if busy {
                    waiting.push_back(req);
                } else {
                    busy = true;
                    st.serve(t, req);
                }
            }
            Event::Done(req) => {
                st.note(t, req, TraceKind::Completed);
                if let Some(nodes) = nodes.as_mut() {
                    let node = (req % u64::from(config.node_count)) as u32;
                    let (checksum, mac) = &nodes.checksums[node as usize];
                    let now = t / 1000;
                    let email = node_email(node);
                    nodes.engine.login(node_address(node), &email, &node_password(node), checksum, mac, now).result?;
                    nodes.engine.seal(now)?;
                }
                match waiting.pop_front() {
                    Some(queued) => st.serve(t, queued),
                    None => busy = false,
                }
                let back = t + config.latency.network_hop.sample_us(&mut st.net);
                st.queue.push(back, Event::Return(req));
            }
            Event::Return(req) => {
                st.note(t, req, TraceKind::Returned);
                latency_ms[req as usize] = (t - st.issued_at[req as usize]) as f64 / 1000.0;
                completion_ms.push(t as f64 / 1000.0);
                if st.next < n {
                    st.issue(t);
                }
            }
        }
    }

    let mut report = compute_metrics(&latency_ms, &completion_ms)?;
    report.mode = Some(config.mode);
    report.seed = Some(config.seed);
    Ok(SimRun { report, trace: st.trace, chain: nodes.map(|n| n.engine.into_chain()) })
}

pub fn run_simulation(config: &SimConfig) -> Result<MetricsReport, SimError> {
    simulate(config).map(|run| run.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(mode: SimMode, requests: u64, seed: u64) -> SimConfig {
        SimConfig { mode, request_count: requests, seed, ..Default::default() }
    }

    #[test]
    fn zero_requests_rejected() {
        assert!(matches!(run_simulation(&config(SimMode::ZeroTrust, 0, 1)), Err(SimError::Config(_))));
    }

    #[test]
    fn deterministic_under_seed() {
        let a = simulate(&config(SimMode::ZeroTrust, 60, 9)).unwrap();
        let b = simulate(&config(SimMode::ZeroTrust, 60, 9)).unwrap();
        assert_eq!(serde_json::to_string(&a.report).unwrap(), serde_json::to_string(&b.report).unwrap());
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.chain, b.chain);
        let c = run_simulation(&config(SimMode::ZeroTrust, 60, 10)).unwrap();
        assert_ne!(a.report, c);
    }

    #[test]
    fn zero_trust_ledger_has_one_block_per_request() {
        let run = simulate(&config(SimMode::ZeroTrust, 40, 3)).unwrap();
        let chain = run.chain.unwrap();
        assert!(chain.verify().ok);
        let logins = chain.transactions().filter(|t| t.operation == "login" && t.is_accepted()).count();
        assert_eq!(logins, 40);
        let validators: alloc::collections::BTreeSet<_> = chain.blocks().iter().skip(1).map(|b| b.validator).collect();
        assert!(validators.len() > 10);
    }

    #[test]
    fn every_request_terminates_once() {
        for mode in [SimMode::ZeroTrust, SimMode::Perimeter] {
            let run = simulate(&config(mode, 120, 4)).unwrap();
            assert_eq!(run.report.served, 120);
            assert_eq!(run.report.dropped, 0);
            let returned = run.trace.iter().filter(|e| e.kind == TraceKind::Returned).count();
            assert_eq!(returned, 120);
            assert!(run.report.per_request_latency_ms.iter().all(|&l| l > 0.0));
        }
    }

    #[test]
    fn calibration_targets() {
        let zt = run_simulation(&config(SimMode::ZeroTrust, 1000, 7)).unwrap();
        let p = run_simulation(&config(SimMode::Perimeter, 1000, 7)).unwrap();
        assert!((zt.avg_time_per_request_ms - 32.5).abs() <= 3.25, "{}", zt.avg_time_per_request_ms);
        assert!((zt.throughput_rps - 30.77).abs() <= 3.077);
        assert!((p.avg_time_per_request_ms - 20.0).abs() <= 2.0, "{}", p.avg_time_per_request_ms);
        assert!((p.throughput_rps - 50.0).abs() <= 5.0);
        assert!(zt.average_latency_ms > p.average_latency_ms);
        assert!(zt.throughput_rps < p.throughput_rps);
    }
}
