use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::rng::{stream, streams};

use super::{Distribution, SimConfig, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Availability {
    pub offered: u64,
    pub served: u64,
    pub dropped: u64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloodReport {
    pub multiplier: f64,
    pub arrival_rate_rps: f64,
    pub window_ms: f64,
    pub node_count: u32,
    pub queue_capacity: u32,
    pub perimeter: Availability,
    pub zero_trust: Availability,
}

/// Open-loop arrival times in microseconds over the flood window.
fn arrivals(config: &SimConfig, rate_rps: f64) -> Vec<u64> {
    let mut rng = stream(config.seed, streams::ARRIVALS);
    let window_us = (config.flood.window_ms * 1000.0) as u64;
    let max_gap = ((2.0e6 / rate_rps).round() as u64).max(1);
    let mut out = Vec::new();
    let mut t = 0u64;
    loop {
        t += rng.random_range(0..=max_gap);
        if t >= window_us {
            return out;
        }
        out.push(t);
    }
}

/// FIFO stations with `capacity` waiting slots each. A request that finds
/// its station full is dropped.
fn stations(config: &SimConfig, arrivals: &[u64], count: u32, service: Distribution) -> Availability {
    let mut svc = stream(config.seed, streams::SERVICE);
    let mut route = stream(config.seed, streams::ROUTING);
    let limit = config.flood.queue_capacity as usize + 1;
    let mut in_system: Vec<VecDeque<u64>> = vec![VecDeque::new(); count as usize];
    let mut served = 0u64;
    for &a in arrivals {
        let station = if count > 1 { route.random_range(0..count as usize) } else { 0 };
        let q = &mut in_system[station];
        while q.front().is_some_and(|&d| d <= a) {
            q.pop_front();
        }
        if q.len() >= limit {
            continue;
        }
        let start = q.back().copied().unwrap_or(a).max(a);
        q.push_back(start + service.sample_us(&mut svc));
        served += 1;
    }
    let offered = arrivals.len() as u64;
    Availability {
        offered,
        served,
        dropped: offered - served,
        success_rate: if offered == 0 { 1.0 } else { served as f64 / offered as f64 },
    }
}

/// Floods both architectures with `multiplier` times the base request rate.
/// The perimeter has one central server; zero-trust spreads the same
/// arrivals over `node_count` intake nodes with identical service times.
pub fn dos_flood(config: &SimConfig, multiplier: f64) -> Result<FloodReport, SimError> {
    config.validate()?;
    if !(multiplier.is_finite() && multiplier >= 1.0) {
        return Err(SimError::Config(format!("flood multiplier must be at least 1, got {multiplier}")));
    }
    let rate = config.flood.base_rate_rps * multiplier;
    let offered = arrivals(config, rate);
    let service = config.latency.central_lookup;
    Ok(FloodReport {
        multiplier,
        arrival_rate_rps: rate,
        window_ms: config.flood.window_ms,
        node_count: config.node_count,
        queue_capacity: config.flood.queue_capacity,
        perimeter: stations(config, &offered, 1, service),
        zero_trust: stations(config, &offered, config.node_count, service),
    })
}
