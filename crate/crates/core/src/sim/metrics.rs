use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{SimError, SimMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: Option<SimMode>,
    pub seed: Option<u64>,
    pub per_request_latency_ms: Vec<f64>,
    /// Time from the start of the run until each request finished, in
    /// completion order.
    pub completion_ms: Vec<f64>,
    pub average_latency_ms: f64,
    pub avg_time_per_request_ms: f64,
    pub throughput_rps: f64,
    pub served: u64,
    pub dropped: u64,
}

impl MetricsReport {
    /// Running throughput after each completion.
    pub fn throughput_series(&self) -> Vec<(u64, f64)> {
        self.completion_ms
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let k = i as u64 + 1;
                (k, if t > 0.0 { 1000.0 * k as f64 / t } else { 0.0 })
            })
            .collect()
    }
}

/// Builds a report from raw per-request latencies and completion times.
/// The time per request is the last completion divided by the number of
/// completions; the order of either list does not matter.
pub fn compute_metrics(latencies_ms: &[f64], completion_ms: &[f64]) -> Result<MetricsReport, SimError> {
    if latencies_ms.is_empty() || completion_ms.is_empty() {
        return Err(SimError::EmptyInput);
    }
    let average_latency_ms = latencies_ms.iter().sum::<f64>() / latencies_ms.len() as f64;
    let makespan = completion_ms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let avg_time_per_request_ms = makespan / completion_ms.len() as f64;
    Ok(MetricsReport {
        mode: None,
        seed: None,
        per_request_latency_ms: latencies_ms.to_vec(),
        completion_ms: completion_ms.to_vec(),
        average_latency_ms,
        avg_time_per_request_ms,
        throughput_rps: 1000.0 / avg_time_per_request_ms,
        served: completion_ms.len() as u64,
        dropped: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DAPP_CUMULATIVE: [f64; 10] = [32.0, 65.0, 97.5, 130.0, 162.5, 195.0, 227.5, 260.0, 292.5, 325.0];
    const WEB_CUMULATIVE: [f64; 10] = [20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0, 160.0, 180.0, 200.0];
    const DAPP_LATENCY: [f64; 10] = [86.0, 79.0, 99.0, 77.0, 31.0, 52.0, 69.0, 63.0, 27.0, 62.0];

    #[test]
    fn reference_table_throughput() {
        let dapp = compute_metrics(&DAPP_LATENCY, &DAPP_CUMULATIVE).unwrap();
        assert!((dapp.throughput_rps - 30.77).abs() <= 0.01);
        assert_eq!(dapp.avg_time_per_request_ms, 32.5);
        assert!((dapp.average_latency_ms - 64.5).abs() < 1e-12);
        let web = compute_metrics(&[1.0], &WEB_CUMULATIVE).unwrap();
        assert!((web.throughput_rps - 50.0).abs() <= 0.01);
    }

    #[test]
    fn empty_input() {
        assert_eq!(compute_metrics(&[], &[1.0]), Err(SimError::EmptyInput));
        assert_eq!(compute_metrics(&[1.0], &[]), Err(SimError::EmptyInput));
    }

    proptest! {
        #[test]
        fn invariants_hold_and_order_is_irrelevant(
            pairs in proptest::collection::vec((0.1f64..500.0, 0.1f64..1e6), 1..60),
            rot in 0usize..60,
        ) {
            let (lat, done): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let r = compute_metrics(&lat, &done).unwrap();
            prop_assert!((r.throughput_rps * r.avg_time_per_request_ms - 1000.0).abs() < 1e-6);
            let mean = lat.iter().sum::<f64>() / lat.len() as f64;
            prop_assert!((r.average_latency_ms - mean).abs() < 1e-9);

            let k = rot % lat.len();
            let (mut lat2, mut done2) = (lat.clone(), done.clone());
            lat2.rotate_left(k);
            done2.reverse();
            let r2 = compute_metrics(&lat2, &done2).unwrap();
            prop_assert!((r.average_latency_ms - r2.average_latency_ms).abs() < 1e-9);
            prop_assert_eq!(r.throughput_rps, r2.throughput_rps);
        }
    }
}
