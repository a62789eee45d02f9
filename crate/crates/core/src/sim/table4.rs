use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::format;

use serde::{Deserialize, Serialize};

use super::{compute_metrics, MetricsReport, SimError, SimMode};

pub const TABLE4_CSV: &str = include_str!("../../resources/table4.csv");

/// Averages printed alongside the reference table.
const STATED: [(SimMode, f64, f64); 2] = [(SimMode::ZeroTrust, 74.0, 30.77), (SimMode::Perimeter, 49.33, 50.0)];
const TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table4Row {
    pub request: u32,
    pub dapp_latency_ms: f64,
    pub web_latency_ms: f64,
    pub dapp_cumulative_ms: f64,
    pub web_cumulative_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub label: String,
    pub mode: SimMode,
    pub metrics: MetricsReport,
    pub stated_average_latency_ms: f64,
    pub stated_throughput_rps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub label: String,
    pub quantity: String,
    pub computed: f64,
    pub stated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table4Replay {
    pub rows: Vec<Table4Row>,
    pub dapp: ModeComparison,
    pub web: ModeComparison,
    pub discrepancies: Vec<Discrepancy>,
}

pub fn parse_table4(text: &str) -> Result<Vec<Table4Row>, SimError> {
    let bad = |line: usize, why: &str| SimError::Config(format!("table fixture line {line}: {why}"));
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1).filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 5 {
            return Err(bad(i + 1, "expected 5 columns"));
        }
        let num = |j: usize| cells[j].parse::<f64>().map_err(|_| bad(i + 1, "not a number"));
        rows.push(Table4Row {
            request: cells[0].parse().map_err(|_| bad(i + 1, "bad request number"))?,
            dapp_latency_ms: num(1)?,
            web_latency_ms: num(2)?,
            dapp_cumulative_ms: num(3)?,
            web_cumulative_ms: num(4)?,
        });
    }
    Ok(rows)
}

fn comparison(label: &str, mode: SimMode, lat: &[f64], cum: &[f64]) -> ModeComparison {
    let (_, stated_lat, stated_tp) = STATED.iter().copied().find(|s| s.0 == mode).expect("both modes listed");
    let mut metrics = compute_metrics(lat, cum).expect("fixture is non-empty");
    metrics.mode = Some(mode);
    ModeComparison {
        label: label.to_string(),
        mode,
        metrics,
        stated_average_latency_ms: stated_lat,
        stated_throughput_rps: stated_tp,
    }
}

fn flag(c: &ModeComparison, out: &mut Vec<Discrepancy>) {
    let pairs = [
        ("average_latency_ms", c.metrics.average_latency_ms, c.stated_average_latency_ms),
        ("throughput_rps", c.metrics.throughput_rps, c.stated_throughput_rps),
    ];
    for (quantity, computed, stated) in pairs {
        if (computed - stated).abs() > TOLERANCE {
            out.push(Discrepancy { label: c.label.clone(), quantity: quantity.to_string(), computed, stated });
        }
    }
}

/// Recomputes both columns of the bundled reference table and flags every
/// printed average that its own rows do not reproduce.
pub fn replay_table4() -> Table4Replay {
    let rows = parse_table4(TABLE4_CSV).expect("bundled fixture parses");
    let col = |f: fn(&Table4Row) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let dapp = comparison("DApp", SimMode::ZeroTrust, &col(|r| r.dapp_latency_ms), &col(|r| r.dapp_cumulative_ms));
    let web = comparison("Web application", SimMode::Perimeter, &col(|r| r.web_latency_ms), &col(|r| r.web_cumulative_ms));
    let mut discrepancies = Vec::new();
    flag(&dapp, &mut discrepancies);
    flag(&web, &mut discrepancies);
    Table4Replay { rows, dapp, web, discrepancies }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_has_ten_rows() {
        let r = replay_table4();
        assert_eq!(r.rows.len(), 10);
        assert_eq!(r.dapp.metrics.per_request_latency_ms.len(), 10);
        assert_eq!(r.web.metrics.completion_ms.len(), 10);
    }

    #[test]
    fn throughput_and_flags() {
        let r = replay_table4();
        assert!((r.dapp.metrics.throughput_rps - 30.77).abs() <= 0.01);
        assert!((r.web.metrics.throughput_rps - 50.0).abs() <= 0.01);
        assert!((r.dapp.metrics.average_latency_ms - 64.5).abs() < 1e-9);
        assert!((r.web.metrics.average_latency_ms - 51.6).abs() < 1e-9);
        let flagged: Vec<_> = r.discrepancies.iter().map(|d| (d.label.as_str(), d.quantity.as_str(), d.stated)).collect();
        assert_eq!(
            flagged,
            [("DApp", "average_latency_ms", 74.0), ("Web application", "average_latency_ms", 49.33)]
        );
    }

    #[test]
    fn malformed_fixture_rejected() {
        assert!(parse_table4("h\n1,2,3\n").is_err());
        assert!(parse_table4("h\n1,a,3,4,5\n").is_err());
    }
}
