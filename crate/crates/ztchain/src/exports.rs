//! CSV and JSON renderings of simulation, gas and threat results.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use ztchain_core::sim::{FloodReport, MetricsReport, Table4Replay};

fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

#[derive(Serialize)]
struct RequestRow {
    request: usize,
    latency_ms: f64,
}

#[derive(Serialize)]
struct ThroughputRow {
    completed: u64,
    completion_ms: f64,
    throughput_rps: f64,
}

/// One row per request, in issue order.
pub fn requests_csv(report: &MetricsReport) -> String {
    csv_string(
        report.per_request_latency_ms.iter().enumerate().map(|(i, &l)| RequestRow { request: i + 1, latency_ms: l }),
    )
}

/// Running throughput after each completion.
pub fn throughput_csv(report: &MetricsReport) -> String {
    csv_string(report.throughput_series().into_iter().zip(&report.completion_ms).map(|((k, tp), &t)| ThroughputRow {
        completed: k,
        completion_ms: t,
        throughput_rps: tp,
    }))
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub mode: Option<&'static str>,
    pub seed: Option<u64>,
    pub requests: usize,
    pub average_latency_ms: f64,
    pub avg_time_per_request_ms: f64,
    pub throughput_rps: f64,
    pub served: u64,
    pub dropped: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flood: Option<&'a FloodReport>,
}

pub fn summary<'a>(report: &MetricsReport, flood: Option<&'a FloodReport>) -> Summary<'a> {
    Summary {
        mode: report.mode.map(|m| m.as_str()),
        seed: report.seed,
        requests: report.per_request_latency_ms.len(),
        average_latency_ms: report.average_latency_ms,
        avg_time_per_request_ms: report.avg_time_per_request_ms,
        throughput_rps: report.throughput_rps,
        served: report.served,
        dropped: report.dropped,
        flood,
    }
}

pub fn summary_text(report: &MetricsReport) -> String {
    format!(
        "mode {} seed {}\nrequests {} served {} dropped {}\naverage latency {:.2} ms\ntime per request {:.2} ms\nthroughput {:.2} req/s\n",
        report.mode.map_or("-", |m| m.as_str()),
        report.seed.map_or_else(|| "-".to_string(), |s| s.to_string()),
        report.per_request_latency_ms.len(),
        report.served,
        report.dropped,
        report.average_latency_ms,
        report.avg_time_per_request_ms,
        report.throughput_rps,
    )
}

pub fn flood_text(r: &FloodReport) -> String {
    format!(
        "flood x{} ({:.0} req/s over {:.0} ms, {} arrivals)\nperimeter  served {:>5} dropped {:>5} success {:>6.2}%\nzero-trust served {:>5} dropped {:>5} success {:>6.2}%\n",
        r.multiplier,
        r.arrival_rate_rps,
        r.window_ms,
        r.perimeter.offered,
        r.perimeter.served,
        r.perimeter.dropped,
        r.perimeter.success_rate * 100.0,
        r.zero_trust.served,
        r.zero_trust.dropped,
        r.zero_trust.success_rate * 100.0,
    )
}

/// Writes `requests.csv`, `summary.json`, `latency_series.csv` and
/// `throughput_series.csv` into `dir`.
pub fn write_simulation(dir: &Path, report: &MetricsReport, flood: Option<&FloodReport>) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let requests = requests_csv(report);
    fs::write(dir.join("requests.csv"), &requests)?;
    fs::write(dir.join("latency_series.csv"), requests)?;
    fs::write(dir.join("throughput_series.csv"), throughput_csv(report))?;
    let json = serde_json::to_string_pretty(&summary(report, flood)).map_err(io::Error::other)?;
    fs::write(dir.join("summary.json"), json + "\n")
}

pub fn table4_text(r: &Table4Replay) -> String {
    let mut out = String::from("mode             rows  mean latency ms  stated   time/request ms  throughput req/s  stated\n");
    for c in [&r.dapp, &r.web] {
        out += &format!(
            "{:<16} {:>4}  {:>15.2}  {:>6.2}   {:>15.2}  {:>16.2}  {:>6.2}\n",
            c.label,
            c.metrics.per_request_latency_ms.len(),
            c.metrics.average_latency_ms,
            c.stated_average_latency_ms,
            c.metrics.avg_time_per_request_ms,
            c.metrics.throughput_rps,
            c.stated_throughput_rps,
        );
    }
    for d in &r.discrepancies {
        out += &format!(
            "DISCREPANCY {} {}: computed {:.2} from the table rows, stated {:.2}\n",
            d.label, d.quantity, d.computed, d.stated
        );
    }
    out
}
