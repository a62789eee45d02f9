use std::fs;
use std::path::Path;
use std::process::Command;

use ztchain::dispatch_with;

const ALICE_DEVICE: [&str; 14] = [
    "--lat", "40.712776", "--lon", "-74.005974", "--browser", "Chrome 126.0", "--ip", "10.20.0.11", "--os-name",
    "Windows", "--os-version", "11 23H2", "--mac", "3C:52:82:1A:7F:01",
];

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Out {
    run_env(args, None)
}

fn run_env(args: &[&str], env: Option<String>) -> Out {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("ztchain").chain(args.iter().copied());
    let code = dispatch_with(argv, env, &mut out, &mut err);
    Out { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn with_chain<'a>(chain: &'a str, args: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["--chain", chain];
    v.extend_from_slice(args);
    v
}

fn enroll_alice(chain: &str) {
    let mut args = with_chain(chain, &["register", "--email", "alice@x", "--password", "pw"]);
    args.extend_from_slice(&ALICE_DEVICE);
    assert_eq!(run(&args).code, 0);
    let r = run(&with_chain(
        chain,
        &["assign-role", "--email", "alice@x", "--role", "Customer_Support", "--description", "Access to customer transaction histories"],
    ));
    assert_eq!(r.code, 0, "{}", r.stderr);
}

fn chain_in(dir: &Path) -> String {
    dir.join("c.chain.jsonl").to_str().unwrap().to_string()
}

#[test]
fn wrong_password_exits_one_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let chain = chain_in(dir.path());
    enroll_alice(&chain);
    let mut args = with_chain(&chain, &["login", "--email", "alice@x", "--password", "nope"]);
    args.extend_from_slice(&ALICE_DEVICE);
    let r = run(&args);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("Invalid password."), "{}", r.stderr);

    // The rejection itself is on the ledger.
    let text = fs::read_to_string(&chain).unwrap();
    assert!(text.contains("\"error_code\":\"INVALID_PASSWORD\""));
    assert_eq!(run(&with_chain(&chain, &["verify-chain"])).code, 0);
}

#[test]
fn login_succeeds_then_verify_ok() {
    let dir = tempfile::tempdir().unwrap();
    let chain = chain_in(dir.path());
    enroll_alice(&chain);
    let mut args = with_chain(&chain, &["--json", "login", "--email", "alice@x", "--password", "pw"]);
    args.extend_from_slice(&ALICE_DEVICE);
    let r = run(&args);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!(v["ok"], true);

    let r = run(&with_chain(&chain, &["verify-chain"]));
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("OK"));
}

#[test]
fn tampered_chain_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let chain = chain_in(dir.path());
    enroll_alice(&chain);
    let text = fs::read_to_string(&chain).unwrap();
    fs::write(&chain, text.replace("Customer_Support", "Administrator")).unwrap();
    let r = run(&with_chain(&chain, &["verify-chain"]));
    assert_eq!(r.code, 1);
    assert!(r.stdout.starts_with("FAILED"), "{}", r.stdout);

    fs::write(&chain, "not json\n").unwrap();
    let r = run(&with_chain(&chain, &["verify-chain"]));
    assert_eq!(r.code, 1);
    assert!(r.stderr.starts_with("FORMAT_ERROR"));
}

#[test]
fn non_owner_role_change_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let chain = chain_in(dir.path());
    enroll_alice(&chain);
    let r = run(&with_chain(
        &chain,
        &["assign-role", "--email", "alice@x", "--role", "Admin", "--description", "all", "--caller", "0x00000000000000000000000000000000c4a411e0"],
    ));
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("NOT_OWNER"));
}

#[test]
fn jit_window_halts_after_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let chain = chain_in(dir.path());
    let target = "0x00000000000000000000000000000000a0d17000";
    let c = |args: &[&str]| run(&with_chain(&chain, args));
    assert_eq!(c(&["--jit-threshold-ms", "500", "jit-start", "--target", target, "--time-ms", "100"]).code, 0);
    let r = c(&["--json", "jit-check", "--target", target, "--time-ms", "600", "--terminate"]);
    let v: serde_json::Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!((v["overtime"].as_bool(), v["termination"].as_str()), (Some(false), Some("within_window")));
    let r = c(&["--json", "jit-check", "--target", target, "--time-ms", "601", "--terminate"]);
    let v: serde_json::Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!((v["overtime"].as_bool(), v["termination"].as_str()), (Some(true), Some("halted")));
}

#[test]
fn threats_all_reports_seven_rows() {
    let dir = tempfile::tempdir().unwrap();
    let md = dir.path().join("threats.md");
    let js = dir.path().join("threats.json");
    let r = run(&["threats", "--all", "--markdown", md.to_str().unwrap(), "--report-json", js.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let rows = r.stdout.lines().filter(|l| l.starts_with("| T-")).count();
    assert_eq!(rows, 7);
    assert!(fs::read_to_string(md).unwrap().contains("7/7"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(js).unwrap()).unwrap();
    assert_eq!(v["passed"], 7);

    let r = run(&["--disable", "device-check", "threats", "--all"]);
    assert_eq!(r.code, 1);
    let r = run(&["threats", "--id", "T-9"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("UNKNOWN_SCENARIO"));
}

#[test]
fn simulate_is_reproducible_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let args = ["--seed", "3", "--json", "simulate", "--requests", "200", "--out-dir", out.to_str().unwrap()];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(a.stdout.trim()).unwrap();
    assert_eq!(v["mode"], "ZERO_TRUST");
    assert_eq!(v["requests"], 200);
    let csv = fs::read_to_string(out.join("requests.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);

    let r = run(&["simulate", "--requests", "0"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.starts_with("CONFIG_ERROR"));
}

#[test]
fn config_file_and_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"simulation": {"mode": "PERIMETER", "request_count": 30}}"#).unwrap();
    let r = run_env(&["--json", "simulate"], Some(cfg.to_str().unwrap().to_string()));
    let v: serde_json::Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!((v["mode"].as_str(), v["requests"].as_u64()), (Some("PERIMETER"), Some(30)));

    let r = run_env(&["--json", "simulate", "--mode", "zero-trust"], Some(cfg.to_str().unwrap().to_string()));
    let v: serde_json::Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!(v["mode"], "ZERO_TRUST");

    let r = run_env(&["simulate"], Some(dir.path().join("missing.json").to_str().unwrap().to_string()));
    assert_eq!(r.code, 1);
    assert!(r.stderr.starts_with("IO_ERROR"));
}

#[test]
fn gas_report_and_table_replay() {
    let r = run(&["gas-report"]);
    assert_eq!(r.code, 0);
    for n in ["42220", "44313", "24194", "245956", "219332", "253556", "419174", "2275063", "1.4 %", "7.6 %"] {
        assert!(r.stdout.contains(n), "missing {n}");
    }
    let r = run(&["replay-table4"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("30.77") && r.stdout.contains("50.00"));
    assert_eq!(r.stdout.matches("DISCREPANCY").count(), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["login", "--email"]).code, 2);
    assert_eq!(run(&["verify-chain"]).code, 2);
    assert_eq!(run(&["--disable", "moat", "threats"]).code, 2);
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("replay-table4"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ztchain");
    let ok = Command::new(bin).arg("replay-table4").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin).arg("nope").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}
