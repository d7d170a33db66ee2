use std::path::Path;
use std::process::{Command, Output};

use adastream::instances::{fixtures, save};

fn adastream(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adastream")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn knapsack_file(dir: &Path) -> String {
    let path = dir.join("knapsack.json");
    save(&fixtures::canonical_knapsack(), &path).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn generate_then_run_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cov.json");
    let p = path.to_str().unwrap();
    let out = adastream(&["generate", "--generate", "coverage", "--n", "3", "--seed", "7", "--out", p]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = adastream(&["run", "--instance", p, "--policy", "threshold_uniform", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("order,expected_utility\n"));
    assert_eq!(csv.lines().filter(|l| l.chars().next().unwrap().is_ascii_digit()).count(), 6);
    assert!(csv.contains("\nguarantee,"));
}

#[test]
fn given_order_produces_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = knapsack_file(dir.path());
    let out = adastream(&[
        "run",
        "--instance",
        &p,
        "--policy",
        "threshold_knapsack",
        "--order",
        "given",
        "--permutation",
        "2,0,1",
    ]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = report["per_order"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["order"], serde_json::json!([2, 0, 1]));
    assert!((rows[0]["value"].as_f64().unwrap() - 1.4).abs() < 1e-9);
    assert!((report["oracle_value"].as_f64().unwrap() - 2.55).abs() < 1e-9);
}

#[test]
fn verify_reports_overshoot_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = knapsack_file(dir.path());
    let out = adastream(&["verify", "--instance", &p]);
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("proposition1"), "{stderr}");
    let out = adastream(&["verify", "--instance", &p, "--skip", "proposition1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_flags_counterexample() {
    let out = adastream(&[
        "verify",
        "--generate",
        "table_counterexample",
        "--property",
        "adaptive_monotone",
        "--skip",
        "proposition1",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("adaptive_monotone"));
}

#[test]
fn manual_v_without_matching_bounds_is_unverified() {
    let dir = tempfile::tempdir().unwrap();
    let p = knapsack_file(dir.path());
    let out = adastream(&[
        "run",
        "--instance",
        &p,
        "--policy",
        "mixed_singleton",
        "--v-mode",
        "manual",
        "--v",
        "0.1",
        "--alpha",
        "0.5",
        "--beta",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["guarantee"]["status"], "unverified bounds");
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(code(&adastream(&["run", "--generate", "coverage", "--policy", "no_such_policy"])), 2);
    assert_eq!(
        code(&adastream(&["run", "--generate", "coverage", "--policy", "threshold_uniform", "--order", "given"])),
        2
    );
    assert_eq!(code(&adastream(&["run", "--instance", "/nonexistent/x.json", "--policy", "threshold_uniform"])), 2);
    assert_eq!(code(&adastream(&["frobnicate"])), 2);
}

#[test]
fn caps_exit_3() {
    let out =
        adastream(&["run", "--generate", "coverage", "--n", "6", "--policy", "threshold_uniform", "--cap-orders", "5"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_instance_exits_4_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"items":[{"id":"x","cost":1}]}"#).unwrap();
    let out = adastream(&["run", "--instance", path.to_str().unwrap(), "--policy", "threshold_uniform"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("items[0].id"));
}

#[test]
fn oracle_prints_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let p = knapsack_file(dir.path());
    let out = adastream(&["oracle", "--instance", &p]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.to_string().contains("2.55"));
}
