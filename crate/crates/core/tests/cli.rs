//! End-to-end runs of the `ncorlicz` binary.

use std::process::{Command, Output};

use ncorlicz::report::VerificationReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncorlicz")).args(args).output().expect("binary runs")
}

#[test]
fn indices_reports_known_values() {
    let out = run(&["indices", "--phi", "powerlog:a=1.2,b=0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["p_phi"].as_f64().unwrap() - 1.2).abs() < 5e-2);
    assert!((v["q_phi"].as_f64().unwrap() - 1.7).abs() < 5e-2);
}

#[test]
fn delta2_for_power() {
    let out = run(&["delta2", "--phi", "power:p=3"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["delta2"].as_f64().unwrap() - 8.0).abs() < 1e-9);
}

#[test]
fn malformed_phi_names_the_token() {
    let out = run(&["indices", "--phi", "powerlog:a=1.2,c=0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`c`"));
}

#[test]
fn regime_gate_exits_two() {
    let out = run(&["verify", "bg", "--phi", "powerlog:a=1.5,b=1", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no information"));
}

#[test]
fn identity_transform_is_exact_and_round_trips() {
    let out = run(&["verify", "transform", "--phi", "power:p=2", "--alpha", "ones", "--dim", "8", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let report: VerificationReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.samples.iter().all(|s| s.ratio == Some(1.0)));
    assert_eq!(report.pass, Some(true));
    assert!(report.is_consistent());
    let again = serde_json::to_vec_pretty(&report).unwrap();
    let reparsed: VerificationReport = serde_json::from_slice(&again).unwrap();
    assert_eq!(reparsed, report);
}

#[test]
fn ensemble_reports_round_trip_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = run(&[
        "ensemble", "--which", "stein,khintchine", "--phi", "power:p=3", "--samples", "4", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let reports: Vec<VerificationReport> = serde_json::from_value(v["reports"].clone()).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(VerificationReport::is_consistent));
    assert!(v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn ensemble_failure_is_reported_and_siblings_run() {
    let out = run(&["ensemble", "--which", "transform,bg", "--phi", "power:p=2", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 1);
    assert_eq!(v["failures"][0]["inequality"], "bg");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"phi":"power:p=3","samples":3,"seed":1,"filtration":{"model":"tensor","factors":2}}"#)
        .unwrap();
    let out = run(&["verify", "bg", "--config", cfg.to_str().unwrap(), "--samples", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let report: VerificationReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.samples.len(), 5);
    assert_eq!(report.config["filtration"]["factors"], 2);
}

#[test]
fn csv_output() {
    let out = run(&["verify", "stein", "--phi", "power:p=2", "--samples", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(&reader.headers().unwrap()[0], "inequality");
    assert_eq!(reader.records().count(), 6);
}

#[test]
fn interpolate_subcommand() {
    let out = run(&["interpolate", "--op", "stein-row", "--phi", "powerlog:a=1.2,b=0.5", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let report: VerificationReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.pass, Some(true));
    let out = run(&["interpolate", "--op", "warp", "--phi", "power:p=2"]);
    assert_eq!(out.status.code(), Some(2));
}
