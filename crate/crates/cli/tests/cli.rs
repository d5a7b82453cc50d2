use std::fs;
use std::process::{Command, Output};

fn smartfog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smartfog")).args(args).output().unwrap()
}

#[test]
fn simulate_writes_results_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(&config, "[workload]\nhorizon_ms = 30000.0\n").unwrap();
    let out = dir.path().join("out");
    let output = smartfog(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--sizes",
        "12,14",
        "--modes",
        "smartfog,unoptimized",
        "--reps",
        "2",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 2 * 2 * 2);
    assert!(results.lines().nth(1).unwrap().starts_with("SmartFog,12,5,"));
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 1 + 4);
}

#[test]
fn timing_only_flag_writes_timing_files() {
    let dir = tempfile::tempdir().unwrap();
    let output = smartfog(&["simulate", "--timing-only", "--sizes", "10", "--reps", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(output.status.success());
    assert_eq!(fs::read_to_string(dir.path().join("timing.csv")).unwrap().lines().count(), 4);
    assert!(dir.path().join("timing_summary.csv").exists());
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn select_and_cluster_emit_json() {
    let select = smartfog(&["select", "--devices", "15", "--seed", "3"]);
    assert!(select.status.success());
    let assignment: serde_json::Value = serde_json::from_slice(&select.stdout).unwrap();
    assert_eq!(assignment["gateways"].as_array().unwrap().len(), 2);

    let cluster = smartfog(&["cluster", "--devices", "15", "--seed", "3", "--areas", "memory"]);
    assert!(cluster.status.success());
    let areas: serde_json::Value = serde_json::from_slice(&cluster.stdout).unwrap();
    assert_eq!(areas[0]["area_type"], "memory_optimized");
    assert!(!areas[0]["members"].as_array().unwrap().is_empty());
}

#[test]
fn overlay_document_round_trips_through_select() {
    let dir = tempfile::tempdir().unwrap();
    let generated = smartfog(&["overlay", "--devices", "9", "--seed", "4"]);
    assert!(generated.status.success());
    let path = dir.path().join("overlay.json");
    fs::write(&path, &generated.stdout).unwrap();
    let from_file = smartfog(&["select", "--overlay", path.to_str().unwrap()]);
    let generated_directly = smartfog(&["select", "--devices", "9", "--seed", "4"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, generated_directly.stdout);
}

#[test]
fn invalid_configuration_fails_with_field_name() {
    let output = smartfog(&["simulate", "--reps", "0"]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("replications"));
    let output = smartfog(&["simulate", "--modes", "cloud"]);
    assert!(!output.status.success());
}
