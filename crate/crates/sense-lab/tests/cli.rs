//! End-to-end tests of the `sense-lab` binary: exit-code contract,
//! output-file inventory, run manifests, determinism across reruns, and
//! input-config immutability.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sense-lab"))
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("SENSE_LAB_SEED").output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("reading {name} from {}: {e}", dir.display()))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir, "manifest.json")).expect("valid manifest JSON")
}

// ── Exit codes ──

#[test]
fn unknown_subcommand_exits_two() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["sequences", "--out", tmp.path().to_str().unwrap(), "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_scenario_exits_one_and_names_the_waypoint() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(scenario_path("living_room.json")).unwrap())
            .unwrap();
    doc["target"]["waypoints"][1]["x"] = serde_json::json!(9.0);
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();

    let out_dir = tmp.path().join("out");
    let out = run(&[
        "simulate",
        "--scenario",
        bad.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("waypoint 1"), "stderr names the offender: {stderr}");
}

// ── sequences ──

#[test]
fn sequences_writes_the_full_inventory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["sequences", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for name in ["ce0.csv", "ce1.csv", "sync_correlation_matrix.csv"] {
        assert!(tmp.path().join(name).exists(), "{name} missing");
    }
    for r in 1..=8 {
        assert!(tmp.path().join(format!("sync_{r}.csv")).exists());
    }

    // Within-group rows are all-zero; the cross-group block is not.
    let matrix = read(tmp.path(), "sync_correlation_matrix.csv");
    let row1: Vec<&str> = matrix.lines().nth(1).unwrap().split(", ").collect();
    assert_eq!(&row1[1..5], &["0", "0", "0", "0"]);
    assert!(row1[5..].iter().all(|v| *v != "0"));

    // Every manifest output actually exists.
    let m = manifest(tmp.path());
    assert_eq!(m["command"], "sequences");
    for output in m["outputs"].as_array().unwrap() {
        assert!(tmp.path().join(output.as_str().unwrap()).exists());
    }
}

// ── simulate ──

#[test]
fn simulate_writes_trace_maps_and_detections() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--scenario",
        scenario_path("living_room.json").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
        "--snr_db",
        "20",
        "--seed",
        "7",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let trace = read(tmp.path(), "trace.jsonl");
    assert!(trace.lines().count() > 0);
    assert!(trace.lines().all(|l| l.starts_with("{\"t\":")));
    assert!(read(tmp.path(), "pdp.csv").starts_with("time_s, tap_index, delay_s, magnitude"));
    assert!(read(tmp.path(), "rda.csv").starts_with("doppler_hz, delay_s, magnitude"));
    assert!(read(tmp.path(), "detections.csv")
        .starts_with("range_m, doppler_hz, velocity_mps, magnitude, snr_estimate_db"));

    // The manifest snapshot carries the fully resolved scenario.
    let m = manifest(tmp.path());
    assert_eq!(m["config"]["scenario"]["carrier_hz"], 6.0e9);
    assert_eq!(m["seed"], 7);
}

// ── sweep determinism ──

fn run_sweep(dir: &Path) {
    let out = run(&[
        "sweep",
        "--scenario",
        scenario_path("living_room.json").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--snr",
        "0,10,20,30",
        "--trials",
        "20",
        "--seed",
        "7",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let tmp_a = tempfile::tempdir().unwrap();
    let tmp_b = tempfile::tempdir().unwrap();
    run_sweep(tmp_a.path());
    run_sweep(tmp_b.path());

    let a = read(tmp_a.path(), "curve.csv");
    let b = read(tmp_b.path(), "curve.csv");
    assert_eq!(a, b);
    assert!(a.starts_with("snr_db, rmse, miss_rate, trials"));
    assert_eq!(a.lines().count(), 5);
}

#[test]
fn env_seed_is_used_when_the_flag_is_absent() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "hist",
            "--scenario",
            scenario_path("living_room.json").to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
            "--trials",
            "1",
            "--samples",
            "2",
        ])
        .env("SENSE_LAB_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(manifest(tmp.path())["seed"], 99);
}

// ── Input immutability ──

#[test]
fn commands_do_not_mutate_their_input_config() {
    let before = std::fs::read(scenario_path("living_room.json")).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    run_sweep(tmp.path());
    let after = std::fs::read(scenario_path("living_room.json")).unwrap();
    assert_eq!(before, after);
}

// ── Manifest reproducibility ──

#[test]
fn manifest_snapshot_reproduces_the_run() {
    let tmp_a = tempfile::tempdir().unwrap();
    run_sweep(tmp_a.path());
    let m = manifest(tmp_a.path());

    // Re-issue the command from nothing but the manifest snapshot.
    let scenario = tmp_a.path().join("replay_scenario.json");
    std::fs::write(&scenario, serde_json::to_string(&m["config"]["scenario"]).unwrap()).unwrap();
    let snr_points: Vec<String> = m["config"]["snr"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap().to_string())
        .collect();
    let tmp_b = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        tmp_b.path().to_str().unwrap(),
        "--snr",
        &snr_points.join(","),
        "--trials",
        &m["config"]["trials"].to_string(),
        "--kind",
        m["config"]["kind"].as_str().unwrap(),
        "--seed",
        &m["seed"].to_string(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(tmp_a.path(), "curve.csv"), read(tmp_b.path(), "curve.csv"));
}
