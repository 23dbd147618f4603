use std::process::Command;

use serde_json::Value;

fn sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deepie-sim"))
}

#[test]
fn simulate_then_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.json");
    let status = sim()
        .args(["simulate", "--generator", "procedural", "--target", "latent:2", "--generations", "6", "--k", "3"])
        .args(["--schedule", "linear:0.5:0.1", "--seeds", "4", "--canvas", "16x16", "--out"])
        .arg(&results)
        .status()
        .unwrap();
    assert!(status.success());
    let parsed: Value = serde_json::from_str(&std::fs::read_to_string(&results).unwrap()).unwrap();
    assert_eq!(parsed["trajectories"].as_array().unwrap().len(), 4);
    assert_eq!(parsed["config"]["generations"], 6);

    let csv = dir.path().join("hist.csv");
    let out = sim().args(["summarize", "--in"]).arg(&results).args(["--hist", "bins=5", "--csv"]).arg(&csv).output().unwrap();
    assert!(out.status.success());
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["runs"], 4);
    assert_eq!(summary["histogram"].as_array().unwrap().len(), 5);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 6);
}

#[test]
fn invalid_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let run = |args: &[&str]| sim().arg("simulate").args(args).arg("--out").arg(&out).output().unwrap();
    assert!(!run(&["--generations", "0"]).status.success());
    assert!(!run(&["--k", "0"]).status.success());
    assert!(!run(&["--schedule", "linear:0.5:1.5"]).status.success());
    assert!(!run(&["--target", "latent:x"]).status.success());
    assert!(!run(&["--generator", "/nonexistent.diew"]).status.success());
    assert!(!out.exists());
    let bad_hist = sim().args(["summarize", "--in", "/nonexistent.json", "--hist", "bins=3"]).output().unwrap();
    assert!(!bad_hist.status.success());
}
