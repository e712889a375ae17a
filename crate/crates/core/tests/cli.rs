use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gradual-release"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn init_and_release() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(d, &["init", "--state", "s.jsonl", "--data", "1.0,2.0", "--alpha", "1", "--seed", "42"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(d, &["release", "--state", "s.jsonl", "--eps", "1", "--out", "r1.jsonl"]);
    assert_eq!(code(&out), 0);
    let record: Value = serde_json::from_str(&fs::read_to_string(d.join("r1.jsonl")).unwrap()).unwrap();
    assert_eq!(record["values"].as_array().unwrap().len(), 2);
    assert_eq!(record["eps_dp_decimal"], 1.0);

    // Same level again: identical bytes.
    run(d, &["release", "--state", "s.jsonl", "--eps", "1", "--out", "r1b.jsonl"]);
    assert_eq!(fs::read(d.join("r1.jsonl")).unwrap(), fs::read(d.join("r1b.jsonl")).unwrap());
}

#[test]
fn release_with_init_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["release", "--init", "--state", "s", "--data", "-3.5", "--seed", "1", "--eps", "2", "--out", "r"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("r").exists());
}

#[test]
fn bridge_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["init", "--state", "s", "--data", "1.0,2.0", "--seed", "42"]);
    assert_eq!(code(&run(d, &["release", "--state", "s", "--eps", "1", "--out", "a"])), 0);
    assert_eq!(code(&run(d, &["release", "--state", "s", "--eps", "3", "--out", "b"])), 0);
    let before = fs::read(d.join("s")).unwrap();
    let out = run(d, &["release", "--state", "s", "--eps", "2", "--out", "c"]);
    assert_eq!(code(&out), 3);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("between stored levels 1 and 3"), "{msg}");
    assert_eq!(fs::read(d.join("s")).unwrap(), before);
    assert!(!d.join("c").exists());
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["audit", "mse", "--n", "100"])), 2);
    assert_eq!(code(&run(d, &["audit", "nonsense"])), 2);
    assert_eq!(code(&run(d, &["frobnicate"])), 2);
    assert_eq!(code(&run(d, &["init", "--state", "s", "--data", "1", "--alpha", "0"])), 2);
    assert_eq!(code(&run(d, &["init", "--state", "s2"])), 2);
}

#[test]
fn init_refuses_to_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["init", "--state", "s", "--data", "1"])), 0);
    assert_ne!(code(&run(d, &["init", "--state", "s", "--data", "2"])), 0);
    assert_eq!(code(&run(d, &["init", "--state", "s", "--data", "2", "--force"])), 0);
}

#[test]
fn privacy_audit_reports_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["audit", "privacy", "--seed", "1", "--n", "10000"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let grid: Value = stdout
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .find(|v| v["test_name"] == "lipschitz_grid")
        .unwrap();
    assert!(grid["statistic"].as_f64().unwrap() <= 2.0 + 1e-6);
    assert_eq!(grid["details"]["seed"], 1);
}

#[test]
fn tighten_from_response_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["release", "--init", "--state", "s", "--data", "0,0,0", "--eps", "2", "--out", "r"]);
    let out = run(d, &["tighten", "--input", "r", "--eps", "2", "--out", "same"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_str(&fs::read_to_string(d.join("r")).unwrap()).unwrap();
    let same: Value = serde_json::from_str(&fs::read_to_string(d.join("same")).unwrap()).unwrap();
    assert_eq!(r["values"], same["values"]);
    assert_eq!(code(&run(d, &["tighten", "--input", "r", "--eps", "0.5", "--seed", "3", "--out", "t"])), 0);
    let t: Value = serde_json::from_str(&fs::read_to_string(d.join("t")).unwrap()).unwrap();
    assert_eq!(t["eps_dp_decimal"], 0.5);
    assert_eq!(code(&run(d, &["tighten", "--input", "r", "--eps", "5", "--out", "bad"])), 2);
}

#[test]
fn social_scenario_on_path_graph() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("g.txt"), "# path graph\n1 2\n2 3\n3 4\n").unwrap();
    let out = run(
        d,
        &["scenario-social", "--graph", "g.txt", "--owner", "1", "--data", "5.0", "--subset", "3,4", "--seed", "2"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let eps: Vec<f64> = lines[..3].iter().map(|v| v["eps_dp_decimal"].as_f64().unwrap()).collect();
    assert_eq!(eps, vec![1.0, 0.5, 1.0 / 3.0]);
    assert_eq!(lines[0]["node"], 2);
    assert_eq!(lines[3]["collusion_bound"], 1.0);
    assert_eq!(lines[3]["subset_bound"], 0.5);
}

#[test]
fn inspect_state() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["release", "--init", "--state", "s", "--data", "1,2", "--eps", "1", "--out", "r"]);
    run(d, &["release", "--state", "s", "--eps", "4", "--out", "r"]);
    let out = run(d, &["inspect", "--state", "s"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("dimension: 2"));
    assert!(text.contains("released levels (dp): [1, 4]"));
    assert!(text.contains("coordinate 1: 2 stored levels"));
}
