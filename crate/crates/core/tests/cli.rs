//! The `borno` binary: exit codes, fixtures and report files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn borno(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_borno")).args(args).current_dir(dir).env_remove("BORNO_THREADS").output().expect("binary runs")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn fixture(name: &str, dir: &Path) -> String {
    let path = dir.join(format!("{name}.json"));
    let out = borno(&["fixture", name, "--out", path.to_str().unwrap()], dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

#[test]
fn golden_pair_exits_zero() {
    let dir = TempDir::new().unwrap();
    let input = fixture("golden-pair", dir.path());
    let out_path = dir.path().join("r.json");
    let out = borno(&["run", "--input", &input, "--out", out_path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out_path);
    assert!(r["result"]["lower"].as_f64().unwrap() >= 1.618);
    assert_eq!(r["schema"], "borno/1");
    assert_eq!(r["digest"].as_str().unwrap().len(), 64);
    assert!(r["wall_time_ms"].is_u64());
}

#[test]
fn jsr_subcommand_takes_a_bare_payload() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("set.json");
    fs::write(&input, r#"{"generators": [[[0.5, 0], [0, 0.25]]]}"#).unwrap();
    let out_path = dir.path().join("r.json");
    let out = borno(&["jsr", "--input", input.to_str().unwrap(), "--depth", "4", "--out", out_path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out_path);
    assert_eq!(r["result"]["lower"], 0.5);
    assert_eq!(r["config"]["depth"], 4);
}

#[test]
fn negative_control_exits_one() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let out = borno(
        &["isoradial", "--fixture", "interval-restriction", "--depth", "6", "--out", out_path.to_str().unwrap(), "--csv", csv.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out_path)["result"]["worst_ratio"].as_f64().unwrap() >= 1.9);
    let table = fs::read_to_string(csv).unwrap();
    assert!(table.starts_with("certified_ratio,ratio,scale,size,"));
    assert!(table.lines().count() > 1);
}

#[test]
fn malformed_json_exits_three() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.json");
    fs::write(&input, "{not json").unwrap();
    let out = borno(&["run", "--input", input.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_fields_exit_three() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("extra.json");
    fs::write(&input, r#"{"schema": "borno/1", "command": "jsr", "payload": {"generators": [[[1]]], "extra": 1}}"#).unwrap();
    let out = borno(&["run", "--input", input.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_fixture_exits_three() {
    let dir = TempDir::new().unwrap();
    assert_eq!(borno(&["fixture", "nope"], dir.path()).status.code(), Some(3));
}

#[test]
fn emitted_fixtures_run_without_error() {
    let dir = TempDir::new().unwrap();
    for name in ["golden-pair", "trig-circle", "matrix-tower", "interval-restriction", "completion-demo", "geometric-cauchy", "geometric-truncation"] {
        let input = fixture(name, dir.path());
        let out = borno(&["run", "--input", &input, "--samples", "4"], dir.path());
        let code = out.status.code().unwrap();
        assert!(code <= 2, "{name}: exit {code}: {}", String::from_utf8_lossy(&out.stderr));
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(r["command"].as_str().is_some(), "{name}");
    }
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let input = fixture("matrix-tower", dir.path());
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let out = borno(&["run", "--input", &input, "--samples", "4", "--threads", threads], dir.path());
        let mut r: Value = serde_json::from_slice(&out.stdout).unwrap();
        r.as_object_mut().unwrap().remove("wall_time_ms");
        reports.push(r);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn sequence_subcommands() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    fs::write(p.join("space.json"), r#"{"disks": [{"kind": "l1", "weight": {"c": 1}}], "tails": false}"#).unwrap();
    fs::write(p.join("seq.json"), r#"{"terms": [{"kind": "truncation", "vector": {"tail": [{"c": 1, "beta": 0.5}]}}]}"#).unwrap();
    let cauchy = borno(&["cauchy", "--space", "space.json", "--seq", "seq.json", "--eps", r#"[{"c": 1, "beta": 0.5}]"#], p);
    assert_eq!(cauchy.status.code(), Some(0), "{}", String::from_utf8_lossy(&cauchy.stderr));
    let tight = borno(&["cauchy", "--space", "space.json", "--seq", "seq.json", "--eps", r#"[{"c": 0.25, "beta": 0.5}]"#], p);
    assert_eq!(tight.status.code(), Some(1));
    let complete = borno(&["complete", "--space", "space.json"], p);
    assert_eq!(complete.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&complete.stdout).unwrap();
    assert_eq!(r["result"]["complete"], "fail");
}

#[test]
fn approx_subcommand() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    fs::write(p.join("gauge.json"), r#"{"kind": "l2"}"#).unwrap();
    fs::write(p.join("set.json"), r#"{"envelope": {"tail": [{"c": 1, "beta": 0.5}]}}"#).unwrap();
    fs::write(p.join("ops.json"), r#"{"kind": "truncations"}"#).unwrap();
    let out = borno(&["approx", "--space", "gauge.json", "--set", "set.json", "--ops", "ops.json", "--tol", "1e-3"], p);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["result"]["local_approximation"]["rank"], 11);
}

#[test]
fn fejer_apple_fixture_passes() {
    let dir = TempDir::new().unwrap();
    let input = fixture("trig-fejer", dir.path());
    let out = borno(&["run", "--input", &input, "--samples", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["result"]["homotopy"]["certified_sup"].as_f64().unwrap() < 1.0);
    assert_eq!(r["result"]["sigma_index"], 64);
}
