use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robust-dro")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_corrupt_solve_and_baselines() {
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean.csv");
    let dirty = dir.path().join("dirty.bin");
    ok(&["generate", "--d", "4", "--n", "400", "--task", "classification", "--noise", "0.05", "--seed", "3", "--output", s(&clean)]);
    let header = std::fs::read_to_string(&clean).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "x0,x1,x2,y");

    ok(&["corrupt", "--input", s(&clean), "--epsilon", "0.1", "--adversary", "far-cluster", "--seed", "4", "--output", s(&dirty)]);
    let sidecar = read_json(&dir.path().join("dirty.bin.sidecar.json"));
    assert_eq!(sidecar["corrupted_indices"].as_array().unwrap().len(), 40);

    let solved = dir.path().join("solve.json");
    ok(&["solve", "--input", s(&dirty), "--loss", "hinge", "--epsilon", "0.1", "--rho", "0.05", "--output", s(&solved)]);
    let result = read_json(&solved);
    assert_eq!(result["w_hat"].as_array().unwrap().len(), 4);
    assert!(result["max_abs_alpha"].as_f64().unwrap() <= 1.0 + 1e-9);
    assert_eq!(result["loss"], "hinge");

    for method in ["oracle", "erm", "doro"] {
        let out = dir.path().join(format!("{method}.json"));
        ok(&["baseline", "--method", method, "--input", s(&dirty), "--loss", "hinge", "--iters", "200", "--output", s(&out)]);
        let b = read_json(&out);
        assert_eq!(b["w"].as_array().unwrap().len(), 4);
        assert!(b["objective"].as_f64().unwrap().is_finite());
    }
}

#[test]
fn robust_mean_ignores_far_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("points.csv");
    let mut text = String::from("a,b\n");
    for i in 0..180 {
        let t = i as f64 / 180.0;
        text.push_str(&format!("{},{}\n", (t * 37.0).sin(), (t * 53.0).cos()));
    }
    for _ in 0..20 {
        text.push_str("100,100\n");
    }
    std::fs::write(&points, text).unwrap();
    let out = ok(&["robust-mean", "--input", s(&points), "--epsilon", "0.1"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let mean: Vec<f64> = v["mean"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(mean.iter().all(|m| m.abs() < 1.0), "{mean:?}");
}

#[test]
fn bench_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let csv = dir.path().join("rows.csv");
    let json = dir.path().join("rows.json");
    std::fs::write(
        &config,
        r#"{
            "loss": "lad",
            "data": {"d": 3, "n": 300, "labels": {"task": "regression", "noise_std": 0.3}, "seeds": [1]},
            "adversaries": [{"kind": "far_cluster"}],
            "methods": ["pdhg", "erm"],
            "sweep": [0.05],
            "erm": {"iters": 200}
        }"#,
    )
    .unwrap();
    ok(&["bench", "--config", s(&config), "--csv", s(&csv), "--json", s(&json)]);
    let lines: Vec<String> = std::fs::read_to_string(&csv).unwrap().lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("method,adversary,epsilon,seed"));

    let summary = ok(&["report", "--input", s(&json), "--format", "summary"]);
    let text = String::from_utf8(summary.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);

    let reissued = dir.path().join("again.json");
    ok(&["report", "--input", s(&json), "--format", "json", "--output", s(&reissued)]);
    assert_eq!(read_json(&reissued), read_json(&json));
}

#[test]
fn invalid_input_fails_cleanly() {
    let out = run(&["solve", "--input", "/nonexistent/data.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = run(&["generate", "--d", "0", "--n", "10", "--output", "/tmp/unused.csv"]);
    assert!(!out.status.success());

    let out = run(&["robust-mean"]);
    assert!(!out.status.success());
}
