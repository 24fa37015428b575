use std::path::Path;
use std::process::Command;

fn edgecolor() -> Command {
    Command::new(env!("CARGO_BIN_EXE_edgecolor"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

const GADGET: &str = r#"{"n": 6, "delta": 3, "eps": 0.5, "gamma": 3, "phases": 3,
  "colorer": "random_greedy", "builder": {"kind": "gadget"}, "trials": 50, "master_seed": 1}"#;

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GADGET);
    let out = dir.path().join("out");
    let status = edgecolor()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--trials", "40", "--threads", "2", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
    let agg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("aggregate.json")).unwrap()).unwrap();
    let keys: Vec<&str> = agg.as_object().unwrap().keys().map(String::as_str).collect();
    for k in [
        "trials",
        "completed",
        "errors",
        "failures",
        "failure_rate",
        "failure_rate_ci95",
        "mean_failed_edges",
        "mean_collisions",
        "max_collisions",
        "max_abs_delta",
        "mean_max_abs_delta",
        "well_behaved_rate",
        "balanced_rate",
    ] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(agg["trials"], 40);
}

#[test]
fn seed_flag_changes_rows_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GADGET);
    let run = |seed: &str, threads: &str, name: &str| {
        let out = dir.path().join(name);
        let s = edgecolor()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .args(["--seed", seed, "--threads", threads, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(s.success());
        std::fs::read(out.join("trials.csv")).unwrap()
    };
    let a = run("5", "1", "a");
    assert_eq!(a, run("5", "4", "b"));
    assert_ne!(a, run("6", "1", "c"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"n": 6, "delta": 3, "eps": 0.5, "builder": {"kind": "petersen"}}"#);
    let s = edgecolor().args(["simulate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(s.status.code(), Some(2));
    let missing = edgecolor().args(["simulate", "--config", "/nonexistent.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let invalid = write_config(dir.path(), r#"{"n": 20, "delta": 5, "eps": 0.5, "builder": {"kind": "complete"}}"#);
    assert_eq!(edgecolor().args(["simulate", "--config"]).arg(&invalid).status().unwrap().code(), Some(2));
    assert_eq!(edgecolor().args(["oracle", "params", "--eps", "1.5"]).status().unwrap().code(), Some(2));
    assert_eq!(edgecolor().arg("frobnicate").status().unwrap().code(), Some(2));
}

#[test]
fn sweep_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GADGET);
    let out = dir.path().join("sweep");
    let s = edgecolor()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--gamma", "3,4,5", "--trials", "200", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let table = String::from_utf8(s.stdout).unwrap();
    assert_eq!(table.lines().count(), 4);
    let points: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("aggregate.json")).unwrap()).unwrap();
    assert_eq!(points.as_array().unwrap().len(), 3);
    assert_eq!(points[2]["aggregate"]["failure_rate"], 0.0);

    let charts = dir.path().join("charts");
    let r = edgecolor()
        .args(["report", "--csv"])
        .arg(out.join("trials.csv"))
        .arg("--out")
        .arg(&charts)
        .output()
        .unwrap();
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["failure_rate.svg", "collisions.svg", "max_abs_delta.svg"] {
        assert!(std::fs::read_to_string(charts.join(f)).unwrap().starts_with("<svg"), "{f}");
    }
}

#[test]
fn oracle_values() {
    let g = edgecolor().args(["oracle", "gadget", "--delta", "3", "--gamma", "3"]).output().unwrap();
    assert!(g.status.success());
    assert!(String::from_utf8(g.stdout).unwrap().starts_with("2/3"));
    let s = edgecolor()
        .args(["oracle", "schedule", "--edges", "0-1,2-3,1-2", "--gamma", "2", "--colorer", "random-greedy"])
        .output()
        .unwrap();
    assert!(s.status.success());
    assert!(String::from_utf8(s.stdout).unwrap().contains("P(some edge uncolored) = 1/2"));
    let p = edgecolor().args(["oracle", "params", "--eps", "0.5"]).output().unwrap();
    assert!(String::from_utf8(p.stdout).unwrap().contains("zeta"));
}

#[test]
fn verify_quick_passes() {
    let v = edgecolor().args(["verify", "--level", "quick"]).output().unwrap();
    let text = String::from_utf8(v.stdout).unwrap();
    assert!(v.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("[PASS]")));
}
