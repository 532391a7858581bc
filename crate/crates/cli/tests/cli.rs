//! End-to-end checks of the `ftl` binary and the experiment runner.

use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use ftl_experiment::{run_experiment, Command, ExperimentConfig, RunManifest, Workers};

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_ftl"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn frozen_beta_golden_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"m_list":[8,16,32,64],"replicas":1000,"seed":3}"#);
    let out = tmp.path().join("out");
    let st = bin().args(["frozen-beta", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let (header, rows) = csv_rows(&out.join("results.csv"));
    assert_eq!(header, ["m", "replica", "beta", "censored", "replica_seed"]);
    assert_eq!(rows.len(), 4000);
    for (k, m) in [8, 16, 32, 64].iter().enumerate() {
        for r in 0..1000 {
            let row = &rows[k * 1000 + r];
            assert_eq!(row[0], m.to_string());
            assert_eq!(row[1], r.to_string());
            assert!(row[2].parse::<f64>().unwrap() > 0.0);
            assert_eq!(row[3], "false");
            row[4].parse::<u64>().unwrap();
        }
    }
    let manifest: RunManifest = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.command, "frozen-beta");
    assert_eq!(manifest.config.seed, 3);
    assert!(manifest.checksums.contains_key("results.csv"));
    assert!(manifest.checksums.contains_key("estimates.jsonl"));
}

fn checksums_with(mut cfg: ExperimentConfig, workers: usize, dir: &Path) -> RunManifest {
    cfg.workers = Workers::Count(workers);
    cfg.out_dir = dir.join(format!("w{workers}"));
    run_experiment(&cfg).unwrap()
}

#[test]
fn worker_count_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = [
        r#"{"command":"simulate","n":6,"replicas":40,"t_grid":[0.5,3.0],"start":{"kind":"stationary","lambda":1.0},"seed":5}"#,
        r#"{"command":"couple","n":4,"replicas":64,"seed":6}"#,
        r#"{"command":"frozen-beta","m_list":[4,8],"replicas":50,"seed":7}"#,
        r#"{"command":"tmix-upper","n":4,"replicas":100,"t_grid":[1,2,4,8,16,32,64],"seed":8}"#,
        r#"{"command":"tmix-lower","n":8,"replicas":50,"seed":9}"#,
        r#"{"command":"generator-check","n":4,"replicas":10000,"points":2,"seed":10}"#,
        r#"{"command":"heavy-tail","n":4,"replicas":400,"burn_in_factor":2,"law":{"kind":"pareto_unit_mean","tail_index":2.5},"seed":11}"#,
        r#"{"command":"fclt","n":32,"replicas":60,"seed":12}"#,
        r#"{"command":"hitting-time","n":8,"replicas":60,"seed":13}"#,
        r#"{"command":"dominance-check","m_list":[6],"replicas":20,"t_end":5,"seed":14}"#,
        r#"{"command":"stationary-test","n":5,"replicas":40,"t_end":2,"seed":15}"#,
        r#"{"command":"adjoint-check","n":4,"points":6,"seed":16}"#,
    ];
    for (k, text) in configs.iter().enumerate() {
        let cfg = ExperimentConfig::parse(text.as_bytes()).unwrap();
        let dir = tmp.path().join(k.to_string());
        let one = checksums_with(cfg.clone(), 1, &dir);
        let eight = checksums_with(cfg, 8, &dir);
        assert_eq!(one.checksums, eight.checksums, "{text}");
        let a = fs::read(dir.join("w1/results.csv")).unwrap();
        let b = fs::read(dir.join("w8/results.csv")).unwrap();
        assert_eq!(a, b, "{text}");
    }
}

#[test]
fn adjoint_check_residuals_are_small_at_n5() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        command: Some(Command::AdjointCheck),
        n: 5,
        points: 100,
        out_dir: tmp.path().to_path_buf(),
        ..Default::default()
    };
    run_experiment(&cfg).unwrap();
    let (header, rows) = csv_rows(&tmp.path().join("results.csv"));
    assert_eq!(header, ["point", "point_seed", "y", "closed_form", "quadrature", "residual"]);
    assert_eq!(rows.len(), 100);
    for row in rows {
        assert_eq!(row[2].split(';').count(), 4);
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
        assert!(row[5].parse::<f64>().unwrap() <= 1e-6, "{row:?}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for text in [r#"{"n":1}"#, r#"{"n":4,"colour":"red"}"#, r#"{"n":"#, r#"{"law":{"kind":"pareto_unit_mean","tail_index":0.5}}"#] {
        let cfg = write_config(tmp.path(), text);
        let out = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("o")).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
    }
    let missing = bin().args(["simulate", "--config", "/nonexistent/x.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let bad_flag = bin().args(["simulate", "--workers", "lots"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_with_three_and_marks_partial() {
    let tmp = tempfile::tempdir().unwrap();
    // The output directory cannot be created under a regular file.
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let out = bin().args(["simulate", "--out"]).arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    // floor(n x) = 0 passes config validation but fails in the profile.
    let dir = tmp.path().join("partial");
    let cfg = ExperimentConfig {
        command: Some(Command::Fclt),
        n: 4,
        replicas: 3,
        x_grid: vec![0.1],
        out_dir: dir.clone(),
        ..Default::default()
    };
    assert!(run_experiment(&cfg).is_err());
    assert!(dir.join("PARTIAL").exists());
}

#[test]
fn flags_override_file_values() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"seed":1,"workers":2,"out_dir":"/nonexistent/never"}"#);
    let out = tmp.path().join("o");
    let st = bin()
        .args(["hitting-time", "--seed", "99", "--workers", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let m: RunManifest = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.config.seed, 99);
    assert_eq!(m.workers, 1);
    assert_eq!(m.config.command, Some(Command::HittingTime));
}

#[test]
fn rerun_from_manifest_reproduces_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(br#"{"command":"couple","n":5,"replicas":30,"seed":4}"#).unwrap();
    let first = checksums_with(cfg, 2, tmp.path());
    let mut again = first.config.clone();
    again.out_dir = tmp.path().join("again");
    let second = run_experiment(&again).unwrap();
    assert_eq!(first.checksums, second.checksums);
    assert!(first.checksums.contains_key("couplings.jsonl"));
}

#[test]
fn couplings_jsonl_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        command: Some(Command::TmixUpper),
        n: 3,
        replicas: 100,
        t_grid: Some(vec![1.0, 10.0, 100.0]),
        out_dir: tmp.path().to_path_buf(),
        ..Default::default()
    };
    run_experiment(&cfg).unwrap();
    let text = fs::read_to_string(tmp.path().join("couplings.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 200);
    for l in &lines {
        for key in ["n", "seed", "replica", "replica_seed", "start", "tau", "censored", "events"] {
            assert!(l.get(key).is_some(), "{key} missing in {l}");
        }
        assert_eq!(l["tau"].is_null(), l["censored"].as_bool().unwrap());
    }
    let est = fs::read_to_string(tmp.path().join("estimates.jsonl")).unwrap();
    let rec: serde_json::Value = serde_json::from_str(est.lines().next().unwrap()).unwrap();
    for key in ["op", "params", "estimate", "ci", "replicas", "seed"] {
        assert!(rec.get(key).is_some());
    }
}

#[test]
fn trajectory_logs_are_written_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(br#"{"command":"simulate","n":3,"replicas":2,"t_end":2,"log":"csv"}"#).unwrap();
    let cfg = ExperimentConfig { out_dir: tmp.path().to_path_buf(), ..cfg };
    let m = run_experiment(&cfg).unwrap();
    assert!(m.checksums.contains_key("trajectories/replica_1.csv"));
    let text = fs::read_to_string(tmp.path().join("trajectories/replica_0.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("time,actor,size,gap_before"));
}
