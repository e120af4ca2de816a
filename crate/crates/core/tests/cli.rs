use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wickburgers"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, v: Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn small_circle() -> Value {
    json!({
        "domain": {"kind": "circle"},
        "grid_points": 32,
        "T": 0.05,
        "dt": 0.001,
        "truncation": {"d": 2, "N": 2},
        "noise": {"mu0": 1.0},
        "snapshot_stride": 10,
        "initial": [
            {"alpha": "0", "field": {"kind": "sine", "amplitude": 0.5, "wavenumber": 2.0}},
            {"alpha": "1", "field": {"kind": "cosine", "amplitude": 1.0, "wavenumber": 2.0}}
        ]
    })
}

#[test]
fn missing_truncation_order_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_circle();
    cfg["truncation"] = json!({"d": 1});
    let path = write_config(dir.path(), "bad.json", cfg);
    let out = run(&[
        "solve",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("truncation.N"), "{stderr}");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn comb_columns_agree() {
    let out = run(&["comb", "--max-order", "5", "--support", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("multiindex,order,A_recursive,A_closed,bound"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5, "{line}");
        assert_eq!(cols[2], cols[3], "{line}");
        let exact: f64 = cols[2].split('/').next().unwrap().parse().unwrap();
        let bound: f64 = cols[4].parse().unwrap();
        if !cols[2].contains('/') {
            assert!((exact - bound).abs() <= 1e-9 * bound, "{line}");
        }
        rows += 1;
    }
    assert_eq!(rows, 55);
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "run.json", small_circle());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "--threads",
        "2",
        "solve",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for alpha in ["0", "1", "0.1", "2", "1.1", "0.2"] {
        assert!(out_dir.join("coeffs").join(format!("{alpha}.csv")).exists(), "{alpha}");
    }
    let norms = std::fs::read_to_string(out_dir.join("norms.csv")).unwrap();
    assert_eq!(norms.lines().count(), 7);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["coefficients"].as_array().unwrap().len(), 6);
    assert!(out_dir.join("timings.json").exists());
}

#[test]
fn snapshot_stride_flag_controls_stored_times() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "run.json", small_circle());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "solve",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--snapshot-stride",
        "25",
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(out_dir.join("coeffs/0.csv")).unwrap();
    // t = 0, 0.025, 0.05 on 32 points plus the header
    assert_eq!(csv.lines().count(), 1 + 3 * 32);
}

#[test]
fn mean_compares_against_hopf_cole() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_circle();
    cfg["initial"] = json!([{"alpha": "0", "field": {"kind": "sine", "amplitude": 1.0, "wavenumber": 2.0}}]);
    let path = write_config(dir.path(), "mean.json", cfg);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "mean",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--hopf-cole",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("mean.json")).unwrap()).unwrap();
    assert!(meta["hopf_cole_max_difference"].as_f64().unwrap() < 1e-5);
    assert!(out_dir.join("hopf_cole.csv").exists());
}

#[test]
fn noise_report_needs_noise_block() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_circle();
    cfg.as_object_mut().unwrap().remove("noise");
    let path = write_config(dir.path(), "quiet.json", cfg);
    let out = run(&[
        "noise-report",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn noise_report_writes_bound_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "noisy.json", small_circle());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "noise-report",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(out_dir.join("bound0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn validate_default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let out = run(&[
        "validate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["status"] == "pass"), "{stdout}");
    assert!(dir.path().join("summary.txt").exists());
}
