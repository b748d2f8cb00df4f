// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn srcrqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srcrqa"))
        .args(args)
        .arg("--quiet")
        .output()
        .unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn generated(dir: &Path) -> String {
    let out = dir.join("gen");
    let o = srcrqa(&[
        "generate",
        "--system",
        "ar1",
        "--T",
        "300",
        "--seed",
        "5",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("series.csv").display().to_string()
}

#[test]
fn generate_records_seed_and_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    generated(tmp.path());
    let m = manifest(&tmp.path().join("gen"));
    assert_eq!(m["command"], "generate");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["system"], "ar1");
    assert_eq!(m["tau"], 5.0);
    assert!(m["version"].is_string());
}

#[test]
fn omitted_seed_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    let o = srcrqa(&["generate", "--T", "50", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(manifest(&out)["seed"].is_u64());
}

#[test]
fn preset_generates_reference_series() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("p");
    let o = srcrqa(&[
        "generate",
        "--preset",
        "reference",
        "--seed",
        "1",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out.join("series.csv")).unwrap();
    let last: f64 = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(last > 4900.0 && last < 5000.0, "{last}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let input = generated(tmp.path());
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(r#"{{"input": "{input}", "rate": 0.2, "window-size": 50}}"#),
    )
    .unwrap();
    let out = tmp.path().join("r");
    let o = srcrqa(&[
        "rqa",
        "--config",
        cfg.to_str().unwrap(),
        "--rate",
        "0.1",
        "--lambda-s",
        "1.5",
        "--matrix-format",
        "binary",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["rate"], 0.1);
    assert_eq!(m["window-size"], 50);
    assert_eq!(m["results"]["costs"]["indel_cost"], 1.5);
    assert!(out.join("distance_matrix.medm").exists());
    assert!(!out.join("ks_curve.csv").exists());
}

#[test]
fn binary_matrix_reads_back() {
    let tmp = tempfile::tempdir().unwrap();
    let input = generated(tmp.path());
    let out = tmp.path().join("r");
    let o = srcrqa(&[
        "rqa",
        "--input",
        &input,
        "--window-size",
        "40",
        "--lambda-s",
        "2",
        "--matrix-format",
        "binary",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let f = std::fs::File::open(out.join("distance_matrix.medm")).unwrap();
    let m = srcrqa::io::read_matrix_binary(f).unwrap();
    use srcrqa::DistanceView;
    assert_eq!(m.size(), 300);
}

#[test]
fn short_record_clamps_window() {
    let tmp = tempfile::tempdir().unwrap();
    let input = generated(tmp.path());
    let out = tmp.path().join("r");
    let o = srcrqa(&[
        "rqa",
        "--input",
        &input,
        "--window-size",
        "500",
        "--lambda-s",
        "1",
        "--matrix-format",
        "none",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(manifest(&out)["window-size"], 300);
    let det = std::fs::read_to_string(out.join("det.csv")).unwrap();
    assert_eq!(det.lines().count(), 2);
}

#[test]
fn surrogate_ensemble_is_written() {
    let tmp = tempfile::tempdir().unwrap();
    let input = generated(tmp.path());
    let out = tmp.path().join("s");
    let o = srcrqa(&[
        "surrogate",
        "--input",
        &input,
        "--realizations",
        "2",
        "--seed",
        "3",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let m = manifest(&out);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
    let s = srcrqa::io::read_series_file(&out.join("ensemble/realization_00001.csv")).unwrap();
    let real = srcrqa::io::read_series_file(Path::new(&input)).unwrap();
    assert_eq!(s.len(), real.len());
}

#[test]
fn exit_codes_follow_error_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = out.to_str().unwrap();
    assert_eq!(srcrqa(&["rqa", "--output", o]).status.code(), Some(2));
    assert_eq!(srcrqa(&["oracle", "--output", o]).status.code(), Some(2));
    let missing = tmp.path().join("nope.csv");
    assert_eq!(
        srcrqa(&["rqa", "--input", missing.to_str().unwrap(), "--output", o])
            .status
            .code(),
        Some(3)
    );
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"not-a-key": 1}"#).unwrap();
    assert_eq!(
        srcrqa(&["generate", "--config", cfg.to_str().unwrap(), "--output", o])
            .status
            .code(),
        Some(2)
    );
    let flat = tmp.path().join("flat.csv");
    std::fs::write(&flat, "time,value\n0.1,1\n0.5,1\n1.2,1\n1.7,1\n2.3,1\n").unwrap();
    let code = srcrqa(&["rqa", "--input", flat.to_str().unwrap(), "--output", o])
        .status
        .code();
    assert!(matches!(code, Some(2) | Some(5)), "{code:?}");
}

#[test]
fn oracle_writes_requested_matrices() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = srcrqa(&[
        "oracle",
        "--deletion",
        "true",
        "--deletion-mode",
        "point-estimate",
        "--shifting",
        "true",
        "--rates",
        "1:2:1",
        "--replications",
        "20",
        "--oracle-period",
        "200",
        "--seed",
        "2",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("deletion_cost.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), ",1,2");
    assert!(out.join("shifting_total.csv").exists());
    assert!(out.join("shifting_per_operation.csv").exists());
}

#[test]
fn manifest_rerun_is_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let input = generated(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = srcrqa(&[
        "correct",
        "--input",
        &input,
        "--window-size",
        "60",
        "--realizations",
        "3",
        "--seed",
        "8",
        "--output",
        a.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = a.join("manifest.json");
    assert!(srcrqa(&[
        "correct",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        b.to_str().unwrap()
    ])
    .status
    .success());
    for f in [
        "corrected.csv",
        "det_real.csv",
        "manifest.json",
        "ensemble/realization_00002.csv",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}
