//! End-to-end runs of the installed binary: exit codes, artifact files,
//! and byte-level determinism of the emitted tables.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isonodal"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).expect("test file writes");
}

const STAR_JSON: &str = r#"{
    "vertices": 4,
    "edges": [[0, 1], [0, 2], [0, 3]],
    "leaf_pairs": [{"root": 0, "arm_plus": [1], "arm_minus": [2]}]
}"#;

const INTERVAL_JSON: &str = r#"{
    "vertices": 2,
    "edges": [[0, 1]],
    "lengths": [1.0]
}"#;

#[test]
fn verify_thm2_passes_without_inputs() {
    let out = run(&["verify", "thm2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("claim: theorem2"));
    assert!(text.contains("verdict: pass"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn unknown_command_is_a_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Usage"));
}

#[test]
fn spectrum_tables_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("star.json");
    write(&graph, STAR_JSON);
    let out_path = dir.path().join("spectrum.json");
    let args = [
        "spectrum",
        "--input",
        graph.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let first_file = std::fs::read(&out_path).unwrap();
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first_file, std::fs::read(&out_path).unwrap());

    let doc: serde_json::Value = serde_json::from_slice(&first_file).unwrap();
    let eigenvalues = doc["spectrum"]["eigenvalues"].as_array().unwrap();
    for (got, want) in eigenvalues.iter().zip([0.0, 1.0, 1.0, 4.0]) {
        assert!((got.as_f64().unwrap() - want).abs() < 1e-9);
    }
    assert_eq!(doc["profiles"].as_array().unwrap().len(), 4);
    // the stdout table carries one aligned row per eigenvalue
    assert_eq!(stdout(&first).lines().filter(|l| l.contains(',')).count(), 5);
}

#[test]
fn malformed_json_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(&bad, "{\"vertices\": oops");
    let out = run(&["spectrum", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn missing_leaf_pair_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("pairless.json");
    write(&graph, r#"{"vertices": 3, "edges": [[0, 1], [1, 2]]}"#);
    let out = run(&["verify", "thm2", "--input", graph.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("leaf pair"), "{}", stderr(&out));
}

#[test]
fn qspectrum_emits_spectrum_profiles_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("interval.json");
    write(&graph, INTERVAL_JSON);
    let out_path = dir.path().join("q.json");
    let out = run(&[
        "qspectrum",
        "--input",
        graph.to_str().unwrap(),
        "--kmax",
        "10",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("quantum"));
    assert!(text.contains("true"));

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let k = doc["spectrum"]["k"].as_array().unwrap();
    assert_eq!(k.len(), 4); // 0, pi, 2pi, 3pi below 10
    assert!((k[1].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-8);
    assert_eq!(doc["profiles"][1]["quantum"], serde_json::json!(true));

    let trace = std::fs::read_to_string(dir.path().join("q.trace.csv")).unwrap();
    assert!(trace.starts_with("k,sigma_min\n"));
    // roughly kmax / (pi / grid_density) samples
    assert!(trace.lines().count() > 50);
}

#[test]
fn verify_thm3_default_instance_passes() {
    let out = run(&["verify", "thm3", "--nmax", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("claim: theorem3"));
    assert!(text.contains("glued_spectra_match"));
    assert!(text.contains("verdict: pass"));
}

#[test]
fn verify_interlacing_defaults_pass() {
    let out = run(&["verify", "interlacing"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("odd_spectra_strictly_interlace"));
}

#[test]
fn oracle_crosscheck_passes_on_the_default_star() {
    let out = run(&["oracle", "--nmax", "5", "--points-per-unit", "300"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("n,k_secular,lambda_secular,lambda_fd,rel_err"));
    assert!(text.contains(": pass"));
}

#[test]
fn search_emits_a_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = dir.path().join("catalog.json");
    let out = run(&["search", "--nmax", "7", "--output", catalog.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("scanned"));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&catalog).unwrap()).unwrap();
    assert!(doc["trees_scanned"].as_u64().unwrap() > 10);
    assert!(doc["pairs"].is_array());
}
