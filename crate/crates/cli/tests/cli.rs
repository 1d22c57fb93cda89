//! End-to-end checks of the binary: artifact content, config precedence,
//! exit codes, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bubbletower"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Grab column `col` of the CSV row whose first field is `key`.
fn csv_cell(csv: &str, key: &str, col: usize) -> f64 {
    let mut lines = csv.lines();
    lines.next().expect("header");
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[0] == key {
            return fields[col].parse().unwrap();
        }
    }
    panic!("no row with key {key} in:\n{csv}");
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn recurrence_writes_the_expected_first_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["recurrence", "--p", "3", "--k", "5", "--out", "arts"],
        dir.path(),
    );
    let text = stdout(&out);
    assert!(text.contains("delta_1 = 0.3660254037844386"), "{text}");
    let csv = fs::read_to_string(dir.path().join("arts/recurrence.csv")).unwrap();
    assert!((csv_cell(&csv, "1", 1) - 0.366_025_403_784_438_6).abs() < 1e-12);
    assert_eq!(csv.lines().count(), 7);
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("arts/recurrence.json")).unwrap())
            .unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 6);
}

#[test]
fn profile_dump_to_stdout_hits_the_closed_form_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["profile", "--kind", "z0", "--dump", "-"], dir.path());
    let csv = stdout(&out);
    assert_eq!(csv.lines().next().unwrap(), "s,z,zprime,residual");
    let z0 = csv_cell(&csv, "0.0000000000000000e0", 1);
    assert!((z0 - (64.0f64 / 81.0).ln()).abs() < 1e-9, "z(0) = {z0}");
    assert_eq!(csv.lines().count(), 1 + 257);
}

#[test]
fn exponential_diagram_tops_out_at_the_fold_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "unit.json", r#"{"p": 1.0, "variant": "unit"}"#);
    let args = [
        "diagram", "--spec", &spec, "--mu-min", "0.2", "--mu-max", "5", "--points", "25", "--out",
        "arts",
    ];
    let text = stdout(&run(&args, dir.path()));
    assert!(text.contains("25 points (0 failed)"), "{text}");

    let csv = fs::read_to_string(dir.path().join("arts/diagram.csv")).unwrap();
    let max_lambda = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((max_lambda - 2.0).abs() < 0.01, "fold height {max_lambda}");

    let first: Vec<u8> = fs::read(dir.path().join("arts/diagram.csv")).unwrap();
    stdout(&run(&args, dir.path()));
    let second: Vec<u8> = fs::read(dir.path().join("arts/diagram.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn unknown_spec_key_is_an_argument_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "bad.json",
        r#"{"p": 3.0, "variant": "h4", "tau0": 1.0, "bogus": 7}"#,
    );
    let out = run(&["shoot", "--spec", &spec, "--mu", "4"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field `bogus`"));
}

#[test]
fn numerical_rejection_exits_one_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "h4.json",
        r#"{"p": 3.0, "variant": "h4", "tau0": 1.0}"#,
    );
    let out = run(&["shoot", "--spec", &spec, "--mu", "-1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"], "invalid_parameter");
    assert!(err["detail"].as_str().unwrap().contains("mu"));
}

#[test]
fn flags_beat_config_and_unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_spec(
        dir.path(),
        "cfg.json",
        r#"{"out": "cfgout", "format": "csv"}"#,
    );

    stdout(&run(
        &["recurrence", "--p", "3", "--k", "2", "--config", &cfg],
        dir.path(),
    ));
    assert!(dir.path().join("cfgout/recurrence.csv").exists());
    assert!(!dir.path().join("cfgout/recurrence.json").exists());

    stdout(&run(
        &[
            "recurrence",
            "--p",
            "3",
            "--k",
            "2",
            "--config",
            &cfg,
            "--out",
            "flagout",
            "--format",
            "json",
        ],
        dir.path(),
    ));
    assert!(dir.path().join("flagout/recurrence.json").exists());
    assert!(!dir.path().join("flagout/recurrence.csv").exists());

    let bad = write_spec(dir.path(), "bad.json", r#"{"out": "x", "junk": 1}"#);
    let out = run(
        &["recurrence", "--p", "3", "--k", "2", "--config", &bad],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field `junk`"));
}

#[test]
fn analyze_emits_the_full_artifact_set() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "h4.json",
        r#"{"p": 3.0, "variant": "h4", "tau0": 1.0}"#,
    );
    let text = stdout(&run(
        &[
            "analyze",
            "--spec",
            &spec,
            "--mu",
            "5",
            "--curves",
            "ubeta=1.5,vl=0",
            "--out",
            "arts",
        ],
        dir.path(),
    ));
    assert!(text.contains("bubbles = 2 (1 tower)"), "{text}");
    for name in [
        "phi_psi.csv",
        "phi_psi.json",
        "bubbles.csv",
        "bubbles.json",
        "oscillation.csv",
        "oscillation.json",
        "intersections.json",
    ] {
        assert!(
            dir.path().join("arts").join(name).exists(),
            "missing {name}"
        );
    }
    let reports: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("arts/intersections.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 2);
    assert!(reports[0]["z"].as_u64().unwrap() >= 1);
}

#[test]
fn verify_prints_the_documented_table_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--out", "vout"], dir.path());
    let text = stdout(&out);
    assert!(text.contains("criterion 01 PASS"), "{text}");
    assert!(text.contains("criterion 08 FAIL"), "{text}");
    assert!(text.contains("verify: 10/11 criteria passed"), "{text}");
    assert!(dir.path().join("vout/verify/pass1/summary.json").exists());
}
