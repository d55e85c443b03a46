use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn reskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reskit"))
        .args(args)
        .env("RESKIT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn base_config() -> Value {
    json!({
        "problem": {"domain": {"kind": "unit_disk"}, "case": "exp_harmonic"},
        "method": {"name": "trefftz", "max_order": 8},
        "discretization": {"n_boundary": 40},
        "output": {"dir": "out"}
    })
}

fn write_config(dir: &Path, cfg: &Value) -> String {
    let path = dir.join("run.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn schema_validator(certificate: bool) -> jsonschema::Validator {
    let mut args = vec!["schema"];
    if certificate {
        args.push("--certificate");
    }
    let out = reskit(&args);
    assert_eq!(out.status.code(), Some(0));
    let schema: Value = serde_json::from_slice(&out.stdout).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn solve_writes_a_valid_certificate() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("out")).unwrap();
    let cfg = base_config();
    assert!(schema_validator(false).is_valid(&cfg));

    let out = reskit(&["solve", &write_config(dir.path(), &cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(dir.path().join("out/certificate.json")).unwrap();
    let cert: Value = serde_json::from_str(&text).unwrap();
    assert!(schema_validator(true).is_valid(&cert));
    assert_eq!(cert["method"], "trefftz");
    assert_eq!(cert["bound"]["kind"], "max-principle");
    assert!(cert["truth"]["sup_error"].as_f64().unwrap() <= cert["bound"]["value"].as_f64().unwrap());

    // No temporary files left behind next to the certificate.
    let names: Vec<_> = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 1, "{names:?}");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config();
    cfg["method"]["unexpected"] = json!(1);
    assert!(!schema_validator(false).is_valid(&cfg));
    let out = reskit(&["solve", &write_config(dir.path(), &cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out/certificate.json").exists());
}

#[test]
fn oversampling_below_floor_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config();
    cfg["discretization"]["oversampling"] = json!(1.5);
    let out = reskit(&["solve", &write_config(dir.path(), &cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('2'));
}

#[test]
fn escaping_certificate_path_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config();
    cfg["output"]["certificate"] = json!("../escape.json");
    let out = reskit(&["solve", &write_config(dir.path(), &cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("escape.json").exists());
}

#[test]
fn missing_config_exits_4() {
    let out = reskit(&["solve", "/nonexistent/dir/run.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn stability_lab_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lab.csv");
    let out = reskit(&[
        "stability-lab",
        "--family",
        "chebyshev",
        "--orders",
        "5,10,20",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn stability_lab_rejects_bad_orders() {
    let out = reskit(&["stability-lab", "--family", "equidistant", "--orders"]);
    assert_eq!(out.status.code(), Some(2));
    let out = reskit(&["stability-lab", "--family", "equidistant", "--orders", "10,5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn study_writes_table_and_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = reskit(&[
        "study",
        "--method",
        "mfs",
        "--case",
        "exp_harmonic",
        "--ladder",
        "8,16",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let files: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(files.iter().any(|f| f.ends_with(".csv")), "{files:?}");
    assert!(files.contains(&"mfs_8.json".to_owned()), "{files:?}");
    assert!(files.contains(&"mfs_16.json".to_owned()), "{files:?}");
}

#[test]
fn study_rejects_unknown_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = reskit(&[
        "study",
        "--method",
        "fem",
        "--case",
        "exp_harmonic",
        "--ladder",
        "4",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
