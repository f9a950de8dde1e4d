use std::process::{Command, Output};

use serde_json::Value;

fn rieszlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rieszlab")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = rieszlab(args);
    let code = out.status.code().expect("exit code");
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr)));
    (code, v)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn charx_examples() {
    let (code, v) = json(&["charx", "sigma-k", "--n", "4", "--k", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    assert!((num(&v["result"]["p"]) - 2.0).abs() < 1e-6);
    assert_eq!(num(&v["result"]["closed_form"]), 2.0);
    assert!(num(&v["result"]["residual"]) < 1e-6);

    let (_, v) = json(&["charx", "p-convex", "--n", "5", "--p", "3.5"]);
    assert!((num(&v["result"]["p"]) - 3.5).abs() < 1e-6);

    let (_, v) = json(&["charx", "complex", "p-convex", "--n", "3", "--p", "1"]);
    assert!((num(&v["result"]["p"]) - 2.0).abs() < 1e-6);
    assert_eq!(v["result"]["n"], 6);

    let (_, v) = json(&["charx", "p", "--n", "3"]);
    assert_eq!(v["result"]["q"], "inf");
}

#[test]
fn verify_examples_and_exit_codes() {
    let (code, v) = json(&["verify", "pdelta", "--n", "3", "--delta", "1", "--suite", "ue"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["reports"][0]["pass"], true);
    let (code, _) = json(&["verify", "sigma-k", "--n", "4", "--k", "2", "--suite", "sandwich"]);
    assert_eq!(code, 0);
    let (code, v) = json(&["verify", "full-space", "--suite", "mp"]);
    assert_eq!(code, 2);
    assert_eq!(v["pass"], false);
    let (code, v) = json(&["verify", "minmax", "--n", "4", "--p", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["reports"].as_array().unwrap().len(), 4);
}

#[test]
fn table_is_csv_with_enough_rows() {
    let out = rieszlab(&["table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("family,params,n,computed_p,closed_form_p,residual"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 12);
    assert!(rows.iter().any(|r| r.starts_with("sigma-k,k=3,6,2.000000000,2.000000000")));
    assert!(rows.iter().any(|r| r.starts_with("quaternionic p,,2,4.000000000")));
    assert!(rows.iter().any(|r| r.starts_with("largest-convex,p=2,4,2.000000000")));
}

#[test]
fn density_example() {
    let (code, v) = json(&["density", "riesz", "--theta", "3", "--p", "3", "--n", "4"]);
    assert_eq!(code, 0);
    let d = &v["result"]["density"];
    assert!((num(&d["theta_m"]["theta"]) - 3.0).abs() < 1e-3);
    assert!((num(&d["theta_s"]["theta"]) - 3.0).abs() < 1e-3);
    assert!((num(&d["theta_v"]["theta"]) - 4.0).abs() < 4e-2);
}

#[test]
fn flow_example() {
    let (code, v) = json(&["flow", "radial-perturbed", "--p", "3", "--candidate", "riesz"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["converged"], true);
}

#[test]
fn grassmann_examples() {
    let (code, v) = json(&["grassmann", "g2r3", "--transitivity"]);
    assert_eq!(code, 0);
    assert!(v["result"]["transitivity"]["chain"].is_array());
    let (code, v) = json(&["grassmann", "g2r4", "--charx", "--planes", "128"]);
    assert_eq!(code, 0);
    assert!((num(&v["result"]["charx"]["p"]) - 2.0).abs() < 1e-6);
}

#[test]
fn radial_reports() {
    let (code, v) = json(&["radial", "kernel-max-const", "--p", "2", "--c", "-0.5"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["class"]["kind"], "Increasing");
    assert_eq!(rieszlab(&["radial", "wobble", "--p", "2"]).status.code(), Some(4));
}

#[test]
fn identical_seeds_give_identical_output() {
    let args =
        ["density", "two-kernels", "--p", "3", "--n", "3", "--center", "0,0.25,0", "--seed", "7", "--no-timestamp"];
    let a = rieszlab(&args);
    let b = rieszlab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = rieszlab(&[
        "density",
        "two-kernels",
        "--p",
        "3",
        "--n",
        "3",
        "--center",
        "0,0.25,0",
        "--seed",
        "8",
        "--no-timestamp",
    ]);
    assert_ne!(a.stdout, c.stdout);
    let (_, v) = json(&["charx", "laplacian"]);
    assert!(v["timestamp"].is_u64());
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"n": 6, "params": {"k": 3}, "no_timestamp": true}"#).unwrap();
    let p = path.to_str().unwrap();
    let (code, v) = json(&["charx", "sigma-k", "--config", p]);
    assert_eq!(code, 0);
    assert!((num(&v["result"]["p"]) - 2.0).abs() < 1e-6);
    assert!(v.get("timestamp").is_none());
    let (_, v) = json(&["charx", "sigma-k", "--config", p, "--k", "2"]);
    assert!((num(&v["result"]["p"]) - 3.0).abs() < 1e-6);

    std::fs::write(&path, r#"{"n": 6, "colour": "blue"}"#).unwrap();
    assert_eq!(rieszlab(&["charx", "laplacian", "--config", p]).status.code(), Some(4));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = rieszlab(&["table", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("family,"));
}

#[test]
fn error_exit_codes() {
    assert_eq!(rieszlab(&["charx", "bogus"]).status.code(), Some(4));
    assert_eq!(rieszlab(&["charx", "sigma-k"]).status.code(), Some(4));
    assert_eq!(rieszlab(&["charx"]).status.code(), Some(4));
    assert_eq!(rieszlab(&["density", "riesz", "--n", "3"]).status.code(), Some(4));
    // p = ∞ has no sandwich.
    assert_eq!(rieszlab(&["verify", "subaffine", "--suite", "sandwich"]).status.code(), Some(3));
    assert_eq!(rieszlab(&["charx", "laplacian", "--tol", "-1"]).status.code(), Some(4));
}

#[test]
fn thread_cap_is_honoured() {
    let ok = Command::new(env!("CARGO_BIN_EXE_rieszlab"))
        .args(["charx", "laplacian"])
        .env("RIESZLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_rieszlab"))
        .args(["charx", "laplacian"])
        .env("RIESZLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(4));
}
