//! End-to-end behaviour of the `gkdv` binary: exit codes, output formats
//! and files.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gkdv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkdv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is one JSON object")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_affine_is_kdv() {
    let out = gkdv(&["classify", "--f", "u", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["case"], "B2");
    assert_eq!(v["nullity"], 2);
    assert_eq!(v["generators"].as_array().unwrap().len(), 4);
    for d in v["defects"].as_array().unwrap() {
        assert!(d.as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn classify_log_needs_its_domain() {
    let out = gkdv(&["classify", "--f", "3*log(u-1)", "--domain", "1.5,3.5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["case"], "B3_LOG");
    assert!((v["params"]["alpha"].as_f64().unwrap() - 3.0).abs() < 1e-8);
    // on the default interval log(u - 1) cannot be evaluated
    let out = gkdv(&["classify", "--f", "3*log(u-1)"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "DomainError");
}

#[test]
fn quiet_classify_prints_only_the_case() {
    let out = gkdv(&["--quiet", "classify", "--f", "sin(u)"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "A\n");
}

#[test]
fn forbidden_exponent_exits_3() {
    let out = gkdv(&["soliton", "--alpha", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    let e = stderr_json(&out);
    assert_eq!(e["error"], "ForbiddenExponent");
    assert_eq!(e["exit_code"], 3);
}

#[test]
fn soliton_check_reports_residuals() {
    let out = gkdv(&["soliton", "--alpha", "2", "--A", "0.5", "--check", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["params"]["a"].as_f64().unwrap() - 1.5f64.sqrt()).abs() < 1e-14);
    assert!((v["params"]["c3"].as_f64().unwrap() + 0.25).abs() < 1e-15);
    assert!(v["check"]["residual"].as_f64().unwrap() < 1e-9);
    for p in v["check"]["perturbed"].as_array().unwrap() {
        assert!(p["residual"].as_f64().unwrap() > 1e-3, "{p}");
    }
}

#[test]
fn syntax_errors_are_usage_errors() {
    let out = gkdv(&["classify", "--f", "u +* 2"]);
    assert_eq!(out.status.code(), Some(2));
    let e = stderr_json(&out);
    assert_eq!(e["error"], "SyntaxError");
    let out = gkdv(&["classify", "--f", "v"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "UnknownIdentifier");
}

#[test]
fn missing_and_unknown_arguments_exit_2() {
    assert_eq!(gkdv(&["classify"]).status.code(), Some(2));
    assert_eq!(gkdv(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        gkdv(&["reduce", "--case", "cubic", "--alpha", "1", "--ic", "0,0,0", "--span", "0,1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(gkdv(&["repro", "unknown-name"]).status.code(), Some(2));
}

#[test]
fn travelwave_csv_matches_kdv_soliton() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("wave.csv");
    let out = gkdv(&[
        "travelwave",
        "--f",
        "u",
        "--w0",
        "3",
        "--n",
        "201",
        "--csv",
        path_str(&csv),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["c"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z,w,dw"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 201);
    for r in rows {
        let exact = 3.0 / (r[0] / 2.0).cosh().powi(2);
        assert!((r[1] - exact).abs() < 1e-6);
    }
}

#[test]
fn travelwave_hypothesis_violation_exits_3() {
    // f = -u has no solitary wave with a positive crest
    let out = gkdv(&["travelwave", "--f", "-u", "--w0", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "HypothesisViolated");
}

#[test]
fn reduce_power_with_lift_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("w.csv");
    let out = gkdv(&[
        "reduce",
        "--case",
        "power",
        "--alpha",
        "2",
        "--ic",
        "0.1,-0.2,0.05",
        "--span",
        "-3,3",
        "--lift",
        "1,2,-1,1",
        "--csv",
        path_str(&csv),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["case"], "POWER");
    assert!(v["lift"]["residual_max"].as_f64().unwrap() <= 1e-6);
    assert!(v["first_integral"]["drift"].as_f64().unwrap() <= 1e-7);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("z,w,dw,ddw,dddw\n"));
    let first: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(&first[..4], &[-3.0, 0.1, -0.2, 0.05]);
}

#[test]
fn reduce_log_reports_the_chain() {
    let out = gkdv(&[
        "reduce",
        "--case",
        "log",
        "--alpha",
        "1",
        "--ic",
        "1.5,0.1,0",
        "--span=-2,2",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v["chain"]["y_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn lift_outside_the_trajectory_exits_3() {
    let out = gkdv(&[
        "reduce",
        "--case",
        "exp",
        "--alpha",
        "1",
        "--ic",
        "0,0,0",
        "--span=-2,2",
        "--lift",
        "1,2,-5,5",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "OutOfRange");
}

#[test]
fn simulate_soliton_speed() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let snaps = dir.path().join("snap.csv");
    let out = gkdv(&[
        "simulate",
        "--f",
        "u",
        "--ic",
        "soliton:alpha=1,A=0.5",
        "--L",
        "80",
        "--N",
        "512",
        "--T",
        "4",
        "--report",
        path_str(&report),
        "--snapshots",
        path_str(&snaps),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!((v["speed_fit"].as_f64().unwrap() - 1.0).abs() < 5e-3);
    assert_eq!(v["t_final"].as_f64().unwrap(), 4.0);

    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    for key in ["mass", "momentum", "peak_x", "peak_u"] {
        assert!(r[key].as_array().unwrap().len() > 10, "{key}");
    }
    assert!((r["speed_fit"].as_f64().unwrap() - 1.0).abs() < 5e-3);
    assert!(r["residual_max"].as_f64().unwrap() < 1e-3);

    let text = std::fs::read_to_string(&snaps).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,u"));
    let rows = lines.count();
    assert_eq!(rows % 512, 0);
    assert_eq!(rows / 512, r["mass"].as_array().unwrap().len());
}

#[test]
fn simulate_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let ic = dir.path().join("ic.csv");
    let mut text = String::from("x,u\n");
    for j in 0..256 {
        let x = 80.0 * j as f64 / 256.0;
        text.push_str(&format!("{x},{}\n", 3.0 / (0.5 * (x - 40.0)).cosh().powi(2)));
    }
    std::fs::write(&ic, text).unwrap();
    let ic_arg = format!("file:{}", path_str(&ic));
    let out = gkdv(&["simulate", "--f", "u", "--ic", &ic_arg, "--T", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!((stdout_json(&out)["speed_fit"].as_f64().unwrap() - 1.0).abs() < 5e-3);

    let out = gkdv(&["simulate", "--f", "u", "--ic", &ic_arg, "--N", "512"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_unstable_steps() {
    let out = gkdv(&["simulate", "--f", "u", "--ic", "soliton:alpha=1,A=0.5", "--dt", "0.05"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "UnstableStep");
}

#[test]
fn repro_scenarios_pass() {
    for name in ["classify-table", "soliton-residuals"] {
        let out = gkdv(&["repro", name]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.lines().any(|l| l == format!("PASS {name}")), "{text}");
    }
}

#[test]
fn repro_json_summary() {
    let out = gkdv(&["repro", "homoclinic", "--json", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["scenarios"][0]["name"], "homoclinic");
}

#[test]
fn outputs_are_deterministic() {
    let args = ["repro", "reduction-lifts", "--seed", "3", "--json"];
    assert_eq!(gkdv(&args).stdout, gkdv(&args).stdout);
    let args = ["classify", "--f", "1 + exp(2*u)", "--json"];
    assert_eq!(gkdv(&args).stdout, gkdv(&args).stdout);
}

#[test]
fn floats_carry_17_significant_digits() {
    let out = gkdv(&["soliton", "--alpha", "1", "--json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"a\":3.0000000000000000e0"), "{text}");
}
