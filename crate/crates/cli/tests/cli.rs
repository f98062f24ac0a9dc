use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bessel-hardy"));
    c.env_remove("BESSEL_HARDY_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compare with a checked-in file; `UPDATE_GOLDEN=1` rewrites it instead.
fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden file {name} differs; rerun with UPDATE_GOLDEN=1 if intended");
}

fn write_grid(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn specfun_matches_half_integer_closed_form() {
    let o = run(&["specfun", "eval", "--tau", "0.5", "--x", "0.5,1,7"]);
    assert_eq!(code(&o), 0);
    for row in json(&o)["values"].as_array().unwrap() {
        let x = row["x"].as_f64().unwrap();
        let exact = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sinh();
        let v = row["value"].as_f64().unwrap();
        assert!((v - exact).abs() <= 1e-13 * exact, "x={x}: {v} vs {exact}");
        assert!((row["scaled"].as_f64().unwrap() - exact * (-x).exp()).abs() <= 1e-13 * exact);
    }
}

#[test]
fn specfun_reports_overflow_as_null() {
    let o = run(&["specfun", "eval", "--tau", "0", "--x", "800"]);
    assert_eq!(code(&o), 0);
    let row = &json(&o)["values"][0];
    assert!(row["value"].is_null());
    assert!(row["scaled"].as_f64().unwrap() > 0.0);
}

#[test]
fn measure_interval_and_ball() {
    let o = run(&["--nu", "0", "measure", "interval", "--a", "1", "--b", "2"]);
    assert_eq!(code(&o), 0);
    assert!((json(&o)["measure"].as_f64().unwrap() - 1.5).abs() < 1e-14);

    let o = run(&["--nu", "1", "measure", "ball", "--x", "3", "--r", "1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    // ∫₂⁴ y³ dy
    assert!((v["exact"].as_f64().unwrap() - 60.0).abs() < 1e-12);
    assert!(v["ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn kernel_eval_routes() {
    let (t, x, y) = (0.7_f64, 1.3_f64, 0.4_f64);
    let o = run(&["--nu", "0.5", "kernel", "eval", "--t", "0.7", "--x", "1.3", "--y", "0.4"]);
    assert_eq!(code(&o), 0);
    let z = x * y / (2.0 * t);
    let i_half = (2.0 / (std::f64::consts::PI * z)).sqrt() * z.sinh();
    let exact = (2.0 * t).recip() * (x * y).powf(-0.5) * i_half * (-(x * x + y * y) / (4.0 * t)).exp();
    let v = json(&o)["value"].as_f64().unwrap();
    assert!((v - exact).abs() <= 1e-12 * exact, "{v} vs {exact}");

    // classical axes are untouched by the conjugated route
    let c = run(&["--nu", "0.5", "kernel", "eval", "--t", "0.7", "--x", "1.3", "--y", "0.4", "--route", "conjugated"]);
    assert_eq!(code(&c), 0);
    assert_eq!(json(&c)["value"], json(&o)["value"]);

    let e = run(&["--nu", "1", "--flavors", "exotic", "kernel", "eval", "--t", "0.7", "--x", "1.3", "--y", "0.4"]);
    let k = run(&["--nu", "1", "--flavors", "exotic", "kernel", "eval", "--t", "0.7", "--x", "1.3", "--y", "0.4", "--route", "conjugated"]);
    assert_eq!((code(&e), code(&k)), (0, 0));
    let (we, kc) = (json(&e)["value"].as_f64().unwrap(), json(&k)["value"].as_f64().unwrap());
    // K = x^{-4ν} W^exo for one exotic axis
    assert!((kc - x.powf(-4.0) * we).abs() <= 1e-12 * kc, "{kc} vs {we}");
}

#[test]
fn covering_dump_lists_dyadic_intervals() {
    let o = run(&["--nu", "0", "--window", "-1:1", "covering", "dump"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, vec!["i1,lo1,hi1", "-1,0.5,1", "0,1,2", "1,2,4"]);
}

#[test]
fn covering_check_passes_for_product() {
    let o = run(&["--nu", "0,0", "--window", "-2:2", "covering", "check", "--points", "300", "--max-elements", "300"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &json(&o)["report"];
    assert_eq!(r["pass"], true);
    assert_eq!(r["covering"], "(DxD)");
}

#[test]
fn atoms_decompose_then_validate() {
    let dir = TempDir::new().unwrap();
    let grid = write_grid(&dir, "f.csv", "x1,value\n1.25,1\n1.75,-2\n2.5,0.5\n3.5,3\n");
    let report = dir.path().join("dec.json");
    let o = run(&["--nu", "0.5", "--depth", "2", "--out", report.to_str().unwrap(), "atoms", "decompose", "--input", grid.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dec: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(dec["all_valid"], true);
    assert!(dec["reconstruction_max_error"].as_f64().unwrap() < 1e-12);
    assert!(dec["local"].as_u64().unwrap() >= 1);
    assert!(dec["cancellative"].as_u64().unwrap() >= 1);

    let v = run(&["--nu", "0.5", "atoms", "validate", "--input", report.to_str().unwrap()]);
    assert_eq!(code(&v), 0);
    let certs = json(&v);
    assert_eq!(certs["valid"], true);
    assert_eq!(certs["certificates"].as_array().unwrap().len(), dec["terms"].as_array().unwrap().len());
}

#[test]
fn atoms_validate_rejects_oversized_atom() {
    let dir = TempDir::new().unwrap();
    let atom = r#"{"kind": "cancellative", "host_index": [0],
        "support_lower": [1.0], "support_upper": [2.0],
        "cells": [{"lower": [1.0], "upper": [1.5], "value": 5.0},
                  {"lower": [1.5], "upper": [2.0], "value": -5.0}]}"#;
    let p = write_grid(&dir, "atom.json", atom);
    let o = run(&["--nu", "-0.5", "atoms", "validate", "--input", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let v = json(&o);
    assert_eq!(v["valid"], false);
    let kinds: Vec<&str> =
        v["certificates"][0]["violations"].as_array().unwrap().iter().map(|x| x["kind"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"size"), "{kinds:?}");
}

#[test]
fn h1norm_routes_agree_and_profile_is_written() {
    let dir = TempDir::new().unwrap();
    let grid = write_grid(&dir, "f.csv", "x1,x2,value\n1.5,1.5,1\n1.5,2.5,-1\n2.5,1.5,0.5\n2.5,2.5,-0.5\n");
    let profile = dir.path().join("profile.csv");
    let o = run(&[
        "--nu",
        "0.5,1",
        "--flavors",
        "classical,exotic",
        "h1norm",
        "--input",
        grid.to_str().unwrap(),
        "--profile",
        profile.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let est = &json(&o)["estimate"];
    assert_eq!(est["routes_agree"], true);
    let (d, c) = (est["direct"]["value"].as_f64().unwrap(), est["conjugated"]["value"].as_f64().unwrap());
    assert!(d > 0.0 && (d - c).abs() <= 1e-6 * d);
    let prof = fs::read_to_string(&profile).unwrap();
    assert!(prof.starts_with("x1,x2,value\r\n"));
    assert!(prof.lines().count() > 10);
}

#[test]
fn domain_errors_exit_one() {
    assert_eq!(code(&run(&["--nu", "-1.5", "measure", "interval", "--a", "1", "--b", "2"])), 1);
    assert_eq!(code(&run(&["--nu", "0", "measure", "interval", "--a", "2", "--b", "1"])), 1);
    assert_eq!(code(&run(&["specfun", "eval", "--tau", "0", "--x", "-1"])), 1);
    assert_eq!(code(&run(&["--window", "3", "covering", "dump"])), 1);
    assert_eq!(code(&run(&["verify", "nothing"])), 1);
    assert_eq!(code(&run(&["--nu", "1", "--window", "-1:1", "verify", "--condition", "A1"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn divergent_condition_exits_three() {
    let o = run(&["--nu", "0.5", "--window", "-1:1", "verify", "--condition", "A1p"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_single_condition_passes() {
    let o = run(&["--nu", "1", "--flavors", "exotic", "--window", "-2:2", "verify", "--condition", "A1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["pass"], true);
    assert_eq!(v["reports"][0]["condition"], "A1");
}

#[test]
fn certified_failure_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("tight.json");
    fs::write(&cfg, r#"{"nu": [2], "flavors": ["exotic"], "covering": "dyadic", "window": [-2, 2], "verify": {"spread_bound": 1.0}}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "verify", "--condition", "A2"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["pass"], false);
    assert_eq!(v["reports"][0]["certified"], true);
    assert!(!o.stderr.is_empty());
}

#[test]
fn thread_count_falls_back_to_environment() {
    let args = ["--nu", "0", "measure", "interval", "--a", "1", "--b", "2"];
    let ok = bin().args(args).env("BESSEL_HARDY_THREADS", "1").output().unwrap();
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["config"]["threads"], 1);
    let bad = bin().args(args).env("BESSEL_HARDY_THREADS", "many").output().unwrap();
    assert_eq!(code(&bad), 1);
    // the flag wins over the environment
    let flag = bin().args(["--threads", "1"]).args(args).env("BESSEL_HARDY_THREADS", "many").output().unwrap();
    assert_eq!(code(&flag), 0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/thm11.json");
    let o = run(&["--config", cfg.to_str().unwrap(), "--seed", "9", "measure", "ball", "--x", "1.5,1.5", "--r", "0.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c = &json(&o)["config"];
    assert_eq!(c["seed"], 9);
    assert_eq!(c["covering"], "qb");
    assert_eq!(c["nu"], serde_json::json!([0.5, 1.0]));
}

#[test]
fn render_battery_golden() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rendered");
    let o = run(&["--out", out.to_str().unwrap(), "report", "render", "--input", fixture("battery.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, vec!["01-A1.csv", "02-A2.csv", "report.md"]);
    for n in &names {
        check_golden(&format!("battery/{n}"), &fs::read_to_string(out.join(n)).unwrap());
    }
}

#[test]
fn render_decomposition_golden() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rendered");
    let o = run(&["--out", out.to_str().unwrap(), "report", "render", "--input", fixture("decomposition.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    check_golden("decomposition/report.md", &fs::read_to_string(out.join("report.md")).unwrap());
    check_golden("decomposition/lambda_histogram.csv", &fs::read_to_string(out.join("lambda_histogram.csv")).unwrap());
}

#[test]
fn render_empty_report_writes_nothing_to_stdout() {
    let dir = TempDir::new().unwrap();
    let p = write_grid(&dir, "empty.json", r#"{"schema": 1, "reports": []}"#);
    let o = run(&["report", "render", "--input", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
}

#[test]
fn render_schema_mismatch_exits_one() {
    let dir = TempDir::new().unwrap();
    let p = write_grid(&dir, "future.json", r#"{"schema": 2, "reports": [{"condition": "A1"}]}"#);
    let o = run(&["report", "render", "--input", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));
}
