use std::path::PathBuf;
use std::process::{Command, Output};

fn ellreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellreg")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("ellreg-cli-{}-{name}", std::process::id()))
}

#[test]
fn verify_all_passes_and_writes_report() {
    let path = scratch("all.json");
    let out = ellreg(&["verify", "all", "--level", "11", "--jobs", "2", "--out", path.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().filter(|l| l.starts_with("PASS ")).count() >= 40);
    assert!(!stdout.contains("FAIL "));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = report.as_array().expect("array of reports");
    for row in rows {
        for key in ["id", "inputs", "left", "right", "abs_error", "rel_error", "metric", "tolerance", "pass", "wall_seconds", "truncation"] {
            assert!(row.get(key).is_some(), "missing {key} in {row}");
        }
        assert_eq!(row["pass"], serde_json::Value::Bool(true));
    }
    assert!(rows.iter().any(|r| r["id"] == "cor101.l_value"));
    std::fs::remove_file(path).ok();
}

#[test]
fn explicit_curve_matches_registry_level() {
    let out = ellreg(&["verify", "thm2", "--curve", "1,-1,1,-1,-14,17"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn impossible_tolerance_is_a_numeric_failure() {
    let out = ellreg(&["verify", "thm2", "--tolerance", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL "));
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["verify", "nothing"],
        vec!["verify", "thm1", "--level", "13"],
        vec!["verify", "thm8", "--level", "17"],
        vec!["verify", "thm1", "--tolerance", "-1"],
        vec!["verify", "thm1", "--curve", "0,-1,1"],
        vec!["verify", "thm1", "--curve", "0,-1,1,-10,-20,11", "--level", "17"],
        vec!["units", "--level", "13", "--char", "11:g=2,zeta5^1"],
        vec!["mahler", "--poly", "Z: 1"],
        vec!["verify"],
    ] {
        let out = ellreg(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn units_prints_divisor_json() {
    let out = ellreg(&["units", "--level", "11", "--char", "11:g=2,zeta5^1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["cusps"].as_array().unwrap().len(), 10);
    assert!(doc["degree"]["re"].as_f64().unwrap().abs() < 1e-12);
    let hat = ellreg(&["units", "--level", "11", "--char", "11:g=2,zeta5^1", "--hat"]);
    assert_eq!(hat.status.code(), Some(0));
}

#[test]
fn mahler_prints_measure() {
    let out = ellreg(&["mahler", "--poly", "X: 1; Y: 1; 1: 1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let m = doc["measure"].as_f64().unwrap();
    assert!((m - 0.3230659472194505).abs() < 1e-10, "{m}");
}
