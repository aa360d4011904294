use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn symlen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symlen")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = symlen(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn choose(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn sl_on_the_local_field_model() {
    let v = json(&["sl", "--scheme", "laurent(F2)", "--n", "2"]);
    assert_eq!(v["exact"]["dim_kn"], 1);
    assert_eq!(v["exact"]["sl"], 1);
    assert_eq!(v["exact"]["witness"].as_array().unwrap().len(), 1);
}

#[test]
fn bounds_on_a_rigid_field() {
    let v = json(&["bounds", "--scheme", "laurent(laurent(laurent(QC)))", "--n", "2"]);
    let rows = v["bounds"].as_array().unwrap();
    let binomial = rows.iter().find(|r| r["id"] == "binomial").unwrap();
    // level 1: only d_0 = 3 contributes
    assert_eq!(binomial["value"], choose(3, 2).to_string());
    assert!(binomial["anchor"].as_str().unwrap().contains("binom"));
    assert_eq!(v["exact"]["sl"], 1);
    assert_eq!(v["dominance"], true);
    for key in ["scheme", "n", "profile", "bounds", "exact", "certificates"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn paired_bound_violation_is_reported() {
    let v = json(&["bounds", "--scheme", "RC", "--n", "2"]);
    assert_eq!(v["dominance"], false);
    assert_eq!(v["violations"], serde_json::json!(["paired"]));
}

#[test]
fn csv_flattens_bound_rows() {
    let out = symlen(&["bounds", "--scheme", "F2", "--n", "2", "--format", "csv"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(&out.stdout[..]);
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), ["id", "value", "applicable", "tightness", "dominates", "anchor"]);
    assert_eq!(reader.records().count(), 8);
}

#[test]
fn json_output_is_deterministic() {
    for args in [
        &["bounds", "--scheme", "product(RC,laurent(F2))", "--n", "3"][..],
        &["decompose", "--scheme", "laurent(laurent(RC))", "--form", "110,011;101,001;111,010"][..],
    ] {
        let a = symlen(args);
        let b = symlen(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn decompose_certifies_and_merges() {
    let v = json(&["decompose", "--scheme", "laurent(laurent(RC))", "--form", "110,011;101,001"]);
    assert_eq!(v["pass"], true);
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 2);
    for c in certs {
        assert_eq!(c["certificate"]["residue_diff"], 0);
    }
    assert!(v["merged_length"].as_u64().unwrap() <= v["rewritten_length"].as_u64().unwrap());
}

#[test]
fn exit_codes() {
    assert_eq!(symlen(&["sl", "--scheme", "laurent(F2", "--n", "2"]).status.code(), Some(1));
    assert_eq!(symlen(&["sl", "--scheme", "F2", "--n", "1"]).status.code(), Some(1));
    assert_eq!(symlen(&["sl", "--scheme", "F2"]).status.code(), Some(1));
    assert_eq!(symlen(&["decompose", "--scheme", "RC", "--form", "1,1;0"]).status.code(), Some(1));
    assert_eq!(symlen(&["sl", "--scheme", "product(RC,product(RC,RC))", "--n", "2", "--cap-bfs", "2"]).status.code(), Some(2));
    let too_big = "laurent(laurent(laurent(laurent(laurent(laurent(laurent(QC)))))))";
    assert_eq!(symlen(&["invariants", "--scheme", too_big]).status.code(), Some(2));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "# test\nscheme = laurent(F2)\nn = 3\nformat = json\n").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(json(&["sl", "--config", p])["n"], 3);
    assert_eq!(json(&["sl", "--config", p, "--n", "2"])["exact"]["sl"], 1);
    fs::write(&path, "colour = blue\n").unwrap();
    assert_eq!(symlen(&["sl", "--config", p]).status.code(), Some(1));
}

#[test]
fn raw_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.txt");
    let p = path.to_str().unwrap();
    json(&["build", "--scheme", "product(Q2,RC)", "--output", p]);
    let from_table = json(&["invariants", "--unsafe-table", p]);
    let from_expr = json(&["invariants", "--scheme", "product(Q2,RC)"]);
    assert_eq!(from_table["profile"], from_expr["profile"]);

    // D<1,1> must contain 1; this table breaks the axioms
    fs::write(&path, "minus_one 1\n0 01\n1 01\n").unwrap();
    assert_eq!(symlen(&["invariants", "--unsafe-table", p]).status.code(), Some(1));
}

#[test]
fn verify_report_is_deterministic_and_flags_the_paired_bound() {
    let args = ["verify", "--max-d", "3", "--seed", "5"];
    let a = symlen(&args);
    let b = symlen(&["verify-paper", "--max-d", "3", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let failing: Vec<u64> = v["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(failing, [3]);
}
