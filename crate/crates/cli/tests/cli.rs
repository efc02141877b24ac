use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn convpart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convpart"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generated(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let file = dir.join(format!("u{n}-{seed}.txt"));
    let out = convpart(&["gen", &n.to_string(), &seed.to_string(), "--out", path(&file)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    file
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn solve_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), 12, 5);
    let sol = dir.path().join("a.sol");
    let out = convpart(&["--format", "json", "solve", path(&inst), "--out", path(&sol)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["status"], "Optimal");
    let z = report["objective"].as_i64().unwrap();
    assert!(report["euler"].as_i64().unwrap() <= report["lp_ceil"].as_i64().unwrap());
    assert!(report["lp_ceil"].as_i64().unwrap() <= z);
    assert!(z <= report["greedy"].as_i64().unwrap());

    let out = convpart(&["--format", "json", "verify", path(&inst), path(&sol)]);
    assert_eq!(out.status.code(), Some(0));
    let verdict = json(&out);
    assert_eq!(verdict["valid"], true);
    assert_eq!(verdict["faces"].as_i64(), Some(z));
}

#[test]
fn verify_rejects_a_deleted_face() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), 10, 2);
    let sol = dir.path().join("a.sol");
    assert!(convpart(&["solve", path(&inst), "--out", path(&sol)])
        .status
        .success());
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    doc["faces"].as_array_mut().unwrap().pop();
    doc["objective"] = (doc["objective"].as_i64().unwrap() - 1).into();
    let bad = dir.path().join("bad.sol");
    std::fs::write(&bad, doc.to_string()).unwrap();
    let out = convpart(&["--format", "json", "verify", path(&inst), path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["valid"], false);
}

#[test]
fn oracle_agrees_with_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), 11, 8);
    let solved = json(&convpart(&["--format", "json", "solve", path(&inst)]));
    let oracle = json(&convpart(&["--format", "json", "oracle", path(&inst)]));
    assert_eq!(solved["objective"], oracle["objective"]);
}

#[test]
fn cuts_flag_keeps_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), 20, 4);
    let plain = json(&convpart(&["--format", "json", "solve", path(&inst)]));
    let cuts = json(&convpart(&["--format", "json", "solve", path(&inst), "--cuts"]));
    assert_eq!(plain["objective"], cuts["objective"]);
}

#[test]
fn several_instances_write_one_solution_each() {
    let dir = tempfile::tempdir().unwrap();
    let a = generated(dir.path(), 9, 1);
    let b = generated(dir.path(), 10, 1);
    let out_dir = dir.path().join("out");
    let out = convpart(&["solve", path(&a), path(&b), "--out", path(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_dir(&out_dir).unwrap().count(), 2);
}

#[test]
fn bound_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), 15, 3);
    let out = convpart(&["--format", "json", "bound", path(&inst)]);
    assert!(out.status.success());
    let b = json(&out);
    assert!(b["lp_ceil"].as_i64().unwrap() <= b["upper_bound"].as_i64().unwrap());

    let lp = dir.path().join("m.lp");
    assert!(convpart(&["export-lp", path(&inst), path(&lp)]).status.success());
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.contains("Minimize") && text.contains("Subject To") && text.trim_end().ends_with("End"));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "garbage").unwrap();
    let out = convpart(&["solve", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "parse");

    let missing = dir.path().join("missing.txt");
    let out = convpart(&["solve", path(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "io");
}

#[test]
fn oracle_refuses_large_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), 15, 1);
    assert_eq!(convpart(&["oracle", path(&inst)]).status.code(), Some(3));
}

#[test]
fn edge_model_export_needs_general_position() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("line.txt");
    std::fs::write(&inst, "4\n0 0\n1 1\n2 2\n0 3\n").unwrap();
    let lp = dir.path().join("e.lp");
    let out = convpart(&["export-lp", path(&inst), path(&lp), "--edge-model"]);
    assert_eq!(out.status.code(), Some(1));
}
