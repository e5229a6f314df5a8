use std::process::{Command, Output};

use serde_json::Value;

fn zerosum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zerosum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = zerosum(&all);
    let value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    (value, out.status.code().unwrap())
}

#[test]
fn invariant_prints_the_davenport_constant() {
    let out = zerosum(&["invariant", "--group", "3^1^3", "--avoid", "1..7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().next(), Some("7"));
    let (v, code) = json(&["invariant", "--group", "3,3", "--avoid", "all"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], "zerosum/1");
    assert_eq!(v["value"], 5);
}

#[test]
fn constructed_file_counts_back_to_its_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("thm6.txt");
    let path = file.to_str().unwrap();
    let out = zerosum(&["construct", "--which", "thm6", "--p", "3", "--n", "1", "--output", path]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("certified"));
    let (v, code) = json(&["count", "--input", path]);
    assert_eq!(code, 0);
    assert_eq!(v["length"], 9);
    assert_eq!(v["spectrum"], serde_json::json!([5, 6]));
    assert_eq!(v["counts"]["0"], "1");

    let out = zerosum(&["find", "--input", path, "--target", "length", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("# verified: length 6"));
    let out = zerosum(&["find", "--input", path, "--target", "in", "1..4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn find_2x_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("zeros.txt");
    std::fs::write(&file, "group 3^2^3\n0,0,0 x55\n").unwrap();
    let (v, code) = json(&["find", "--input", file.to_str().unwrap(), "--target", "2x"]);
    assert_eq!(code, 0);
    assert_eq!(v["length"], 18);
    assert_eq!(v["recursion_depth"], 1);
    assert_eq!(v["witness"], "0,0,0 x18");
}

#[test]
fn congruence_runs_are_reproducible() {
    let args = ["verify-congruence", "--statement", "olson", "--group", "3^1^3", "--trials", "50", "--seed", "7"];
    let (a, code) = json(&args);
    assert_eq!(code, 0);
    assert_eq!(a["failures"], 0);
    let (b, _) = json(&args);
    assert_eq!(a, b);
    for statement in ["corollary", "window", "lucas", "lemma6"] {
        let out = zerosum(&["verify-congruence", "--statement", statement, "--group", "3^1^3", "--trials", "20"]);
        assert_eq!(out.status.code(), Some(0), "{statement}");
    }
    let out = zerosum(&["verify-congruence", "--statement", "thm3-rank", "--p", "7"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    let out = zerosum(&["invariant", "--group", "3^x"]);
    assert_eq!(out.status.code(), Some(2));
    let out = zerosum(&["count", "--input", "/nonexistent/file"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/file"));
    let out = zerosum(&["search", "--group", "5^1^3", "--avoid", "all", "--budget-nodes", "500"]);
    assert_eq!(out.status.code(), Some(3));
    let out = zerosum(&["search", "--group", "3,3", "--avoid", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = zerosum(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_with_checkpoint_and_upper_bound() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("run.ckpt");
    let ckpt = ckpt.to_str().unwrap();
    let (v, code) = json(&["search", "--group", "3^1^3", "--avoid", "1..5", "--checkpoint", ckpt]);
    assert_eq!(code, 0);
    assert_eq!(v["value"], 9);
    assert!(std::fs::read_to_string(ckpt).unwrap().starts_with("zerosum-search-checkpoint v1"));
    let out = zerosum(&["search", "--group", "3^1^3", "--avoid", "3", "--upper-bound", "19"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Confirmed"));
    let out = zerosum(&["search", "--group", "3^1^3", "--avoid", "3", "--upper-bound", "18"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("counterexample"));
}

#[test]
fn construct_requires_its_parameters() {
    let out = zerosum(&["construct", "--which", "thm3", "--p", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let (v, code) = json(&["construct", "--which", "egz", "--group", "3^1^3", "--k", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["length"], 14);
    assert_eq!(v["which"], "egz");
}
