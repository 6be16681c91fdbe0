//! End-to-end tests against the built binary: file formats, JSON report
//! shape, exit codes, and rerun determinism.

use commprob::group::catalog;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

const ORDER4_NONCOMM: &str =
    r#"{"moduli": [2, 2], "structure": [[[1,0],[0,1]],[[0,0],[0,0]]]}"#;

fn run(args: &[&str], dir: &Path) -> (String, String, i32) {
    let output = Command::new(env!("CARGO_BIN_EXE_commprob"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (
        String::from_utf8(output.stdout).expect("stdout is utf-8"),
        String::from_utf8(output.stderr).expect("stderr is utf-8"),
        output.status.code().expect("no signal"),
    )
}

fn run_json(args: &[&str], dir: &Path) -> (Value, i32) {
    let (stdout, stderr, code) = run(args, dir);
    let value: Value = serde_json::from_str(&stdout)
        .unwrap_or_else(|e| panic!("stdout must be JSON ({e}): {stdout}\nstderr: {stderr}"));
    (value, code)
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("fixture write");
    path
}

fn write_group(dir: &Path, name: &str, group: &commprob::group::FiniteGroup) -> PathBuf {
    let serialized = serde_json::to_string(&group.to_file()).expect("group file serializes");
    write(dir, name, &serialized)
}

/// Zeroes every elapsed-time field so reruns can be compared bytewise.
fn normalize_elapsed(report: &str) -> String {
    let needle = "\"elapsed_ms\":";
    let mut out = String::new();
    let mut rest = report;
    while let Some(pos) = rest.find(needle) {
        let after = pos + needle.len();
        out.push_str(&rest[..after]);
        out.push_str(" 0");
        let tail = &rest[after..];
        let consumed = tail
            .find(|c: char| !c.is_whitespace() && !c.is_ascii_digit())
            .unwrap_or(tail.len());
        rest = &tail[consumed..];
    }
    out.push_str(rest);
    out
}

#[test]
fn ring_prob_order4_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "order4.json", ORDER4_NONCOMM);
    let (report, code) = run_json(&["ring", "prob", "order4.json"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["probability"], "5/8");
    assert_eq!(report["brute"], "5/8");
    assert_eq!(report["fast"], "5/8");
    assert_eq!(report["agree"], true);
    assert_eq!(report["manifest"]["subcommand"], "ring prob");
    assert_eq!(report["manifest"]["flags"]["method"], "both");
    let digest = report["manifest"]["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(report["manifest"]["version"].is_string());
}

#[test]
fn ring_prob_single_method_payloads() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "order4.json", ORDER4_NONCOMM);
    let (report, code) =
        run_json(&["ring", "prob", "order4.json", "--method", "brute"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["brute"], "5/8");
    assert!(report.get("fast").is_none());
    let (report, code) = run_json(&["ring", "prob", "order4.json", "--method", "fast"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["fast"], "5/8");
    assert!(report.get("brute").is_none());
}

#[test]
fn ring_prob_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "malformed.json",
        r#"{"moduli": [2, 2], "structure": [[[1,0],[0,3]],[[0,0],[0,0]]]}"#,
    );
    let (stdout, stderr, code) = run(&["ring", "prob", "malformed.json"], dir.path());
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    assert!(stderr.contains("c[0][1][1]"), "error names the offending entry: {stderr}");

    let (_, _, code) = run(&["ring", "prob", "no_such_file.json"], dir.path());
    assert_eq!(code, 2);

    write(dir.path(), "not_json.json", "oops");
    let (_, _, code) = run(&["ring", "prob", "not_json.json"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn ring_check_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "good.json", ORDER4_NONCOMM);
    let (report, code) = run_json(&["ring", "check", "good.json"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["valid"], true);
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);

    // well-formed but not associative: (e0 e0) e1 = 0 != e1 = e0 (e0 e1)
    write(
        dir.path(),
        "broken.json",
        r#"{"moduli": [2, 2], "structure": [[[0,1],[1,0]],[[0,0],[0,0]]]}"#,
    );
    let (stdout, _, code) = run(&["ring", "check", "broken.json"], dir.path());
    assert_eq!(code, 2);
    let report: Value = serde_json::from_str(&stdout).expect("report still prints");
    assert_eq!(report["valid"], false);
    assert!(!report["violations"].as_array().unwrap().is_empty());
}

#[test]
fn group_prob_and_invariants_on_quaternions() {
    let dir = tempfile::tempdir().unwrap();
    write_group(dir.path(), "q8.json", &catalog::quaternion8());
    let (report, code) = run_json(&["group", "prob", "q8.json"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["order"], 8);
    assert_eq!(report["conjugacy_classes"], 5);
    assert_eq!(report["probability"], "5/8");

    let (report, code) = run_json(&["group", "invariants", "q8.json"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["order"], 8);
    assert_eq!(report["center_size"], 2);
    assert_eq!(report["derived_size"], 2);
    assert_eq!(report["nilpotency_class"], serde_json::json!({ "nilpotent": 2 }));
}

#[test]
fn group_formula_check_matches_only_when_applicable() {
    let dir = tempfile::tempdir().unwrap();
    write_group(dir.path(), "q8.json", &catalog::quaternion8());
    let (report, code) = run_json(&["group", "formula-check", "q8.json"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["applicable"], true);
    assert_eq!(report["matches"], true);
    assert_eq!(report["formula_value"], "5/8");

    write_group(dir.path(), "s3.json", &catalog::symmetric3());
    let (report, code) = run_json(&["group", "formula-check", "s3.json"], dir.path());
    // a mismatch outside the identity's scope is expected, not a counterexample
    assert_eq!(code, 0);
    assert_eq!(report["applicable"], false);
    assert_eq!(report["matches"], false);
    assert_eq!(report["formula_value"], "4/9");
    assert_eq!(report["counted"], "1/2");
}

#[test]
fn formula_check_counterexample_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // one generator acts as a left identity, two annihilate: P = 7/16,
    // and the lift's derived subgroup has order 4, so the class-two
    // identity undercounts — a genuine counterexample, exit code 1
    write(
        dir.path(),
        "order8.json",
        r#"{"moduli": [2, 2, 2], "structure": [
            [[0,0,0],[0,0,0],[0,0,0]],
            [[0,0,0],[0,0,0],[0,0,0]],
            [[1,0,0],[0,1,0],[0,0,1]]
        ]}"#,
    );
    let (report, code) = run_json(
        &["lift", "order8.json", "-o", "big.json", "--verify"],
        dir.path(),
    );
    assert_eq!(code, 0, "the lift itself preserves everything it promises");
    assert_eq!(report["verification"]["group_probability"], "7/16");

    let (report, code) = run_json(&["group", "formula-check", "big.json"], dir.path());
    assert_eq!(code, 1);
    assert_eq!(report["applicable"], true);
    assert_eq!(report["matches"], false);
    assert_eq!(report["formula_value"], "11/32");
    assert_eq!(report["counted"], "7/16");
}

#[test]
fn group_rejects_broken_table() {
    let dir = tempfile::tempdir().unwrap();
    // row 1 repeats an entry: not a Latin square
    write(dir.path(), "bad.json", r#"{"order": 2, "table": [[0,1],[1,1]]}"#);
    let (_, stderr, code) = run(&["group", "prob", "bad.json"], dir.path());
    assert_eq!(code, 2);
    assert!(!stderr.is_empty());
}

#[test]
fn lift_writes_verified_group_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "order4.json", ORDER4_NONCOMM);
    let (report, code) = run_json(
        &["lift", "order4.json", "-o", "lifted.json", "--verify"],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert_eq!(report["ring_order"], 4);
    assert_eq!(report["group_order"], 16);
    assert_eq!(report["verification"]["probability_preserved"], true);
    assert_eq!(report["verification"]["class_as_expected"], true);
    assert_eq!(report["verification"]["group_probability"], "5/8");

    // the written file is a loadable group of order 16 with the same P
    let (report, code) = run_json(&["group", "prob", "lifted.json"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["order"], 16);
    assert_eq!(report["probability"], "5/8");
}

#[test]
fn lift_rejects_oversized_ring() {
    let dir = tempfile::tempdir().unwrap();
    // zero ring of order 64 > the lift cap
    let moduli = "[2,2,2,2,2,2]";
    let zeros = "[0,0,0,0,0,0]";
    let row = format!("[{}]", vec![zeros; 6].join(","));
    let structure = format!("[{}]", vec![row.as_str(); 6].join(","));
    write(
        dir.path(),
        "big.json",
        &format!(r#"{{"moduli": {moduli}, "structure": {structure}}}"#),
    );
    let (_, stderr, code) = run(&["lift", "big.json", "-o", "out.json"], dir.path());
    assert_eq!(code, 2);
    assert!(stderr.contains("64"), "names the oversized order: {stderr}");
}

#[test]
fn formula_value_and_stem_value() {
    let dir = tempfile::tempdir().unwrap();
    let (report, code) = run_json(
        &["formula", "value", "-p", "2", "--e", "3", "--f", "1", "--g", "1"],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert_eq!(report["value"], "5/8");

    let (report, code) =
        run_json(&["formula", "stem-value", "-p", "5", "--e", "3", "--f", "1"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["value"], "29/125");

    let (_, stderr, code) = run(
        &["formula", "value", "-p", "4", "--e", "3", "--f", "1", "--g", "1"],
        dir.path(),
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("not prime"));

    // center index gap 1 needs the relaxation flag
    let (_, _, code) = run(
        &["formula", "value", "-p", "2", "--e", "3", "--f", "2", "--g", "1"],
        dir.path(),
    );
    assert_eq!(code, 2);
    let (report, code) = run_json(
        &[
            "formula",
            "value",
            "-p",
            "2",
            "--e",
            "3",
            "--f",
            "2",
            "--g",
            "1",
            "--relax-center-index",
        ],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert_eq!(report["value"], "3/4");
}

#[test]
fn formula_search_reports_zero_hits() {
    let dir = tempfile::tempdir().unwrap();
    let args =
        ["formula", "search-squarefree", "--primes", "2,3", "--max-factors", "2", "--max-exp", "8"];
    let (report, code) = run_json(&args, dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["examined"], 483);
    assert_eq!(report["hits"].as_array().unwrap().len(), 0);
    assert_eq!(report["bounds"]["primes"], serde_json::json!([2, 3]));

    let args =
        ["formula", "search-reciprocal", "--primes", "2,3", "--max-factors", "2", "--max-exp", "8"];
    let (report, code) = run_json(&args, dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["examined"], 483);
    assert_eq!(report["hits"].as_array().unwrap().len(), 0);
}

#[test]
fn formula_witness_hits_the_frozen_shape() {
    let dir = tempfile::tempdir().unwrap();
    let (report, code) = run_json(
        &["formula", "witness", "-p", "2", "-g", "1", "--epsilon", "1/1000"],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert_eq!(report["value"], "1025/2048");
    assert_eq!(report["target"], "1/2");
    assert_eq!(report["distance"], "1/2048");
    assert_eq!(report["within"], true);

    let (_, _, code) =
        run(&["formula", "witness", "-p", "2", "-g", "1", "--epsilon", "0"], dir.path());
    assert_eq!(code, 2);
    let (_, _, code) =
        run(&["formula", "witness", "-p", "2", "-g", "1", "--epsilon", "huh"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn census_run_reports_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let (report, code) =
        run_json(&["census", "run", "--order", "4", "--verify-conjecture"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["total_valid"], 32);
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);
    let histogram = report["histogram"].as_array().unwrap();
    assert_eq!(histogram[0]["probability"], "5/8");
    assert_eq!(histogram[0]["count"], 6);

    let (report, code) = run_json(&["census", "run", "--order", "4", "--dedupe"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["isomorphism_classes"], 11);

    let (report, code) = run_json(
        &["census", "run", "--order", "4", "--dump", "rings"],
        dir.path(),
    );
    assert_eq!(code, 0);
    assert_eq!(report["dumped"], 32);
    let dumped: Vec<_> = std::fs::read_dir(dir.path().join("rings")).unwrap().collect();
    assert_eq!(dumped.len(), 32);

    // the lex-first dump on [2,2] is the zero ring; it round-trips
    let (report, code) =
        run_json(&["ring", "prob", "rings/ring_2x2_0000.json"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(report["probability"], "1/1");

    let (_, _, code) = run(&["census", "run", "--order", "9"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn reruns_are_byte_identical_modulo_elapsed() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "order4.json", ORDER4_NONCOMM);
    let cases: Vec<Vec<&str>> = vec![
        vec!["ring", "prob", "order4.json"],
        vec!["census", "run", "--order", "6", "--verify-conjecture"],
        vec![
            "formula",
            "search-squarefree",
            "--primes",
            "2,3",
            "--max-factors",
            "2",
            "--max-exp",
            "6",
        ],
    ];
    for args in cases {
        let (first, _, code_a) = run(&args, dir.path());
        let (second, _, code_b) = run(&args, dir.path());
        assert_eq!(code_a, code_b);
        assert_eq!(
            normalize_elapsed(&first),
            normalize_elapsed(&second),
            "rerun differs for {args:?}"
        );
    }
}

#[test]
fn thread_count_does_not_change_reports() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "formula",
        "search-reciprocal",
        "--primes",
        "2,3,5",
        "--max-factors",
        "3",
        "--max-exp",
        "6",
    ];
    let mut single = base.to_vec();
    single.extend(["--threads", "1"]);
    let mut multi = base.to_vec();
    multi.extend(["--threads", "4"]);
    let (a, _, code_a) = run(&single, dir.path());
    let (b, _, code_b) = run(&multi, dir.path());
    assert_eq!(code_a, 0);
    assert_eq!(code_b, 0);
    assert_eq!(normalize_elapsed(&a), normalize_elapsed(&b));

    let census_single = ["census", "run", "--order", "8", "--threads", "1"];
    let census_multi = ["census", "run", "--order", "8", "--threads", "4"];
    let (a, _, _) = run(&census_single, dir.path());
    let (b, _, _) = run(&census_multi, dir.path());
    assert_eq!(normalize_elapsed(&a), normalize_elapsed(&b));
}
