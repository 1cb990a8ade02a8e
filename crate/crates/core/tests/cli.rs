//! End-to-end runs of the `tropinf` binary on the corpus.

mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use common::corpus;
use tropinf::cli::CliError;
use tropinf::infer::ReportFile;
use tropinf::lang::ReduceError;

fn tropinf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropinf")).args(args).output().expect("binary runs")
}

fn path(name: &str) -> String {
    corpus(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tropinf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn check_reports_the_simple_type() {
    for name in ["m1", "m2", "m3"] {
        let o = tropinf(&["check", &path(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        assert_eq!(stdout(&o).trim(), "Bool", "{name}");
    }
    let o = tropinf(&["check", &path("value"), "--output", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["type"], "Bool");
    let nat = scratch_file("nat.pcfx", "succ 1");
    let o = tropinf(&["check", nat.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "Nat");
}

#[test]
fn malformed_and_missing_files_are_user_errors() {
    let bad = scratch_file("bad.pcfx", "ifz 0 then 1 else");
    let o = tropinf(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1:18"), "{}", stderr(&o));
    let o = tropinf(&["check", "/nonexistent/file.pcfx"]);
    assert_eq!(o.status.code(), Some(1));
    let ill = scratch_file("ill.pcfx", "succ (\\x. x)");
    let o = tropinf(&["check", ill.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = tropinf(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn enumerate_lists_reductions_by_degree() {
    let o = tropinf(&["enumerate", &path("m1"), "--target", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    assert_eq!(rows, ["X1^2", "X1^2*~X1", "~X1^3"]);

    let o = tropinf(&["enumerate", &path("value")]);
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), ["1  ε  -> 1"]);

    let o = tropinf(&["enumerate", &path("m3"), "--budget", "50"]);
    let text = stdout(&o);
    let degrees: Vec<usize> = text
        .lines()
        .filter(|l| l.contains("->"))
        .map(|l| l.split_whitespace().nth(1).unwrap().len())
        .collect();
    assert!(degrees.len() > 3);
    assert!(degrees.windows(2).all(|w| w[0] < w[1]));
    assert!(text.lines().last().unwrap().starts_with("truncated:"), "{text}");

    let o = tropinf(&["enumerate", &path("m1"), "--output", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["trajectories"].as_array().unwrap().len(), 6);
    assert_eq!(v["truncated"], 0);
}

#[test]
fn analyze_prints_polynomial_words_and_cones() {
    let o = tropinf(&["analyze", &path("m4_3")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("polynomial: X1^3 + ~X1^3"), "{text}");
    assert!(text.contains("word 000") && text.contains("word 111"));
    assert!(text.contains("z1 <= z~1"));

    let o = tropinf(&["analyze", &path("m2")]);
    assert!(stdout(&o).contains("degree estimate: 5"));
}

#[test]
fn analyze_json_round_trips() {
    let o = tropinf(&["analyze", &path("m1"), "--output", "json"]);
    let text = stdout(&o);
    let file: ReportFile = serde_json::from_str(&text).unwrap();
    assert_eq!(file.schema, "tropinf-report/1");
    assert_eq!(file.report.polynomial.to_string(), "X1^2 + ~X1^3");
    let again = serde_json::to_string_pretty(&file).unwrap();
    assert_eq!(again.trim(), text.trim());
    let src = std::fs::read_to_string(corpus("m1")).unwrap();
    assert_eq!(file, ReportFile::new(file.report.clone(), &src));
}

#[test]
fn analyze_writes_the_derivation() {
    let out = std::env::temp_dir().join(format!("tropinf-deriv-{}.json", std::process::id()));
    let o = tropinf(&["analyze", &path("m1"), "--derivation", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v.is_object());
    std::fs::remove_file(out).ok();
}

#[test]
fn unreachable_target_warns() {
    let o = tropinf(&["analyze", &path("unreachable"), "--target", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning: no reduction to 0"));
    assert!(stdout(&o).contains("polynomial: 0"));
    assert!(!stdout(&o).contains("trajectory"));
}

#[test]
fn instability_is_a_warning() {
    let o = tropinf(&["analyze", &path("m3"), "--max-rounds", "1", "--window", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("relative to explored trajectories"));
    assert!(stdout(&o).contains("not stable"));
}

#[test]
fn exhaustion_before_any_round_fails() {
    let o = tropinf(&["analyze", &path("m5_5")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("search budget exhausted at n=1, p=1"));
}

#[test]
fn i1_answers_the_most_likely_trajectory() {
    let o = tropinf(&["i1", &path("m1"), "--probs", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let value: f64 = text.lines().next().unwrap().strip_prefix("value: ").unwrap().parse().unwrap();
    assert!((value - 2.0 * 2f64.ln()).abs() < 1e-12);
    assert!(text.contains("probability: 1/4"));
    assert!(text.contains("winner: X1^2  word 00"));

    let o = tropinf(&["i1", &path("m1"), "--probs", "1/4", "--output", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["winners"][0]["monomial"], serde_json::json!([0, 3]));

    let o = tropinf(&["i1", &path("m1"), "--probs", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("outside [0,1]"));
    let o = tropinf(&["i1", &path("m1"), "--probs", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn i2_answers_the_region() {
    let o = tropinf(&["i2", &path("m1"), "--traj", "0,3", "--probs", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "3*z~1 <= 2*z1"), "{text}");
    assert!(text.contains("probabilities in region: yes"));
    let o = tropinf(&["i2", &path("m1"), "--traj", "0,3", "--probs", "0.5"]);
    assert!(stdout(&o).contains("probabilities in region: no"));
    let o = tropinf(&["i2", &path("m1"), "--traj", "1,1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not a selected trajectory"));
    let o = tropinf(&["i2", &path("m1"), "--traj", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes_separate_user_and_internal_errors() {
    assert_eq!(CliError::Reduce(ReduceError::Stuck("0 1".into())).exit_code(), 2);
    assert_eq!(CliError::Usage("bad".into()).exit_code(), 1);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = tropinf::cli::run_with(["tropinf", "check", &path("m1")], &mut out, &mut err);
    assert_eq!(code, 0);
    assert_eq!(String::from_utf8(out).unwrap(), "Bool\n");
    let mut out = Vec::new();
    let code = tropinf::cli::run_with(["tropinf", "--help"], &mut out, &mut err);
    assert_eq!(code, 0);
    assert!(String::from_utf8(out).unwrap().contains("analyze"));
}
