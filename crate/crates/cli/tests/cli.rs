//! Runs the `railsynth` binary on the fixtures.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_railsynth")).args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_railsynth"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn temp_model(name: &str, text: &str) -> String {
    let path = std::env::temp_dir().join(format!("railsynth-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_reports_counts() {
    let o = run(&["validate", &data("one_segment.rail")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ok: 2 nodes, 1 segments, 1 trains"));
}

#[test]
fn synth_one_segment() {
    let o = run(&["synth", &data("one_segment.rail")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "status: complete\nresult: pR >= 5\n");
    assert!(stderr(&o).contains("states: "));
}

#[test]
fn synth_json() {
    let o = run(&["synth", &data("one_segment.rail"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["status"], "complete");
    assert_eq!(doc["params"], serde_json::json!(["pR"]));
    assert_eq!(doc["disjuncts"], serde_json::json!(["pR >= 5"]));
}

#[test]
fn check_valuations() {
    let file = data("one_segment.rail");
    let o = run(&["check", &file, "--set", "pR=4"]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "infeasible\n".into()));
    let o = run(&["check", &file, "--set", "pR=5"]);
    assert_eq!(stdout(&o), "feasible\n");
    let o = run(&["check", &file, "--set", "pR=9/2"]);
    assert_eq!(stdout(&o), "infeasible\n");
    let o = run(&["check", &file]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no value for parameter `pR`"));
    let o = run(&["check", &file, "--set", "q=1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn parse_errors_exit_1_with_positions() {
    let file = temp_model("bad.rail", "node A boundary\nsegment 1 = A -- A dur 2\nnode B -\n");
    let o = run(&["validate", &file]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains(":2:"), "{err}");
    assert!(err.contains("SEG_SELF_LOOP"), "{err}");
    assert!(err.contains("INVALID_CHAR"), "{err}");
}

#[test]
fn validation_errors_exit_1() {
    let file = temp_model(
        "invalid.rail",
        "node A station\nnode B boundary\nsegment 1 = A -- B dur 2\ntrain t connection [A, B]\n",
    );
    let o = run(&["synth", &file]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("CONNECTION_START_NOT_BOUNDARY"));
}

#[test]
fn missing_file_and_bad_usage() {
    assert_eq!(run(&["synth", "/nonexistent/model.rail"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["bench", "--nt", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn strict_limit_exits_2() {
    let file = data("fig1_pr.rail");
    let o = run(&["synth", &file, "--max-states", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("status: bounded\n"));
    let o = run(&["synth", &file, "--max-states", "20", "--strict"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ERR_LIMIT"));
}

#[test]
fn bench_pipes_into_synth() {
    let model = run(&["bench", "--ns", "1", "--np", "1", "--nt", "1"]);
    assert_eq!(model.status.code(), Some(0));
    let o = run_stdin(&["synth", "-"], &stdout(&model));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "status: complete\nresult: J >= 43\n");
    let model = run(&["bench", "--scenario", "last"]);
    let o = run_stdin(&["synth", "-"], &stdout(&model));
    assert_eq!(stdout(&o), "status: complete\nresult: bnd >= 43 && J >= 43\n");
}

#[test]
fn translate_prints_the_network() {
    let o = run(&["translate", &data("one_segment.rail")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).is_empty());
}

#[test]
fn oracle_grid_agrees_on_one_segment() {
    let o = run(&["oracle-grid", &data("one_segment.rail"), "--axis", "pR=0:10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("points: 11\n"));
    assert!(out.ends_with("disagreements: 0\n"));
    let o = run(&["oracle-grid", &data("one_segment.rail"), "--axis", "q=0:10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ERR_GRID"));
}
