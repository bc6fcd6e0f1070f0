use std::process::{Command, Output};

use serde_json::Value;

fn signspan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signspan"))
        .args(args)
        .env_remove("SIGNSPAN_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn config_line(text: &str) -> Value {
    let line = text.lines().find_map(|l| l.strip_prefix("# config ")).expect("config line");
    serde_json::from_str(line).unwrap()
}

#[test]
fn estimate_replays_from_embedded_config() {
    let first = signspan(&["estimate", "--event", "kso", "-p", "4", "-n", "4", "--trials", "3000", "--seed", "9"]);
    assert!(first.status.success());
    let text = stdout(&first);
    let argv: Vec<String> = config_line(&text)["argv"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let args: Vec<&str> = argv.iter().map(String::as_str).collect();
    let again = signspan(&args);
    assert_eq!(stdout(&again), text);
}

#[test]
fn worker_count_does_not_change_estimates() {
    let base = ["estimate", "--event", "singular", "-n", "5", "--trials", "20000", "--seed", "3", "--format", "json"];
    let rows = |w: &str| {
        let mut args = base.to_vec();
        args.extend(["--workers", w]);
        let v: Value = serde_json::from_str(&stdout(&signspan(&args))).unwrap();
        v["estimates"][0]["hits"].clone()
    };
    assert_eq!(rows("1"), rows("4"));
}

#[test]
fn env_workers_is_overridden_by_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_signspan"))
        .args(["estimate", "--event", "singular", "-n", "3", "--trials", "100", "--seed", "1", "--workers", "2"])
        .env("SIGNSPAN_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(config_line(&stdout(&out))["workers"], 2);
    let out = Command::new(env!("CARGO_BIN_EXE_signspan"))
        .args(["estimate", "--event", "singular", "-n", "3", "--trials", "100", "--seed", "1"])
        .env("SIGNSPAN_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(config_line(&stdout(&out))["workers"], 3);
}

#[test]
fn exact_kso_count() {
    let out = signspan(&["exact", "--event", "kso", "-p", "2", "-n", "3"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["total"], "64");
    assert_eq!(v["config"]["subcommand"], "exact");
}

#[test]
fn matrix_file_reports_census() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    std::fs::write(&path, "+++\n++-\n").unwrap();
    let out = signspan(&["exact", "--matrix", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["p"], 2);
    assert_eq!(v["census"]["1"], 2);
}

#[test]
fn eta_pass_and_fail_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(
        &path,
        r#"{"ambient":3,"points":[[1,0,0],[0,1,0],[0,0,1],[1,1,1]],"weights":[[1,0,0,0],["1/4","1/4","1/4","1/4"]]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let ok = signspan(&["eta", "--config", p]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("PASS"));
    assert_eq!(signspan(&["eta", "--config", p, "--field", "3"]).status.code(), Some(0));
    let bad = signspan(&["eta", "--config", p, "--inject-fault"]);
    assert_eq!(bad.status.code(), Some(2));
    std::fs::write(&path, r#"{"ambient":2,"points":[[1,0]],"weights":["1/2"]}"#).unwrap();
    assert_eq!(signspan(&["eta", "--config", p]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(signspan(&["estimate", "--event", "kso", "-n", "3"]).status.code(), Some(1));
    assert_eq!(signspan(&["estimate", "--event", "nope", "-p", "3", "-n", "3", "--seed", "1"]).status.code(), Some(1));
    assert_eq!(signspan(&["exact", "-n", "3"]).status.code(), Some(1));
    assert_eq!(signspan(&["bounds", "-n", "5..2"]).status.code(), Some(1));
    assert_eq!(signspan(&["--help"]).status.code(), Some(0));
}

#[test]
fn bounds_table_has_header_and_rows() {
    let out = signspan(&["bounds", "-n", "4..5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines().skip(1);
    assert_eq!(lines.next().unwrap(), "name,n,p,m,epsilon,c,value_exact,value_real");
    assert!(lines.clone().any(|l| l.starts_with("lemma_b1,5,")));
    assert!(lines.all(|l| l.split(',').count() == 8));
}

#[test]
fn verify_subset_and_fault() {
    let out = signspan(&["verify", "--only", "degenerate,support2", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let out = signspan(&["verify", "--only", "theorem3", "--samples", "5", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(signspan(&["verify", "--only", "bogus"]).status.code(), Some(1));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = signspan(&["bounds", "-n", "3", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("schlafli,3,"));
}
