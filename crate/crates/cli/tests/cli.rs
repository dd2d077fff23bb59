use std::fs;
use std::process::{Command, Output};

fn hyrql(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyrql")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_hadamard_with_trace() {
    let o = hyrql(&["run", "hadamard", "--trace"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("[Unit]") && s.contains("[Lbd]") && s.contains("[Qcase0]"), "{s}");
    assert!(s.contains("(3 steps)"), "{s}");
}

#[test]
fn check_reports_rejected_items() {
    let o = hyrql(&["check", "remark"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("reduct : error"));
    assert!(hyrql(&["check", "qs"]).status.success());
}

#[test]
fn translate_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ack.trs");
    let sym = dir.path().join("ack.json");
    let o = hyrql(&["translate", "ackermann", "-o", out.to_str().unwrap(), "--symbols", sym.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("3 rules"), "{}", stdout(&o));
    let trs = fs::read_to_string(&out).unwrap();
    assert!(trs.contains("ack(0, n) -> S(n)"), "{trs}");
    let table: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sym).unwrap()).unwrap();
    assert!(table.is_array() || table.is_object());

    let o = hyrql(&["analyze", out.to_str().unwrap(), "--method", "lpo"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("Proof"));
}

#[test]
fn qi_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("len.json");
    fs::write(
        &good,
        r#"{"S": {"constant": 1, "coefficients": [1]}, "::": {"constant": 1, "coefficients": [1, 1]},
            "len": {"coefficients": [1]}}"#,
    )
    .unwrap();
    let o = hyrql(&["analyze", "len", "--method", "qi", "--interp", good.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"len": {"constant": 2}}"#).unwrap();
    let o = hyrql(&["analyze", "len", "--method", "qi", "--interp", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("CounterRule"));
}

#[test]
fn compare_json() {
    let o = hyrql(&["compare", "ackermann", "--args", "2 3", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["values_agree"], true);
    assert_eq!(v["bound_ok"], true);
    assert_eq!(v["sttrs_value"], "9");
}

#[test]
fn corpus_table_passes() {
    let o = hyrql(&["corpus"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn parse_errors_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.hyrql");
    fs::write(&f, "main (|0>").unwrap();
    assert_eq!(hyrql(&["parse", f.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(hyrql(&["run", "no-such-program"]).status.code(), Some(2));
    assert_eq!(hyrql(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn round_trip_through_parse() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("a.hyrql");
    fs::write(&f, "main (1/sqrt2)*0 + (1/sqrt2)*S 0").unwrap();
    let o = hyrql(&["parse", f.to_str().unwrap()]);
    assert!(o.status.success());
    let g = dir.path().join("b.hyrql");
    fs::write(&g, stdout(&o)).unwrap();
    let o2 = hyrql(&["parse", g.to_str().unwrap()]);
    assert_eq!(stdout(&o), stdout(&o2));
}
