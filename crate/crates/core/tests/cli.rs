use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn indyscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indyscope"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn lines(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn analyze_writes_dumps_and_report() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().join("ll");
    let o = indyscope(&["analyze", "late_linking", "--out", dir.to_str().unwrap(), "--dump", "MHCGE,CGEB"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "Reachable.csv",
        "CallGraphEdge.csv",
        "VarPointsTo.csv",
        "UnmodeledInvokeAPI.csv",
        "report.json",
        "MHCGE.csv",
        "CGEB.csv",
    ] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    let counts = report["edgeCountsByKind"].as_object().unwrap();
    assert_eq!(counts.len(), 6);
    let total: u64 = counts.values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total as usize, lines(&dir.join("CallGraphEdge.csv")));
    assert_eq!(report["reachableCount"].as_u64().unwrap() as usize, lines(&dir.join("Reachable.csv")));
    assert!(counts["indy"].as_u64().unwrap() >= 1);
    assert!(fs::read_to_string(dir.join("CallGraphEdge.csv")).unwrap().contains("C.run@2\tA.print\tindy"));
}

#[test]
fn analyze_dump_all_and_unknown_relation() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().join("all");
    let o = indyscope(&["analyze", "lambda_consumer", "--out", dir.to_str().unwrap(), "--dump", "all"]);
    assert!(o.status.success());
    assert!(dir.join("LambdaCGE.csv").is_file());
    assert!(dir.join("ParamsReceiverShiftRight.csv").is_file());

    let bad = out.path().join("bad");
    let o = indyscope(&["analyze", "lambda_consumer", "--out", bad.to_str().unwrap(), "--dump", "Nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Nope"));
}

#[test]
fn empty_program_analyzes() {
    let facts = tempfile::tempdir().unwrap();
    let out = facts.path().join("out");
    let o = indyscope(&["analyze", facts.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "fact files are required");
    indyscope::ir::FactSet::new().write_dir(facts.path()).unwrap();
    let o = indyscope(&["analyze", facts.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(lines(&out.join("Reachable.csv")), 0);
}

#[test]
fn malformed_input_exits_2() {
    let facts = tempfile::tempdir().unwrap();
    fs::write(facts.path().join("Alloc.facts"), "only-one-column\n").unwrap();
    let out = facts.path().join("out");
    let o = indyscope(&["analyze", facts.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = indyscope(&["check", "/definitely/not/here"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_needs_expectations() {
    let facts = tempfile::tempdir().unwrap();
    let o = indyscope(&["check", facts.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_reports_per_method() {
    let o = indyscope(&["check", "mref_constructor"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("Box.close"));
    assert!(text.contains("check passed"));
    let o = indyscope(&["check", "sam_conversion", "--no-lambdas"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn round_limit_exits_3() {
    let out = tempfile::tempdir().unwrap();
    let o = indyscope(&["analyze", "late_linking", "--out", out.path().to_str().unwrap(), "--max-rounds", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn corpus_listing() {
    let o = indyscope(&["corpus", "list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().count() >= 12);
    assert!(text.lines().any(|l| l.starts_with("dynamo ") && l.contains("+1 -1")));

    let o = indyscope(&["corpus", "list", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"late_linking"));

    let empty = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_indyscope"))
        .args(["corpus", "list"])
        .env("INDYSCOPE_CORPUS", empty.path().join("missing"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(indyscope(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(indyscope(&["analyze", "late_linking"]).status.code(), Some(2));
}
