use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const MEDICAL: [&str; 4] = ["Infection", "HighWBC", "Fever", "RequiresAntibiotics"];

fn scenarios() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios").to_string()
}

fn ftsc(args: &[&str]) -> Output {
    ftsc_with_stdin(args, None)
}

fn ftsc_with_stdin(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ftsc"))
        .args(args)
        .env_remove("FTSC_MODEL_ENDPOINT")
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    if let Some(input) = stdin {
        child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_medical_certifies_five_theorems() {
    let mut args = vec!["generate"];
    args.extend(MEDICAL);
    let o = ftsc(&args);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["metadata"]["timestamp"], "2023-11-14T22:13:20Z");
    let theorems = report["instances"][0]["theorems"].as_array().unwrap();
    assert_eq!(theorems.len(), 5);
    assert!(theorems.iter().all(|t| t["certified"] == "verified" && t["trace_replayed"] == true));
    let d2: std::collections::BTreeSet<&str> =
        report["instances"][0]["clauses"][1]["literals"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
    assert_eq!(d2, ["HighWBC", "¬Infection"].into_iter().collect());
}

#[test]
fn generate_accepts_negative_literals_after_separator() {
    let o = ftsc(&["generate", "--format", "text", "--", "-a", "b"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("D1 = (¬a)"));
}

#[test]
fn enumerate_three_literals() {
    let o = ftsc(&["enumerate", "a", "b", "c"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 7);
    let ranks: Vec<u64> = lines[..6].iter().map(|l| l["rank"].as_u64().unwrap()).collect();
    assert_eq!(ranks, vec![0, 1, 2, 3, 4, 5]);
    assert!(lines[..6].iter().all(|l| l["certified"] == true));
    let summary = &lines[6]["summary"];
    assert_eq!(summary["ftscs"], 6);
    assert_eq!(summary["theorems"], 24);
    assert_eq!(summary["all_certified"], true);
    assert_eq!(summary["pairwise_distinct"], true);
}

#[test]
fn enumerate_respects_the_cap() {
    let o = ftsc(&["enumerate", "a", "b", "c", "--n-cap", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_accepts_a_fresh_report_and_rejects_a_tampered_one() {
    let mut args = vec!["generate"];
    args.extend(MEDICAL);
    let report = stdout(&ftsc(&args));
    let ok = ftsc_with_stdin(&["verify", "-"], Some(&report));
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let mut value: Value = serde_json::from_str(&report).unwrap();
    let lits = value["instances"][0]["clauses"][2]["literals"].as_array_mut().unwrap();
    let first = lits[0].as_str().unwrap().to_string();
    lits[0] = Value::String(match first.strip_prefix('¬') {
        Some(rest) => rest.to_string(),
        None => format!("¬{first}"),
    });
    let bad = ftsc_with_stdin(&["verify", "-"], Some(&value.to_string()));
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn verify_reads_dimacs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.cnf");
    let cnf = stdout(&ftsc(&["export", "--format", "dimacs", "a", "b", "c"]));
    std::fs::write(&path, &cnf).unwrap();
    let o = ftsc(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // satisfiable, so not a contradiction at all
    std::fs::write(&path, "p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
    assert_eq!(ftsc(&["verify", path.to_str().unwrap()]).status.code(), Some(2));

    std::fs::write(&path, "p cnf 1 1\n1 5 0\n").unwrap();
    assert_eq!(ftsc(&["verify", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(ftsc(&[]).status.code(), Some(1));
    assert_eq!(ftsc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ftsc(&["generate"]).status.code(), Some(1));
    assert_eq!(ftsc(&["generate", "a", "a"]).status.code(), Some(1));
    assert_eq!(ftsc(&["generate", "a", "b", "--permutation", "7"]).status.code(), Some(1));
    assert_eq!(ftsc(&["verify", "/nonexistent/report.json"]).status.code(), Some(1));
    assert_eq!(ftsc(&["--help"]).status.code(), Some(0));
}

#[test]
fn explain_is_byte_identical_across_runs() {
    let dir = scenarios();
    let a = ftsc(&["explain", &dir]);
    let b = ftsc(&["explain", &dir]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stderr.is_empty());
}

#[test]
fn explain_flagged_only_with_fixture_client() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("replies.json");
    std::fs::write(
        &fixture,
        r#"{"entries":[{"scenario":"medical","removed_index":4,
            "response":{"narrative":"D4 automates treatment too eagerly.","score":0.95}}]}"#,
    )
    .unwrap();
    let medical = format!("{}/medical.toml", scenarios());
    let o = ftsc(&["explain", &medical, "--flagged-only", "--fixture", fixture.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ex = report["explanations"].as_array().unwrap();
    assert_eq!(ex.len(), 1);
    assert_eq!(ex[0]["provenance"], "external-model");
    assert_eq!(ex[0]["narrative"], "D4 automates treatment too eagerly.");
    assert_eq!(report["ranking"][0]["priority"], "High");
}

#[test]
fn export_formats() {
    let tptp = stdout(&ftsc(&["export", "--format", "tptp", "a", "b"]));
    assert!(tptp.contains("cnf(d3, axiom, (~a | ~b))."));
    let problem = stdout(&ftsc(&["export", "--format", "tptp", "--problem", "2", "a", "b"]));
    assert!(!problem.contains("cnf(d2,"));
    assert!(problem.contains("fof(theorem_2, conjecture, (a & ~b))."));
    let json = ftsc(&["export", "--format", "json", "a", "b"]);
    assert_eq!(json.status.code(), Some(0));
    let fof = ftsc(&["export", "--format", "tptp", "--mode", "fof", "a", "b"]);
    assert_eq!(fof.status.code(), Some(1));
}
