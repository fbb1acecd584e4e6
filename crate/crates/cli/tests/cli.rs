use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn eerq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eerq")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("valid json")
}

fn check_envelope(v: &Value) {
    for k in ["command", "status", "answers", "diagnostics", "result"] {
        assert!(v.get(k).is_some(), "missing {k} in {v}");
    }
    assert!(v["status"].is_string());
    assert!(v["diagnostics"].is_object());
    assert!(v["answers"].is_null() || v["answers"].is_array());
}

#[test]
fn answer_prints_the_manager() {
    let o = eerq(&["answer", "--schema", &data("company.eer"), "--data", &data("manager.facts"), "--query", &data("manages_dept.cq")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "m\n");
    for path in ["rewrite", "chase", "both"] {
        let o = eerq(&[
            "answer", "--schema", &data("company.eer"), "--data", &data("manager.facts"),
            "--query", &data("manages_dept.cq"), "--path", path,
        ]);
        assert_eq!(stdout(&o), "m\n", "{path}: {}", stderr(&o));
    }
}

#[test]
fn answer_json_envelope() {
    let o = eerq(&[
        "answer", "--schema", &data("company.eer"), "--data", &data("manager.facts"),
        "--query", &data("manages_dept.cq"), "--emit", "json", "--path", "rewrite",
    ]);
    let v = json(&o);
    check_envelope(&v);
    assert_eq!(v["status"], "consistent");
    assert_eq!(v["answers"], serde_json::json!([["m"]]));
    assert_eq!(v["diagnostics"]["path"], "rewriting");
    assert_eq!(v["diagnostics"]["c_d"], 2);
    assert!(v["diagnostics"].get("timings_ms").is_none());
}

#[test]
fn players_need_the_chase() {
    let base = ["answer", "--schema", &data("players.cds"), "--data", &data("players.facts"), "--query", &data("teams.cq")];
    let o = eerq(&base);
    assert_eq!(stdout(&o), "acMilan\nroma\n");
    assert!(stderr(&o).contains("not a CD set"));
    let mut strict = base.to_vec();
    strict.push("--strict-cds");
    let o = eerq(&strict);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR not-cd:"));
}

#[test]
fn infinite_model_instance_has_no_answers() {
    let o = eerq(&[
        "answer", "--schema", &data("infinite.eer"), "--data", &data("infinite.facts"),
        "--query", &data("in_a.cq"), "--path", "both",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "");
}

#[test]
fn check_reports_the_witness() {
    let o = eerq(&["check", "--schema", &data("failing.cds"), "--data", &data("failing.facts")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("chase does not exist\n"), "{out}");
    assert!(out.contains("witness: s(a,b) s(a,c)"), "{out}");
    let o = eerq(&["check", "--schema", &data("failing.cds"), "--data", &data("failing.facts"), "--emit", "json"]);
    let v = json(&o);
    check_envelope(&v);
    assert_eq!(v["result"]["exists"], false);
    assert_eq!(v["result"]["witness"][1]["args"], serde_json::json!(["a", "c"]));
    let o = eerq(&["check", "--schema", &data("company.eer"), "--data", &data("manager.facts")]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "chase exists\n".to_string()));
}

#[test]
fn inconsistent_answers() {
    let args = ["answer", "--schema", &data("failing.cds"), "--data", &data("failing.facts"), "--query", &data("teams.cq")];
    let o = eerq(&args);
    assert_eq!(o.status.code(), Some(2), "team is not in the schema");
    let q = std::env::temp_dir().join(format!("eerq-cli-{}.cq", std::process::id()));
    std::fs::write(&q, "q(X) :- e1(X).").unwrap();
    let qs = q.to_string_lossy().into_owned();
    let o = eerq(&["answer", "--schema", &data("failing.cds"), "--data", &data("failing.facts"), "--query", &qs]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("INCONSISTENT key(s) = {1}"), "{}", stdout(&o));
    let o = eerq(&[
        "answer", "--schema", &data("failing.cds"), "--data", &data("failing.facts"), "--query", &qs,
        "--fail-on-inconsistent",
    ]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::remove_file(q).ok();
}

#[test]
fn translate_lists_thirteen_dependencies() {
    let o = eerq(&["translate", "--schema", &data("company.eer")]);
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("id:") || l.starts_with("kd:")).count(), 13);
    assert!(out.contains("id: manager[1] <= employee[1]"));
    assert!(out.contains("# sigma13, by rule 11"));
    let example = eerq(&["translate", "--schema", "example"]);
    assert_eq!(stdout(&example), out);
    let v = json(&eerq(&["translate", "--schema", &data("company.eer"), "--emit", "json"]));
    check_envelope(&v);
    assert_eq!(v["result"]["dependencies"].as_array().unwrap().len(), 13);
}

#[test]
fn chase_text_and_dot() {
    let o = eerq(&["chase", "--schema", &data("company.eer"), "--data", &data("manager.facts")]);
    assert_eq!(stdout(&o), "dept(d) 1\nemployee(m) 1\nmanager(m) 0\nmanages(m,d) 1\nworks_in(m,d) 0\n");
    let o = eerq(&["chase", "--schema", &data("company.eer"), "--data", &data("manager.facts"), "--emit", "dot"]);
    assert!(stdout(&o).starts_with("digraph chase {"));
    let o = eerq(&["chase", "--schema", &data("failing.cds"), "--data", &data("failing.facts")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("# failed: key(s) = {1}"));
    let v = json(&eerq(&["chase", "--schema", &data("company.eer"), "--data", &data("manager.facts"), "--eq", "--emit", "json"]));
    check_envelope(&v);
    assert!(v["result"]["facts"].as_array().unwrap().iter().any(|f| f["fact"]["pred"] == "eq"));
}

#[test]
fn rewrite_outputs() {
    let args = ["rewrite", "--schema", &data("company.eer"), "--query", &data("manages_dept.cq"), "--cd-bound", "2"];
    let o = eerq(&args);
    let out = stdout(&o);
    assert!(out.contains("works_in@[*,f_sigma10_2(*)](X,X) :- employee@[*](X)."), "{out}");
    assert!(out.trim_end().ends_with("?- q@[*]."));
    let mut staged = args.to_vec();
    staged.push("--stages");
    let o = eerq(&staged);
    for s in ["# pi_eq", "# pi_kd", "# pi_id", "# q_eq", "# pi_dc", "# pi_fin"] {
        assert!(stdout(&o).contains(s), "{s}");
    }
    let mut dot = args.to_vec();
    dot.extend(["--emit", "dot"]);
    assert!(stdout(&eerq(&dot)).starts_with("digraph dummy_chase {"));
    let mut js = args.to_vec();
    js.extend(["--emit", "json"]);
    let v = json(&eerq(&js));
    check_envelope(&v);
    assert_eq!(v["result"]["query"], "q@[*]");
}

#[test]
fn validate_reports_violations() {
    let bad = std::env::temp_dir().join(format!("eerq-cli-{}.eer", std::process::id()));
    std::fs::write(&bad, "entity A\nrelationship R among A, Missing\n").unwrap();
    let b = bad.to_string_lossy().into_owned();
    let o = eerq(&["validate", "--schema", &b]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("Missing"));
    let v = json(&eerq(&["validate", "--schema", &b, "--emit", "json"]));
    check_envelope(&v);
    assert_eq!(v["status"], "invalid");
    let o = eerq(&["validate", "--schema", &data("company.eer")]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "ok\n".to_string()));
    std::fs::remove_file(bad).ok();
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let o = eerq(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("ERROR usage:"));
    let o = eerq(&["answer", "--schema", &data("company.eer"), "--data", "/nonexistent.facts", "--query", &data("in_a.cq")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("ERROR io:"));
    let o = eerq(&["translate", "--schema", &data("manager.facts")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("ERROR parse:"));
    assert_eq!(stderr(&o).lines().count(), 1);
    let o = eerq(&["translate", "--schema", &data("company.eer"), "--emit", "dot"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn large_bounds_need_confirmation() {
    let base = [
        "answer", "--schema", &data("company.eer"), "--data", &data("manager.facts"),
        "--query", &data("manages_dept.cq"), "--cd-bound", "1000", "--path", "chase",
    ];
    let o = eerq(&base);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR confirm:"));
    let mut ok = base.to_vec();
    ok.push("--confirm");
    assert_eq!(stdout(&eerq(&ok)), "m\n");
}

#[test]
fn output_is_byte_identical_across_runs() {
    let runs: Vec<Vec<&str>> = vec![
        vec!["translate", "--schema", "example", "--emit", "json"],
        vec!["rewrite", "--schema", "example", "--query", "QUERY", "--stages"],
        vec!["answer", "--schema", "example", "--data", "DATA", "--query", "QUERY", "--emit", "json", "--path", "rewrite"],
        vec!["chase", "--schema", "example", "--data", "DATA", "--emit", "dot"],
    ];
    let (d, q) = (data("manager.facts"), data("manages_dept.cq"));
    for r in runs {
        let args: Vec<&str> = r.iter().map(|a| if *a == "DATA" { d.as_str() } else if *a == "QUERY" { q.as_str() } else { a }).collect();
        let first = eerq(&args).stdout;
        for _ in 0..3 {
            assert_eq!(eerq(&args).stdout, first, "{args:?}");
        }
    }
}
