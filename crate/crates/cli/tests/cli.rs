//! End-to-end checks of the command-line surface: exit codes, report
//! schema, determinism, and the documented subcommand examples.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mpec-kit"))
}

fn instance(name: &str) -> String {
    format!("{}/instances/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn multipliers_example_reports_extreme_points() {
    let out = run(&["multipliers", &instance("q4.json"), "--point", "2,0,1,0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("(1/2, 0)"));
    assert!(text.contains("(0, 1)"));
    assert!(text.contains("SMFCQ (singleton M): fails"));
}

#[test]
fn stationarity_example_lists_the_solved_certificate() {
    let out = run(&[
        "stationarity",
        &instance("q7.json"),
        "--point",
        "0,0,0",
        "--all-partitions",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("stationary (all partition systems feasible)"));
    assert!(text.contains("systems solved: 4"));
    assert!(text.contains("pi=(1, 0)"));
}

#[test]
fn cones_example_reports_the_cq_failure() {
    let out = run(&["cones", &instance("q6.json"), "--point", "0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("status: certified"));
    assert!(text.contains("verdict: fails"));
    assert!(text.contains("witness in the symmetric difference: (0, 1)"));
}

#[test]
fn empty_multiplier_set_is_reported_explicitly() {
    let out = run(&["multipliers", &instance("q9.json"), "--point", "0,0,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("M(z): (empty)"));
}

#[test]
fn inconclusive_tangent_yields_exit_code_two() {
    // Two free upper-level variables leave the cubic branch uncertified.
    let doc = r#"{"n":2,"m":1,"l":1,"f":"0","F":["x1^3+y1"],"g":["-y1"],"Z":null,"asserted_cqs":[]}"#;
    let path = std::env::temp_dir().join("mpec_kit_heuristic_instance.json");
    std::fs::write(&path, doc).unwrap();
    let out = run(&["cones", path.to_str().unwrap(), "--point", "0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("heuristic"));
    assert!(text.contains("status: inconclusive"));
}

#[test]
fn general_vi_instance_gets_sampling_only_tangent() {
    let out = run(&["cones", &instance("q4.json"), "--point", "2,0,1,0"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("heuristic"));
    assert!(text.contains("sampling"));
}

#[test]
fn unreadable_file_is_an_error() {
    let out = run(&["check", "/nonexistent/q.json", "--point", "0,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn wrong_point_length_is_an_error() {
    let out = run(&["check", &instance("q2.json"), "--point", "0,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n+m"));
}

#[test]
fn json_reports_are_schema_stable_and_deterministic() {
    let args = [
        "cones",
        &instance("q6.json"),
        "--point",
        "0,0",
        "--format",
        "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout, "identical invocations must be byte-identical");
    let value: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(value["schema"], "report-v1");
    assert_eq!(value["command"], "cones");
    assert!(value["instance_digest"].as_str().unwrap().len() == 64);
    assert!(value["sections"].as_array().unwrap().len() >= 4);
}

#[test]
fn text_and_json_carry_the_same_verdicts() {
    let text = stdout(&run(&["check", &instance("q2.json"), "--point", "0,0,0"]));
    let json_out = run(&[
        "check",
        &instance("q2.json"),
        "--point",
        "0,0,0",
        "--format",
        "json",
    ]);
    let value: serde_json::Value = serde_json::from_slice(&json_out.stdout).unwrap();
    assert!(text.contains("feasible: true"));
    let feasibility = &value["sections"][0]["entries"];
    assert_eq!(feasibility[0][0], "feasible");
    assert_eq!(feasibility[0][1], "true");
}

#[test]
fn kkt_reformulation_prints_the_scalar_system() {
    let out = run(&["kkt-reformulate", &instance("q1.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("y1 - y2"), "Lagrangian row missing: {text}");
    assert!(text.contains("u = y2, v = y1"), "pair missing: {text}");
}

#[test]
fn critical_defaults_lambda_for_singleton_m() {
    let out = run(&[
        "critical",
        &instance("q7.json"),
        "--point",
        "0,0,0",
        "--dx",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("directional critical set"));
    assert!(text.contains("lambda defaulted"));
}

#[test]
fn explicit_multiplier_list_file_is_accepted() {
    let path = std::env::temp_dir().join("mpec_kit_multipliers_q4.json");
    std::fs::write(&path, r#"[["1/2", 0], [0, 1]]"#).unwrap();
    let out = run(&[
        "stationarity",
        &instance("q4.json"),
        "--point",
        "2,0,1,0",
        "--multipliers",
        &format!("list:{}", path.display()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("user-supplied"));
}

#[test]
fn cross_check_runs_clean() {
    let out = run(&["cross-check", "--trials", "8", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("mismatches: 0"));
}
