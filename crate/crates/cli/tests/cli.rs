use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Command, Stdio};

use outbreak_dss::{dispatch, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
use proptest::prelude::*;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("outbreak-dss").chain(args.iter().copied());
    let code = dispatch(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn percent_of(output: &str, state: &str) -> f64 {
    let line = output
        .lines()
        .find(|l| l.split_whitespace().next() == Some(state))
        .unwrap();
    line.split_whitespace().nth(1).unwrap().parse::<f64>().unwrap() * 100.0
}

#[test]
fn infer_symptoms_over_eight() {
    let (code, out, _) = run(&["infer", "--evidence", "Symptoms=>8", "--target", "HasCovid"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("HasCovid\n"));
    assert!((percent_of(&out, "Yes") - 70.73).abs() <= 5.0, "{out}");
}

#[test]
fn infer_several_targets_and_evidence() {
    let (code, out, _) = run(&[
        "infer", "-e", "HasCovid=Yes", "-e", "Gender=Female", "-t", "Vulnerable", "-t", "Age",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("Vulnerable\n") && out.contains("Age\n"));
    let (code, _, err) = run(&["infer", "-e", "Age=18-24", "-e", "Age=25-29", "-t", "HasCovid"]);
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.starts_with("CONFLICTING_EVIDENCE: "));
}

#[test]
fn infer_domain_errors() {
    for (args, code) in [
        (vec!["infer", "-e", "HandWash=Purple", "-t", "HasCovid"], "EVIDENCE_UNKNOWN_STATE"),
        (vec!["infer", "-t", "Mood"], "UNKNOWN_VARIABLE"),
        (vec!["infer", "-e", "HasCovid=Yes", "-t", "HasCovid"], "TARGET_OBSERVED"),
        (vec!["infer", "-e", "InfectionRate=0", "-e", "HasCovid=Yes", "-t", "Age"], "IMPOSSIBLE_EVIDENCE"),
        (vec!["infer", "-t", "Age", "--model", "/definitely/not/here.json"], "MODEL_UNREADABLE"),
        (vec!["scenario", "--id", "7"], "SCENARIO_NOT_FOUND"),
        (vec!["risk", "--fpr", "2", "--fnr", "0.1"], "RATE_OUT_OF_RANGE"),
    ] {
        let (exit, out, err) = run(&args);
        assert_eq!(exit, EXIT_DOMAIN, "{args:?}");
        assert!(out.is_empty());
        assert!(err.starts_with(&format!("{code}: ")), "{args:?}: {err}");
    }
}

#[test]
fn risk_examples() {
    let cases = [
        (vec!["risk", "--fpr", "0.01", "--fnr", "0.20", "--impacts", "4,3,2,1"], "risk_p=3.2000 risk_n=1.0100\n"),
        (vec!["risk", "--fpr", "0.1088", "--fnr", "0.0979"], "risk_p=3.0979 risk_n=1.1088\n"),
        (vec!["risk", "--fpr", "1", "--fnr", "1"], "risk_p=4.0000 risk_n=2.0000\n"),
        (vec!["risk"], "risk_p=3.0979 risk_n=1.1088\n"),
    ];
    for (args, expected) in cases {
        assert_eq!(run(&args), (EXIT_OK, expected.to_string(), String::new()), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec![],
        vec!["frobnicate"],
        vec!["infer"],
        vec!["infer", "-e", "NoEquals", "-t", "HasCovid"],
        vec!["risk", "--impacts", "4,3,2"],
        vec!["risk", "--impacts", "4,x,2,1"],
        vec!["scenario", "--id", "2", "--format", "xml"],
        vec!["scenario"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("serve"));
}

#[test]
fn validate_files() {
    let dir = tempfile::tempdir().unwrap();
    let cyclic = dir.path().join("cyclic.json");
    std::fs::write(
        &cyclic,
        r#"{"variables":[{"name":"A","states":["0","1"]},{"name":"B","states":["0","1"]}],
            "cpts":[{"child":"A","parents":["B"],"probabilities":[0.5,0.5,0.5,0.5]},
                    {"child":"B","parents":["A"],"probabilities":[0.5,0.5,0.5,0.5]}]}"#,
    )
    .unwrap();
    let (code, _, err) = run(&["validate", cyclic.to_str().unwrap()]);
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.starts_with("CYCLE_DETECTED: "), "{err}");

    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/roosevelt_model.json");
    let (code, out, _) = run(&["validate", shipped]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "ok: 15 variables, 15 CPTs\n"));

    let (code, out, _) = run(&["validate"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("HasCovid cells clamped to 1: "));
    assert!(out.contains("InfectionRate=70 PreventionIndex=1.0 Vulnerable=Yes raw=1.4000"));
}

#[test]
fn scenario_with_custom_model_file() {
    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/roosevelt_model.json");
    let (code, file_csv, _) = run(&["scenario", "--id", "3", "--format", "csv", "--model", shipped]);
    assert_eq!(code, EXIT_OK);
    let (_, builtin_csv, _) = run(&["scenario", "--id", "3", "--format", "csv"]);
    // Six-decimal rounding in the file does not move two-decimal output.
    assert_eq!(file_csv, builtin_csv);
    let (_, seq, _) = run(&["scenario", "--id", "1", "--sequential"]);
    let (_, par, _) = run(&["scenario", "--id", "1"]);
    assert_eq!(seq, par);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn evidence_flags_split_at_the_first_equals(state in "[ -~]{1,12}") {
        // The Symptoms node does not have these states, so the error must name the state verbatim.
        prop_assume!(!["0", "1-3", "4-5", "6-8", ">8"].contains(&state.as_str()));
        let flag = format!("Symptoms={state}");
        let (code, _, err) = run(&["infer", "-e", &flag, "-t", "HasCovid"]);
        prop_assert_eq!(code, EXIT_DOMAIN);
        prop_assert!(err.starts_with("EVIDENCE_UNKNOWN_STATE: "));
        prop_assert!(err.contains(&state), "{}", err);
    }
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_outbreak-dss"))
}

#[test]
fn binary_exit_codes() {
    let out = binary().args(["risk", "--fpr", "0.01", "--fnr", "0.2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "risk_p=3.2000 risk_n=1.0100\n");
    let out = binary().args(["infer", "-t", "Mood"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("UNKNOWN_VARIABLE: "));
    let out = binary().arg("nonsense").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

/// Minimal HTTP/1.1 exchange; returns status and body.
fn http(addr: &str, method: &str, path: &str, body: &str) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let (head, body) = raw.split_once("\r\n\r\n").unwrap();
    let status = head.split_whitespace().nth(1).unwrap().parse().unwrap();
    (status, body.to_string())
}

struct Server(std::process::Child, String);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn start_server(data_dir: &std::path::Path, port_env: Option<&str>, port_flag: Option<&str>) -> Server {
    let mut cmd = binary();
    cmd.arg("serve").arg("--data-dir").arg(data_dir);
    cmd.env_remove("OUTBREAK_DSS_PORT");
    if let Some(p) = port_env {
        cmd.env("OUTBREAK_DSS_PORT", p);
    }
    if let Some(p) = port_flag {
        cmd.args(["--port", p]);
    }
    let mut child = cmd.stdout(Stdio::piped()).stderr(Stdio::null()).spawn().unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").unwrap_or_else(|| panic!("{line}")).to_string();
    Server(child, addr)
}

#[test]
fn serve_honours_env_port_and_answers() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path(), Some("0"), None);
    assert!(!server.1.ends_with(":8080"), "env port ignored: {}", server.1);
    let (status, body) = http(&server.1, "GET", "/model", "");
    assert_eq!(status, 200);
    assert!(body.contains("\"HasCovid\""));
    let (status, body) = http(&server.1, "POST", "/query", r#"{"evidence":{"HandWash":"Purple"},"targets":["HasCovid"]}"#);
    assert_eq!(status, 422);
    assert!(body.contains("EVIDENCE_UNKNOWN_STATE"));
}

#[test]
fn sessions_persist_across_server_restarts() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let server = start_server(dir.path(), None, Some("0"));
        let (status, body) = http(&server.1, "POST", "/sessions", r#"{"label":"x","evidence":{"Symptoms":"0"}}"#);
        assert_eq!(status, 201);
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        v["id"].as_str().unwrap().to_string()
    };
    let server = start_server(dir.path(), None, Some("0"));
    let (status, body) = http(&server.1, "GET", &format!("/sessions/{id}"), "");
    assert_eq!(status, 200);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["evidence"], serde_json::json!({"Symptoms": "0"}));
}

#[test]
fn binary_csv_matches_live_service() {
    let dir = tempfile::tempdir().unwrap();
    let server = start_server(dir.path(), None, Some("0"));
    for id in 1..=4 {
        let id = id.to_string();
        let runs: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let out = binary().args(["scenario", "--id", &id, "--format", "csv"]).output().unwrap();
                assert_eq!(out.status.code(), Some(0));
                out.stdout
            })
            .collect();
        assert_eq!(runs[0], runs[1], "scenario {id} differs between runs");
        let (status, body) = http(&server.1, "POST", &format!("/scenarios/{id}/run?format=csv"), "");
        assert_eq!(status, 200);
        assert_eq!(String::from_utf8(runs[0].clone()).unwrap(), body, "scenario {id}");
    }
}
