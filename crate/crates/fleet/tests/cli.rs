mod common;

use std::process::{Command, Output};

use common::fixture;
use serde_json::Value;

fn aurcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aurcap"))
        .args(["--log-level", "warn", "--listen", "127.0.0.1:0"])
        .args(args)
        .output()
        .unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn query_subclass() {
    let yes = aurcap(&["query", "subclass", "aur:AutonomousRobot", "aur:Device"]);
    assert!(yes.status.success());
    assert_eq!(String::from_utf8_lossy(&yes.stdout).trim(), "true");
    let no = aurcap(&["query", "subclass", "aur:Device", "aur:Robot"]);
    assert_eq!(String::from_utf8_lossy(&no.stdout).trim(), "false");
    let unknown = aurcap(&["query", "subclass", "nope:X", "aur:Robot"]);
    assert!(!unknown.status.success());
}

#[test]
fn validate_reports_syntax_errors_with_position() {
    let ok = aurcap(&["validate", &path("fleet.ttl"), &path("transport-mission.ttl")]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(stdout_json(&ok)["valid"], true);

    let dir = std::env::temp_dir().join(format!("aurcap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.ttl");
    std::fs::write(&bad, "@prefix ex: <https://example.org/x#> .\n\nex:a ex:b \"open .\n").unwrap();
    let out = aurcap(&["validate", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = stderr_json(&out);
    assert_eq!(err["error"], "Syntax");
    assert_eq!(err["line"], 3);
    assert!(err["file"].as_str().unwrap().ends_with("bad.ttl"));
}

#[test]
fn match_and_plan_against_default_fleet() {
    let m = aurcap(&["match", &path("required-capability.ttl")]);
    assert!(m.status.success(), "{}", String::from_utf8_lossy(&m.stderr));
    let robots: Vec<String> = stdout_json(&m)
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["robot"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(robots, ["https://w3id.org/aur/fleet#Hexacopter2", "https://w3id.org/aur/fleet#Quadrocopter1"]);

    let p = aurcap(&["plan", &path("transport-mission.ttl")]);
    assert!(p.status.success());
    let robots: Vec<String> = stdout_json(&p)["assignments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["robot"].as_str().unwrap().rsplit('#').next().unwrap().to_string())
        .collect();
    assert_eq!(robots, ["Rover1", "Rover1", "Hexacopter2", "Quadrocopter1"]);

    let high = aurcap(&["plan", &path("transport-mission-150.ttl")]);
    assert!(!high.status.success());
    assert_eq!(stderr_json(&high)["error"], "Unsatisfiable");
}

#[test]
fn embedded_run_succeeds() {
    let out = aurcap(&["run", "--embedded", &path("transport-mission.ttl")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["report"]["status"], "Succeeded");
    assert_eq!(v["report"]["steps"].as_array().unwrap().len(), 4);
}

#[test]
fn run_without_registry_fails_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_aurcap"))
        .args(["--listen", "127.0.0.1:1", "run", &path("transport-mission.ttl")])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert_eq!(stderr_json(&out)["error"], "Registry");
}
