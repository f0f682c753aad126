use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_spohnci")).args(args).env("SPOHNCI_THREADS", "2").output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn table_as_csv() {
    let (code, out, _) = run(&["table", "--max-n", "9", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("n,genus,degree\n2,1,4\n3,3,8\n"));
    assert!(out.ends_with("9,1494879,478670\n"));
}

#[test]
fn equations_of_the_example_game() {
    let (code, out, _) = run(&["equations", &data("paper_game.json")]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["F"].as_array().unwrap().len(), 3);
    assert_eq!(v["G"].as_array().unwrap().len(), 3);
}

#[test]
fn usage_and_domain_errors() {
    let (code, _, err) = run(&["invariants", "--n", "3", "--frobnicate"]);
    assert_eq!(code, 2);
    assert_eq!(json(&err)["kind"], "Usage");

    let (code, _, err) = run(&["nash", "/no/such/file.json"]);
    assert_eq!(code, 1);
    assert_eq!(json(&err)["kind"], "Io");

    let (code, _, _) = run(&["--help"]);
    assert_eq!(code, 0);
}

#[test]
fn encode_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("game.json");
    let cert = dir.path().join("cert.json");
    let (code, out, err) = run(&[
        "encode",
        &data("circle.json"),
        "-o",
        game.to_str().unwrap(),
        "--certificate",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["players"], 7);

    let (code, out, err) = run(&[
        "verify",
        &data("circle.json"),
        game.to_str().unwrap(),
        cert.to_str().unwrap(),
        "--samples",
        &data("circle_samples.json"),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn sample_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    let (code, out, err) = run(&["sample", &data("paper_game.json"), "--grid", "1/2:2:3", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = text.lines().count() - 1;
    assert_eq!(rows, json(&out)["points"].as_array().unwrap().len());
    assert!(text.starts_with("t,t11,t12,t21,t22,p111,"));
}

#[test]
fn solver_commands() {
    let (code, out, _) = run(&["degree-witness", &data("paper_game.json"), "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["degree"], 8);

    let (code, out, _) = run(&["nash", &data("paper_game.json")]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["count"]["complex"], 2);

    let (code, out, _) = run(&["export-m2", &data("paper_game.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("J = saturate(I, B);"));

    let (code, _, err) = run(&["nash", &data("paper_game.json"), "--eps=-1"]);
    assert_eq!(code, 1);
    assert_eq!(json(&err)["kind"], "Precondition");
}
