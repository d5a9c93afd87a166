//! End-to-end runs of the `renyi-epi` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renyi-epi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn header(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).unwrap();
    let first = text.lines().next().unwrap();
    serde_json::from_str(first.strip_prefix("# ").expect("header marker")).unwrap()
}

#[test]
fn coverzhang_writes_csv_and_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cz.csv");
    let res = run(&["coverzhang", "--r", "2", "--output", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let row: Vec<f64> = text
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!((row[1] - 2f64.ln()).abs() < 1e-4);
    assert!((row[2] - (4.0f64 / 3.0).ln()).abs() < 1e-4);
    let head = header(&out);
    assert_eq!(head["config"]["params"]["r"], 2.0);
    assert_eq!(head["config"]["seed"], 0);
    assert!(head["version"].is_string());
    let jsonl = std::fs::read_to_string(out.with_extension("jsonl")).unwrap();
    let transfer: Value = serde_json::from_str(jsonl.lines().nth(1).unwrap()).unwrap();
    assert_eq!(transfer["delta"], 0.5);
}

#[test]
fn constants_bundle_on_stdout() {
    let res = run(&[
        "constants",
        "--s",
        "-0.1",
        "--r",
        "0.5",
        "--d",
        "1",
        "--n",
        "2",
    ]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    let bundle: Value = text
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .find(|v| v.get("c").is_some())
        .unwrap();
    assert!((bundle["c"].as_f64().unwrap() - 0.742241441132701).abs() < 1e-12);
}

#[test]
fn configuration_errors_exit_2() {
    let res = run(&["counterexample", "--r", "0.4"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("r ≥ 1/3 unsupported"));
    let res = run(&["constants", "--s", "-2", "--d", "1"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("s > −1/d required"));
    let res = run(&["constants", "--r", "1"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("r ≠ 1"));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn refuted_certificate_exits_1() {
    let res = run(&[
        "certify",
        "--density",
        "two-block",
        "--s",
        "1",
        "--h",
        "0.01",
    ]);
    assert_eq!(res.status.code(), Some(1));
    let res = run(&[
        "certify",
        "--density",
        "gaussian",
        "--s",
        "0",
        "--h",
        "0.01",
    ]);
    assert_eq!(res.status.code(), Some(0));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    let p = path.to_str().unwrap();
    let mut outputs = Vec::new();
    for seed in ["42", "42", "43"] {
        let res = run(&["verify-epi", "--pairs", "3", "--seed", seed, "--output", p]);
        assert_eq!(res.status.code(), Some(0));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_ne!(outputs[0], outputs[2]);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "coverzhang", "params": {"r": [0.7]}, "seed": 9}"#,
    )
    .unwrap();
    let out = dir.path().join("o.csv");
    let res = run(&[
        "coverzhang",
        "--config",
        cfg.to_str().unwrap(),
        "--r",
        "2",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0));
    let head = header(&out);
    assert_eq!(head["config"]["params"]["r"], 2.0);
    assert_eq!(head["config"]["seed"], 9);
    let res = run(&["constants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    std::fs::write(&cfg, r#"{"command": "bogus"}"#).unwrap();
    assert_eq!(
        run(&["coverzhang", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
