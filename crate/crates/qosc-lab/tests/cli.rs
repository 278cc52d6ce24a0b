use std::path::PathBuf;
use std::process::{Command, Output};

fn suite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_suite"))
        .args(args)
        .env("QOSC_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qosc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn list_and_explain() {
    let out = suite(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("qq-1") && text.contains("rll-affine") && text.contains("kr-limit"));

    let out = suite(&["explain", "qq-1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("QQ-relation") && text.contains("(z_i − z_j)"));

    let out = suite(&["explain", "rll-affine"]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("R23(x,y) L13(y) L12(x)"));

    assert_eq!(suite(&["explain", "no-such-check"]).status.code(), Some(2));
}

#[test]
fn passing_run_writes_versioned_json() {
    let cfg = write_config(
        "pass.conf",
        "profile = 2,1\nsuites = ybe,q-one-site,qq\nq_samples = 1\nybe_samples = 3\n",
    );
    let json = cfg.with_extension("json");
    let out = suite(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "11",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["header"]["schema_version"], 1);
    assert_eq!(report["header"]["seed"], 11);
    assert_eq!(report["header"]["config"]["seed"], "11");
    let records = report["records"].as_array().unwrap();
    assert!(!records.is_empty());
    assert!(records
        .iter()
        .all(|r| r["anchor"].is_string() && r["status"] == "pass"));
    assert!(report["timing"].as_array().is_some());
}

#[test]
fn failing_check_exits_one() {
    // an absurd tolerance override forces failures
    let cfg = write_config(
        "fail.conf",
        "profile = 2,0\nsuites = ybe\nybe_samples = 2\ntol.ybe = 1e-30\n",
    );
    let out = suite(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn config_errors_exit_two() {
    let unsupported = write_config("unsupported.conf", "profile = 2,2\nindex_sets = 1,2\n");
    let out = suite(&["run", "--config", unsupported.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("skip_unsupported"));

    let garbage = write_config("garbage.conf", "profile = 2,1\nwhat is this\n");
    assert_eq!(
        suite(&["run", "--config", garbage.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        suite(&["run", "--config", "/nonexistent/x.conf"])
            .status
            .code(),
        Some(2)
    );

    let ok = write_config(
        "workers.conf",
        "profile = 1,0\nsuites = ybe\nybe_samples = 1\n",
    );
    let out = Command::new(env!("CARGO_BIN_EXE_suite"))
        .args(["run", "--config", ok.to_str().unwrap()])
        .env("QOSC_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
