//! End-to-end checks against the compiled binary: exit codes, file output,
//! and the output-directory environment variable.

use std::process::Command;

fn phi2() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phi2"))
}

#[test]
fn clean_sweep_exits_zero() {
    let out = phi2()
        .args(["verify", "congruence", "--m-max", "2", "--n-max", "16"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["failures"], 0);
}

#[test]
fn usage_error_exits_two() {
    let out = phi2().args(["no-such-command"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identities_markdown_summary() {
    let out = phi2()
        .args([
            "verify",
            "identities",
            "--newton-m-max",
            "3",
            "--halfgrid-m-max",
            "2",
            "--w-precision",
            "60",
            "--format",
            "markdown",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# identities"));
    assert!(text.contains("| points | failures | tight |"));
}

#[test]
fn output_file_respects_env_dir() {
    let dir = std::env::temp_dir().join(format!("phi2-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = phi2()
        .args([
            "gamma",
            "--m",
            "40",
            "--alpha-max",
            "9",
            "--output",
            "gamma.json",
        ])
        .env("PHI2_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let written = std::fs::read_to_string(dir.join("gamma.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["tail_closed_form"], "alpha - 4");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn csv_report_has_header() {
    let out = phi2()
        .args(["verify", "support", "--m-max", "4", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("m,expected_min,expected_max"));
    assert_eq!(text.lines().count(), 5);
}
