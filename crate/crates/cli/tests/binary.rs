mod common;

use std::process::Command;

fn coopbif(root: &std::path::Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_coopbif")).args(args).env(coopbif::OUTPUT_ROOT_ENV, root).output().unwrap()
}

fn config(name: &str) -> String {
    common::configs_dir().join(name).display().to_string()
}

#[test]
fn branch_succeeds_and_prints_verdicts() {
    let root = tempfile::tempdir().unwrap();
    let out = coopbif(root.path(), &["branch", "--config", &config("tp1.json"), "--t-max", "1.5t1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS  branch reached t_max"));
    assert!(!stdout.contains("FAIL"));
    let m = coopbif::RunManifest::load(&root.path().join("runs/tp1")).unwrap();
    assert_eq!(m.config["knobs"]["t_max"], "1.5t1");
    assert_eq!(m.config["experiment"], "branch");
}

#[test]
fn refusal_exits_3() {
    let root = tempfile::tempdir().unwrap();
    let out = coopbif(root.path(), &["threshold", "--config", &config("refused.json")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("z_strictly_positive"));
}

#[test]
fn config_errors_exit_2() {
    let root = tempfile::tempdir().unwrap();
    let missing = root.path().join("nope.json");
    let out = coopbif(root.path(), &["lemma-e", "--config", &missing.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));

    let bad = root.path().join("bad.json");
    std::fs::write(&bad, r#"{ "grid": 1 }"#).unwrap();
    let out = coopbif(root.path(), &["lemma-e", "--config", &bad.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));

    let out = coopbif(root.path(), &["solve", "--config", &config("tp1.json"), "--t", "three"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_at_negative_t_is_a_config_error() {
    let root = tempfile::tempdir().unwrap();
    let out = coopbif(root.path(), &["solve", "--config", &config("tp1.json"), "--t=-1"]);
    assert_eq!(out.status.code(), Some(2));
}
