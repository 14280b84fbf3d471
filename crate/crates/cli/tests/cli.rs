use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sqzmetro"));
    cmd.env_remove("SQZMETRO_OUTPUT_DIR");
    cmd
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn sweep_matches_golden_file() {
    let out = run(bin().args(["sweep", "--spec"]).arg(data("sensitivity_small.json")));
    assert_eq!(out.status.code(), Some(0));
    let golden = fs::read_to_string(data("sensitivity_small.csv")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn sweep_is_deterministic() {
    let args = [
        "sweep", "--metric", "qfi", "--r-min", "0", "--r-max", "2", "--r-step", "0.1",
        "--gamma", "0,0.5,1,2", "--eta", "1,0.8", "--format", "json",
    ];
    let first = run(bin().args(args));
    let second = run(bin().args(args));
    assert_eq!(first.status.code(), Some(0));
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn flags_override_spec() {
    let out = run(bin()
        .args(["sweep", "--spec"])
        .arg(data("sensitivity_small.json"))
        .args(["--families", "ch", "--eta", "0.25", "--gamma", "2"]));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.starts_with("Ch,") && r.contains(",0.25,")));
}

#[test]
fn empty_gamma_is_a_validation_error() {
    let out = run(bin().args(["sweep", "--metric", "qfi", "--r-min", "0", "--r-max", "1", "--r-step", "0.5"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma list is empty"));
}

#[test]
fn bad_arguments_exit_with_validation_code() {
    assert_eq!(run(bin().args(["convert-db", "--", "-2"])).status.code(), Some(1));
    assert_eq!(run(bin().args(["sweep", "--metric", "nonsense"])).status.code(), Some(1));
    assert_eq!(run(bin().args(["--help"])).status.code(), Some(0));
}

#[test]
fn convert_db_anchor() {
    let out = run(bin().args(["convert-db", "1.38"]));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "11.9865 dB");
    let out = run(bin().args(["convert-db", "--direction", "db-to-r", "12"]));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1.3816 r");
}

#[test]
fn verify_with_tiny_dims_fails_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin()
        .env("SQZMETRO_OUTPUT_DIR", dir.path())
        .args(["verify", "--dims", "4", "--output", "report.json"]));
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    let checks = report["checks"].as_array().unwrap();
    let by_id = |id: &str| checks.iter().find(|c| c["id"] == id).unwrap();
    assert_eq!(by_id("T")["passed"], false);
    assert_eq!(by_id("3")["passed"], false);
    assert_eq!(by_id("10")["passed"], true);
    assert!(checks.iter().all(|c| c["runtime_ms"].as_f64().unwrap() >= 0.0));
}

#[test]
fn output_dir_variable_applies_to_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin()
        .env("SQZMETRO_OUTPUT_DIR", dir.path())
        .args(["threshold", "--kind", "qfi", "--r-min", "0", "--r-max", "1", "--r-step", "0.5"])
        .args(["--output", "nested/qfi.csv"]));
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("nested/qfi.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "kind,r,eta,gamma_th,error");
    assert_eq!(text.lines().nth(1).unwrap(), "threshold-qfi,0.0,,0.7071067811865476,");
}
