//! Command-line behaviour: subcommands, artifacts and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hvi-cbfed"));
    cmd.args(args);
    if let Some(out) = out {
        cmd.arg("--out").arg(out);
    }
    cmd.output().expect("binary runs")
}

#[test]
fn missing_example_and_config_is_a_configuration_error() {
    let o = run(&["optimize"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--example"));
}

#[test]
fn unknown_example_is_a_configuration_error() {
    assert_eq!(run(&["solve-state", "--example", "7"], None).status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "example = 1\nviscosity = 2.0\n").unwrap();
    let o = run(&["solve-state", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_parameters_are_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "example = 3\nkappa = 0.5\n").unwrap();
    let o = run(&["solve-state", "--config", cfg.to_str().unwrap(), "--mesh-n", "4"], None);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn solve_state_writes_residual_history_and_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve-state", "--example", "3", "--mesh-n", "4"], Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let n4 = dir.path().join("n4");
    let csv = std::fs::read_to_string(n4.join("residual_history.csv")).unwrap();
    assert!(csv.starts_with("iteration,velocity_residual,divergence_residual"));
    assert!(std::fs::read_to_string(n4.join("state.vtk")).unwrap().starts_with("# vtk DataFile"));
}

#[test]
fn check_conditions_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check-conditions", "--example", "1", "--mesh-n", "4"], Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("conditions.json")).unwrap()).unwrap();
    assert_eq!(json[0]["existence"]["holds"], serde_json::Value::Bool(true));
}

#[test]
fn optimize_with_config_writes_cost_history() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "example = 2\nmesh_n = [3]\nmax_iter = 2\n").unwrap();
    let o = run(&["optimize", "--config", cfg.to_str().unwrap()], Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("n3").join("cost_history.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("iter,cost,tracking_u,tracking_p,regularization,control_change_L2")
    );
    assert_eq!(lines.count(), 3);
}
