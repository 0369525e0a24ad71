//! Runs the `ratstokes` binary against small configurations.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ratstokes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratstokes")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn solve(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = write_config(dir, config);
    let out = dir.join("out");
    let mut args = vec!["solve", "--config", &cfg, "--out-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    ratstokes(&args)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn straight_channel_solve_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema_version": 1, "case": "constricted-channel", "params": {"lambda": 0.0},
                  "output": {"grid": [12, 8]}}"#;
    let run = solve(dir.path(), cfg, &[]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let rep = report(dir.path());
    let digits = rep["accuracy_digits"].as_f64().unwrap();
    assert!(digits >= 10.0);
    let max = rep["boundary_residual"]["max"].as_f64().unwrap();
    assert!((digits + max.log10()).abs() < 1e-9);
    let csv = fs::read_to_string(dir.path().join("out/fields.csv")).unwrap();
    assert!(csv.starts_with("x,y,mask,psi,u,v,p,omega\n"));
    assert_eq!(csv.lines().count(), 1 + 12 * 8);
    assert!(fs::read_to_string(dir.path().join("out/poles.csv")).unwrap().starts_with("x,y,source,group\n"));
    assert!(fs::read_to_string(dir.path().join("out/psi.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn malformed_config_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [r#"{"schema_version": 1, "case": "#, r#"{"schema_version": 1, "case": "no-such-case"}"#] {
        let run = solve(dir.path(), cfg, &[]);
        assert_eq!(run.status.code(), Some(2));
        assert!(!dir.path().join("out").exists());
    }
}

#[test]
fn accuracy_target_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema_version": 1, "case": "two-cylinder-d", "output": {"grid": [10, 10]}}"#;
    let met = solve(dir.path(), cfg, &["--accuracy-target", "6"]);
    assert_eq!(met.status.code(), Some(0));
    let rep = report(dir.path());
    assert!(rep["accuracy_digits"].as_f64().unwrap() >= 6.0);
    assert_eq!(rep["target_met"], Value::Bool(true));
    let missed = solve(dir.path(), cfg, &["--accuracy-target", "17"]);
    assert_eq!(missed.status.code(), Some(4));
    assert_eq!(report(dir.path())["target_met"], Value::Bool(false));
}

#[test]
fn field_csv_is_deterministic() {
    let cfg = r#"{"schema_version": 1, "case": "two-cylinder-b", "output": {"grid": [15, 15]}}"#;
    let csv = |_| {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(solve(dir.path(), cfg, &[]).status.code(), Some(0));
        (fs::read(dir.path().join("out/fields.csv")).unwrap(), fs::read(dir.path().join("out/poles.csv")).unwrap())
    };
    assert_eq!(csv(0), csv(1));
}

#[test]
fn sweep_table_follows_lubrication_trend() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "case": "constricted-channel"}"#);
    let out = dir.path().join("out");
    let run = ratstokes(&["sweep", "--config", &cfg, "--out-dir", out.to_str().unwrap(), "--values", "0.2,0.4,0.6"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,dp_solver,dp_elt0,dp_elt2,dp_elt4,rel_diff_elt0,rel_diff_elt2,rel_diff_elt4,accuracy_digits"
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert!(row[7] <= 0.03);
    }
    assert!(rows[0][5] < rows[1][5] && rows[1][5] < rows[2][5]);
    assert!(rows[2][5] > rows[2][7]);
}

#[test]
fn sweep_rejects_other_cases() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "case": "uniform-flow"}"#);
    let run = ratstokes(&["sweep", "--config", &cfg, "--values", "0.2"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn validate_runs_selected_criteria() {
    let run = ratstokes(&["validate", "--criteria", "1,2"]);
    assert_eq!(run.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
    assert_eq!(ratstokes(&["validate", "--criteria", "99"]).status.code(), Some(2));
}

#[test]
fn poles_subcommand_lists_aaa_poles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "case": "constricted-channel", "params": {"lambda": 0.6}}"#);
    let out = dir.path().join("out");
    assert_eq!(ratstokes(&["poles", "--config", &cfg, "--out-dir", out.to_str().unwrap()]).status.code(), Some(0));
    let csv = fs::read_to_string(out.join("poles.csv")).unwrap();
    assert!(csv.lines().skip(1).any(|l| l.contains(",aaa,")));
}
