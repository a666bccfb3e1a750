use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn qtraj(args: &[&str], config: &Path, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qtraj"));
    cmd.args(args).arg("--config").arg(config);
    if let Some(out) = out {
        cmd.arg("--out").arg(out);
    }
    cmd.output().unwrap()
}

fn summary(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn nodes_have_constant_spacing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "n.json",
        r#"{"energy": 1.4142135623730951, "nodes": {"n_range": [0, 4]}}"#,
    );
    let csv = dir.path().join("nodes.csv");
    let out = qtraj(&["nodes"], &cfg, Some(&csv));
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,t_n,x_n,dt,dx,v_mean,lambda_dB"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let dx: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!((dx - std::f64::consts::PI).abs() < 1e-15);
    }
    assert_eq!(summary(&out)["nodes"], 5);
    assert!(dir.path().join("nodes.csv.summary.json").exists());
}

#[test]
fn tunnel_regimes_across_widths() {
    let dir = tempfile::tempdir().unwrap();
    // m = 2 and eps = 1 give kappa = sqrt 3.
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"params": {"mass": 2}, "potential": {"type": "barrier", "height": 1, "width": 1},
            "energy": 2, "constants": {"a": -1}, "tunnel": {"q": [0.01, 0.1, 1, 10]}}"#,
    );
    let json = dir.path().join("t.json.out");
    let out = qtraj(&["tunnel", "--format", "json"], &cfg, Some(&json));
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let regimes: Vec<&str> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["regime"].as_str().unwrap())
        .collect();
    assert_eq!(regimes, ["thin", "intermediate", "intermediate", "thick"]);
    assert_eq!(
        summary(&out)["regimes"],
        serde_json::json!(["thin", "intermediate", "intermediate", "thick"])
    );
}

#[test]
fn turning_point_gives_partial_output_and_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ramp.json",
        r#"{"mode": "nonrelativistic", "energy": 2,
            "potential": {"type": "tabulated", "x": [0, 2, 4, 6, 8, 10, 12], "v": [0, 0.5, 1, 1.5, 2, 2.5, 3]},
            "constants": {"x0": 1},
            "trajectory": {"t_span": [0, 60], "samples": 61}}"#,
    );
    let csv = dir.path().join("ramp.csv");
    let out = qtraj(&["trajectory"], &cfg, Some(&csv));
    assert_eq!(out.status.code(), Some(2));
    let rows = std::fs::read_to_string(&csv).unwrap().lines().count() - 1;
    assert!(rows > 1 && rows < 61, "{rows} rows");
    let s = summary(&out);
    assert_eq!(s["status"], "boundary");
    let event = &s["boundary_events"][0];
    assert_eq!(event["kind"], "turning_reached");
    assert!((event["x"].as_f64().unwrap() - 8.0).abs() < 1e-6);
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"energy": 2, "constants": {"a": 0}, "nodes": {"n_range": [3, 1]}}"#,
    );
    let out = qtraj(&["nodes"], &cfg, None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("constants.a") && err.contains("nodes.n_range"),
        "{err}"
    );

    let missing = dir.path().join("absent.json");
    assert_eq!(qtraj(&["nodes"], &missing, None).status.code(), Some(1));

    let other = write(
        dir.path(),
        "sweep.json",
        r#"{"task": "sweep", "sweep": {"energies": [2]}}"#,
    );
    assert_eq!(qtraj(&["nodes"], &other, None).status.code(), Some(1));

    let unknown_flag = Command::new(env!("CARGO_BIN_EXE_qtraj"))
        .args(["nodes", "--bogus"])
        .output()
        .unwrap();
    assert_eq!(unknown_flag.status.code(), Some(1));
}

#[test]
fn non_constant_potential_for_nodes_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.json",
        r#"{"energy": 5, "potential": {"type": "barrier", "height": 1, "width": 1}}"#,
    );
    assert_eq!(qtraj(&["nodes"], &cfg, None).status.code(), Some(1));
}

#[test]
fn numerical_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // eps = 0.5 lies below the rest energy, so there are no nodes.
    let cfg = write(dir.path(), "e.json", r#"{"energy": 0.5}"#);
    let out = qtraj(&["nodes"], &cfg, None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stdout_carries_data_when_no_path_is_given() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "n.json",
        r#"{"energy": 2, "output": {"format": "json"}}"#,
    );
    let out = qtraj(&["nodes"], &cfg, None);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
    let s: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(s["task"], "nodes");
}

#[test]
fn sweep_marks_turning_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"sweep": {"energies": [0.5, 1, 2], "samples": 16}}"#,
    );
    let csv = dir.path().join("s.csv");
    let out = qtraj(&["sweep"], &cfg, Some(&csv));
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let regimes: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(regimes, ["evanescent", "turning", "propagating"]);
}

#[test]
fn seed_changes_the_residual_draws() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.json",
        r#"{"residuals": {"draws": 4, "samples": 20}}"#,
    );
    let read = |seed: &str, name: &str| {
        let path = dir.path().join(name);
        let out = qtraj(&["residuals", "--seed", seed], &cfg, Some(&path));
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    assert_eq!(read("1", "a.csv"), read("1", "b.csv"));
    assert_ne!(read("1", "a.csv"), read("2", "c.csv"));
}
