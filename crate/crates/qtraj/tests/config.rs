use qtraj::config::{parse_config, parse_config_for, Energy, Format, Task, TaskKind};
use qtraj_core::{Mode, PotentialSpec};

#[test]
fn minimal_trajectory_config_gets_defaults() {
    let cfg =
        parse_config(r#"{"task": "trajectory", "energy": 2, "trajectory": {"t_span": [0, 1]}}"#)
            .unwrap();
    assert_eq!(cfg.mode(), Mode::Relativistic);
    assert_eq!(
        (
            cfg.params.mass(),
            cfg.params.light_speed(),
            cfg.params.hbar()
        ),
        (1.0, 1.0, 1.0)
    );
    assert_eq!(cfg.potential, PotentialSpec::constant(0.0));
    assert_eq!(cfg.energy, Some(Energy::Total(2.0)));
    assert_eq!(
        (cfg.constants.a, cfg.constants.b, cfg.constants.x0),
        (1.0, 0.0, 0.0)
    );
    assert_eq!(cfg.output.format, Format::Csv);
    assert!(cfg.output.path.is_none());
    assert_eq!((cfg.solver.rel, cfg.solver.abs), (1e-10, 1e-12));
    match cfg.task {
        Task::Trajectory(t) => {
            assert_eq!(t.t_span, (0.0, 1.0));
            assert_eq!(t.samples, 101);
        }
        other => panic!("unexpected task {other:?}"),
    }
}

#[test]
fn zero_a_is_rejected() {
    let errs =
        parse_config(r#"{"task": "nodes", "energy": 2, "constants": {"a": 0}}"#).unwrap_err();
    assert_eq!(errs.len(), 1);
    assert_eq!(errs[0].path, "constants.a");
    assert!(errs[0].message.contains("a ≠ 0"));
}

#[test]
fn unknown_task_lists_valid_tasks() {
    let errs = parse_config(r#"{"task": "plot"}"#).unwrap_err();
    let msg = errs[0].to_string();
    for task in ["trajectory", "nodes", "tunnel", "residuals", "sweep"] {
        assert!(msg.contains(task), "{msg}");
    }
}

#[test]
fn every_violation_is_reported() {
    let text = r#"{
        "task": "trajectory",
        "params": {"mass": -1},
        "constants": {"a": 0, "colour": 3},
        "trajectory": {"t_span": [0, 1], "samples": 1}
    }"#;
    let errs = parse_config(text).unwrap_err();
    let paths: Vec<&str> = errs.iter().map(|e| e.path.as_str()).collect();
    for p in [
        "params.mass",
        "constants.a",
        "constants.colour",
        "trajectory.samples",
        "energy",
    ] {
        assert!(paths.contains(&p), "missing {p} in {paths:?}");
    }
}

#[test]
fn subcommand_must_agree_with_document() {
    let text = r#"{"task": "nodes", "energy": 2}"#;
    assert!(parse_config_for(text, Some(TaskKind::Nodes)).is_ok());
    assert!(parse_config_for(text, Some(TaskKind::Sweep)).is_err());
    let untyped = r#"{"energy": 2}"#;
    assert!(parse_config(untyped).is_err());
    assert_eq!(
        parse_config_for(untyped, Some(TaskKind::Nodes))
            .unwrap()
            .task
            .kind(),
        TaskKind::Nodes
    );
}

#[test]
fn tunnel_needs_a_barrier() {
    let errs = parse_config(r#"{"task": "tunnel", "energy": 2}"#).unwrap_err();
    assert!(errs.iter().any(|e| e.path == "potential"));
    let ok = parse_config(
        r#"{"task": "tunnel", "energy": 2, "potential": {"type": "barrier", "height": 3, "width": 1}}"#,
    );
    assert!(ok.unwrap().barrier.is_some());
}

#[test]
fn nonrelativistic_energy_adds_rest_energy() {
    let cfg = parse_config(r#"{"task": "nodes", "params": {"light_speed": 10}, "energy_nr": 0.5}"#)
        .unwrap();
    assert_eq!(cfg.total_energy(), Some(100.5));
    let cfg =
        parse_config(r#"{"task": "nodes", "mode": "nonrelativistic", "energy_nr": 0.5}"#).unwrap();
    assert_eq!(cfg.total_energy(), Some(0.5));
}

#[test]
fn potential_kinds() {
    let piecewise = r#"{"task": "residuals", "potential": {"type": "piecewise", "segments": [
        {"left": null, "right": 0, "value": 0}, {"left": 0, "right": null, "value": 1}]}}"#;
    assert!(parse_config(piecewise).is_ok());
    let tabulated = r#"{"task": "residuals", "potential": {"type": "tabulated", "x": [0, 1, 2, 3], "v": [0, 1, 4, 9]}}"#;
    assert!(parse_config(tabulated).is_ok());
    let bad = r#"{"task": "residuals", "potential": {"type": "well"}}"#;
    assert_eq!(parse_config(bad).unwrap_err()[0].path, "potential.type");
    assert_eq!(parse_config("not json").unwrap_err()[0].path, "$");
}

#[test]
fn solver_tolerances_are_configurable() {
    let cfg = parse_config(r#"{"task": "residuals", "solver": {"rel_tol": 1e-8}}"#).unwrap();
    assert_eq!((cfg.solver.rel, cfg.solver.abs), (1e-8, 1e-12));
    let errs =
        parse_config(r#"{"task": "residuals", "solver": {"abs_tol": 0, "order": 5}}"#).unwrap_err();
    let paths: Vec<&str> = errs.iter().map(|e| e.path.as_str()).collect();
    assert_eq!(paths, ["solver.order", "solver.abs_tol"]);
}
