//! Scenario files, task runner and output writers behind the `qtraj` binary.

pub mod config;
pub mod emit;
pub mod run;

pub use config::{parse_config, parse_config_for, Format, ScenarioConfig, SchemaError, TaskKind};
pub use emit::{emit, render, summary_json};
pub use run::{run_scenario, Cell, Outcome, RunError, Summary, Table};
