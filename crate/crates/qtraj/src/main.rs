use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qtraj::{
    emit, parse_config_for, render, run_scenario, summary_json, Format, RunError, TaskKind,
};

#[derive(Parser)]
#[command(
    name = "qtraj",
    version,
    about = "Trajectories from the quantum stationary Hamilton-Jacobi equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate x(t) and report residuals along the path.
    Trajectory(Args),
    /// Node times and positions in a constant potential.
    Nodes(Args),
    /// Barrier delay over a list of widths.
    Tunnel(Args),
    /// Residual survey over random microstates.
    Residuals(Args),
    /// Grid over energies and microstate constants.
    Sweep(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Data output path; falls back to the scenario's output path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Seed for the random draws of the residual survey.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

const VALIDATION: u8 = 1;
const BOUNDARY: u8 = 2;

fn summary_path(data: &Path) -> PathBuf {
    let mut name = data.as_os_str().to_owned();
    name.push(".summary.json");
    PathBuf::from(name)
}

fn execute(kind: TaskKind, args: &Args) -> Result<u8, u8> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", args.config.display());
        VALIDATION
    })?;
    let cfg = parse_config_for(&text, Some(kind)).map_err(|errors| {
        for e in &errors {
            eprintln!("error: {e}");
        }
        VALIDATION
    })?;
    let outcome = run_scenario(&cfg, args.seed).map_err(|e| match e {
        RunError::Invalid(msg) => {
            eprintln!("error: {msg}");
            VALIDATION
        }
        RunError::Numerical { .. } => {
            eprintln!("error: {e}");
            BOUNDARY
        }
    })?;

    let format = args.format.map(Format::from).unwrap_or(cfg.output.format);
    let summary = summary_json(&outcome.summary);
    match args.out.as_ref().or(cfg.output.path.as_ref()) {
        Some(path) => {
            let written = emit(&outcome.table, format, path)
                .and_then(|()| std::fs::write(summary_path(path), &summary));
            if let Err(e) = written {
                eprintln!("error: cannot write {}: {e}", path.display());
                return Err(VALIDATION);
            }
            print!("{summary}");
        }
        None => {
            print!("{}", render(&outcome.table, format));
            eprint!("{summary}");
        }
    }
    Ok(if outcome.summary.hit_boundary() {
        BOUNDARY
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { VALIDATION } else { 0 });
        }
    };
    let (kind, args) = match &cli.command {
        Command::Trajectory(a) => (TaskKind::Trajectory, a),
        Command::Nodes(a) => (TaskKind::Nodes, a),
        Command::Tunnel(a) => (TaskKind::Tunnel, a),
        Command::Residuals(a) => (TaskKind::Residuals, a),
        Command::Sweep(a) => (TaskKind::Sweep, a),
    };
    match execute(kind, args) {
        Ok(code) | Err(code) => ExitCode::from(code),
    }
}
