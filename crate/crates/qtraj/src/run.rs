//! Task execution: turns a validated scenario into a table and a summary.

use qtraj_core::{
    barrier_delay, constant_basis, integrate_trajectory, node_table, numeric_basis,
    propagating_position, time_of_flight, BasisPair, BoundaryEvent, MicrostateConstants,
    PhysicalParams, PotentialSpec, RectangularBarrier, RegionClass, Sampling,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{
    NodesTask, ResidualsTask, ScenarioConfig, SweepTask, Task, TaskKind, TrajectoryTask, TunnelTask,
};

pub const TRAJECTORY_COLUMNS: [&str; 8] = [
    "t",
    "x",
    "v",
    "P",
    "S0",
    "qshje_residual",
    "firqnl_residual",
    "branch_n",
];
pub const NODE_COLUMNS: [&str; 7] = ["n", "t_n", "x_n", "dt", "dx", "v_mean", "lambda_dB"];
pub const TUNNEL_COLUMNS: [&str; 6] = ["q", "xi", "T_exact", "T_thin", "T_thick", "regime"];
pub const RESIDUAL_COLUMNS: [&str; 8] = [
    "draw",
    "regime",
    "epsilon",
    "a",
    "b",
    "samples",
    "max_qshje_residual",
    "max_firqnl_residual",
];
pub const SWEEP_COLUMNS: [&str; 9] = [
    "E",
    "a",
    "b",
    "regime",
    "dt_node",
    "dx_node",
    "v_mean",
    "max_qshje_residual",
    "max_firqnl_residual",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    /// Written as an empty CSV field and as JSON `null`.
    Missing,
    /// Summary-only: nested values.
    List(Vec<Cell>),
    Object(Vec<(String, Cell)>),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub task: TaskKind,
    pub entries: Vec<(String, Cell)>,
    pub boundaries: Vec<BoundaryEvent>,
    /// Grid points or draws that failed with a numerical error.
    pub failures: Vec<String>,
}

impl Summary {
    fn new(task: TaskKind) -> Self {
        Self {
            task,
            entries: Vec::new(),
            boundaries: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn put(&mut self, key: &str, value: impl Into<Cell>) {
        self.entries.push((key.to_string(), value.into()));
    }

    /// True when output is partial or some points could not be computed.
    pub fn hit_boundary(&self) -> bool {
        !self.boundaries.is_empty() || !self.failures.is_empty()
    }

    pub fn status(&self) -> &'static str {
        if self.boundaries.is_empty() && self.failures.is_empty() {
            "ok"
        } else if self.failures.is_empty() {
            "boundary"
        } else {
            "partial"
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: Summary,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Invalid(String),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: qtraj_core::Error,
    },
}

fn numerical(context: impl Into<String>) -> impl FnOnce(qtraj_core::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Numerical { context, source }
}

/// Execute the scenario. `seed` drives the random draws of the residual survey.
pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<Outcome, RunError> {
    match &cfg.task {
        Task::Trajectory(t) => trajectory(cfg, t),
        Task::Nodes(t) => nodes(cfg, t),
        Task::Tunnel(t) => tunnel(cfg, t),
        Task::Residuals(t) => residuals(cfg, t, seed),
        Task::Sweep(t) => sweep(cfg, t),
    }
}

fn energy(cfg: &ScenarioConfig) -> Result<f64, RunError> {
    cfg.total_energy()
        .ok_or_else(|| RunError::Invalid("an energy is required for this task".into()))
}

fn microstate(cfg: &ScenarioConfig) -> Result<MicrostateConstants, RunError> {
    let c = cfg.constants;
    Ok(MicrostateConstants::new(c.a, c.b)
        .map_err(numerical("constants"))?
        .with_lambda(c.lambda)
        .with_epoch(c.t0)
        .with_origin(c.x0))
}

/// Value of a potential that must be a single constant.
fn constant_value(spec: &PotentialSpec, task: &str) -> Result<f64, RunError> {
    match spec {
        PotentialSpec::PiecewiseConstant(segs) if segs.len() == 1 => Ok(segs[0].value),
        _ => Err(RunError::Invalid(format!(
            "the {task} task needs a constant potential"
        ))),
    }
}

/// Analytic pair for the segment holding `x0`, or a numerically integrated
/// pair for tabulated potentials.
fn basis_at(
    cfg: &ScenarioConfig,
    energy: f64,
    x0: f64,
    domain: Option<(f64, f64)>,
) -> Result<BasisPair, RunError> {
    match &cfg.potential {
        PotentialSpec::PiecewiseConstant(_) => {
            let v = cfg
                .potential
                .eval(x0)
                .map_err(numerical("potential at x0"))?;
            let eps = energy - v.value;
            let region = cfg.params.classify(energy, v.value);
            constant_basis(&cfg.params, eps, region).map_err(numerical("basis at x0"))
        }
        PotentialSpec::Tabulated(_) => {
            let domain = domain.unwrap_or_else(|| cfg.potential.domain());
            numeric_basis(&cfg.params, &cfg.potential, energy, domain, cfg.solver)
                .map_err(numerical("numeric basis"))
        }
    }
}

fn trajectory(cfg: &ScenarioConfig, task: &TrajectoryTask) -> Result<Outcome, RunError> {
    let energy = energy(cfg)?;
    let consts = microstate(cfg)?;
    let basis = basis_at(cfg, energy, cfg.constants.x0, task.domain)?;
    let tr = integrate_trajectory(
        &basis,
        &consts,
        &cfg.params,
        &cfg.potential,
        energy,
        task.t_span,
        &Sampling::Uniform(task.samples),
    )
    .map_err(numerical("trajectory"))?;

    let mut table = Table::new(&TRAJECTORY_COLUMNS);
    let (mut max_q, mut max_f) = (0.0f64, 0.0f64);
    for s in &tr.samples {
        max_q = max_q.max(s.qshje_residual.abs());
        max_f = max_f.max(s.firqnl_residual.abs());
        table.rows.push(vec![
            s.t.into(),
            s.x.into(),
            s.velocity.into(),
            s.momentum.into(),
            s.action.into(),
            s.qshje_residual.into(),
            s.firqnl_residual.into(),
            s.branch.into(),
        ]);
    }
    let mut summary = Summary::new(TaskKind::Trajectory);
    summary.put("samples", tr.samples.len());
    summary.put("requested_samples", task.samples);
    summary.put("max_qshje_residual", max_q);
    summary.put("max_firqnl_residual", max_f);
    summary.boundaries = tr.boundaries;
    Ok(Outcome { table, summary })
}

fn nodes(cfg: &ScenarioConfig, task: &NodesTask) -> Result<Outcome, RunError> {
    let energy = energy(cfg)?;
    let v = constant_value(&cfg.potential, "nodes")?;
    let consts = microstate(cfg)?;
    let t = node_table(&cfg.params, energy - v, &consts, task.n_range)
        .map_err(numerical("node table"))?;
    let mut table = Table::new(&NODE_COLUMNS);
    for n in &t.nodes {
        table.rows.push(vec![
            n.n.into(),
            n.t.into(),
            n.x.into(),
            t.dt.into(),
            t.dx.into(),
            t.mean_velocity.into(),
            t.de_broglie.into(),
        ]);
    }
    let mut summary = Summary::new(TaskKind::Nodes);
    summary.put("nodes", t.nodes.len());
    summary.put("dt", t.dt);
    summary.put("dx", t.dx);
    summary.put("v_mean", t.mean_velocity);
    summary.put("lambda_dB", t.de_broglie);
    Ok(Outcome { table, summary })
}

fn tunnel(cfg: &ScenarioConfig, task: &TunnelTask) -> Result<Outcome, RunError> {
    let energy = energy(cfg)?;
    let barrier = cfg
        .barrier
        .ok_or_else(|| RunError::Invalid("the tunnel task needs a barrier potential".into()))?;
    let consts = microstate(cfg)?;
    let widths = if task.widths.is_empty() {
        vec![barrier.width]
    } else {
        task.widths.clone()
    };
    let mut table = Table::new(&TUNNEL_COLUMNS);
    let mut regimes = Vec::new();
    let mut worst_quadrature = 0.0f64;
    for q in widths {
        let b = RectangularBarrier::new(barrier.height, q)
            .map_err(numerical(format!("barrier width {q}")))?;
        let r = barrier_delay(&cfg.params, &b, energy, &consts)
            .map_err(numerical(format!("barrier width {q}")))?;
        worst_quadrature = worst_quadrature.max(((r.t_quadrature - r.t_exact) / r.t_exact).abs());
        regimes.push(Cell::from(r.regime.as_str()));
        table.rows.push(vec![
            r.q.into(),
            r.xi.into(),
            r.t_exact.into(),
            r.t_thin.into(),
            r.t_thick.into(),
            r.regime.as_str().into(),
        ]);
    }
    let mut summary = Summary::new(TaskKind::Tunnel);
    summary.put("widths", table.rows.len());
    summary.put("epsilon", energy - barrier.height);
    summary.put("regimes", Cell::List(regimes));
    summary.put("max_quadrature_deviation", worst_quadrature);
    Ok(Outcome { table, summary })
}

/// Largest residuals along one trajectory in a constant potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSurvey {
    pub region: RegionClass,
    pub samples: usize,
    pub max_qshje: f64,
    pub max_firqnl: f64,
}

/// Sample the trajectory `(a, b)` at local energy `eps` over two node
/// periods (propagating) or four decay lengths (evanescent).
pub fn survey_trajectory(
    params: &PhysicalParams,
    potential: f64,
    eps: f64,
    a: f64,
    b: f64,
    samples: usize,
) -> qtraj_core::Result<ResidualSurvey> {
    let energy = eps + potential;
    let spec = PotentialSpec::constant(potential);
    let region = params.classify(energy, potential);
    let basis = constant_basis(params, eps, region)?;
    let consts = MicrostateConstants::new(a, b)?;
    let (consts, t_span) = match region {
        RegionClass::Propagating => {
            let x0 = propagating_position(params, eps, &consts, 0.0)?.x;
            let period = node_table(params, eps, &consts, (0, 1))?.dt;
            (consts.with_origin(x0), (0.0, 2.0 * period))
        }
        _ => {
            let ell = 1.0 / params.wave_number_sq(eps).abs().sqrt();
            let t1 = time_of_flight(&basis, &consts, params, &spec, energy, 0.0, -2.0 * ell)?;
            let t2 = time_of_flight(&basis, &consts, params, &spec, energy, 0.0, 2.0 * ell)?;
            (consts, (t1.min(t2), t1.max(t2)))
        }
    };
    let tr = integrate_trajectory(
        &basis,
        &consts,
        params,
        &spec,
        energy,
        t_span,
        &Sampling::Uniform(samples),
    )?;
    let mut out = ResidualSurvey {
        region,
        samples: tr.samples.len(),
        max_qshje: 0.0,
        max_firqnl: 0.0,
    };
    for s in &tr.samples {
        out.max_qshje = out.max_qshje.max(s.qshje_residual.abs());
        out.max_firqnl = out.max_firqnl.max(s.firqnl_residual.abs());
    }
    Ok(out)
}

/// One random `(ε, a, b)`; even draws propagate, odd draws are evanescent.
/// Energies are drawn in units of `mc²`.
pub fn residual_draw(rng: &mut ChaCha8Rng, draw: usize, rest_energy: f64) -> (f64, f64, f64) {
    let magnitude = if draw.is_multiple_of(2) {
        rng.random_range(1.05..4.0)
    } else {
        rng.random_range(0.1..0.9)
    };
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let a_mag: f64 = rng.random_range(0.2..3.0);
    let a_sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let b = rng.random_range(-2.0..2.0);
    (sign * magnitude * rest_energy, a_sign * a_mag, b)
}

fn residuals(cfg: &ScenarioConfig, task: &ResidualsTask, seed: u64) -> Result<Outcome, RunError> {
    let v = constant_value(&cfg.potential, "residuals")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = cfg.params.rest_energy();
    let draws: Vec<(f64, f64, f64)> = (0..task.draws)
        .map(|i| residual_draw(&mut rng, i, scale))
        .collect();
    let results: Vec<_> = draws
        .par_iter()
        .map(|&(eps, a, b)| survey_trajectory(&cfg.params, v, eps, a, b, task.samples))
        .collect();

    let mut table = Table::new(&RESIDUAL_COLUMNS);
    let mut summary = Summary::new(TaskKind::Residuals);
    let (mut max_q, mut max_f) = (0.0f64, 0.0f64);
    for (i, ((eps, a, b), result)) in draws.iter().zip(results).enumerate() {
        match result {
            Ok(s) => {
                max_q = max_q.max(s.max_qshje);
                max_f = max_f.max(s.max_firqnl);
                table.rows.push(vec![
                    i.into(),
                    s.region.as_str().into(),
                    (*eps).into(),
                    (*a).into(),
                    (*b).into(),
                    s.samples.into(),
                    s.max_qshje.into(),
                    s.max_firqnl.into(),
                ]);
            }
            Err(e) => summary.failures.push(format!("draw {i}: {e}")),
        }
    }
    summary.put("seed", Cell::Int(seed as i64));
    summary.put("draws", task.draws);
    summary.put("max_qshje_residual", max_q);
    summary.put("max_firqnl_residual", max_f);
    Ok(Outcome { table, summary })
}

fn sweep(cfg: &ScenarioConfig, task: &SweepTask) -> Result<Outcome, RunError> {
    let v = constant_value(&cfg.potential, "sweep")?;
    let grid: Vec<(f64, f64, f64)> = task
        .energies
        .iter()
        .flat_map(|&e| {
            task.a
                .iter()
                .flat_map(move |&a| task.b.iter().map(move |&b| (e, a, b)))
        })
        .collect();
    let params = cfg.params;
    let rows: Vec<Result<Vec<Cell>, String>> = grid
        .par_iter()
        .map(|&(e, a, b)| sweep_point(&params, v, e, a, b, task.samples))
        .collect();

    let mut table = Table::new(&SWEEP_COLUMNS);
    let mut summary = Summary::new(TaskKind::Sweep);
    for ((e, a, b), row) in grid.iter().zip(rows) {
        match row {
            Ok(row) => table.rows.push(row),
            Err(msg) => {
                summary
                    .failures
                    .push(format!("E = {e}, a = {a}, b = {b}: {msg}"));
                table.rows.push(vec![
                    (*e).into(),
                    (*a).into(),
                    (*b).into(),
                    "failed".into(),
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                ]);
            }
        }
    }
    summary.put("points", grid.len());
    Ok(Outcome { table, summary })
}

fn sweep_point(
    params: &PhysicalParams,
    v: f64,
    e: f64,
    a: f64,
    b: f64,
    samples: usize,
) -> Result<Vec<Cell>, String> {
    let eps = e - v;
    let region = params.classify(e, v);
    let head = vec![e.into(), a.into(), b.into(), region.as_str().into()];
    if region == RegionClass::Turning {
        return Ok(head
            .into_iter()
            .chain(std::iter::repeat_n(Cell::Missing, 5))
            .collect());
    }
    let survey = survey_trajectory(params, v, eps, a, b, samples).map_err(|e| e.to_string())?;
    let nodes = if region == RegionClass::Propagating {
        let c = MicrostateConstants::new(a, b).map_err(|e| e.to_string())?;
        let t = node_table(params, eps, &c, (0, 1)).map_err(|e| e.to_string())?;
        [Some(t.dt), Some(t.dx), Some(t.mean_velocity)]
    } else {
        [None; 3]
    };
    let mut row = head;
    row.extend(nodes.into_iter().map(Cell::from));
    row.push(survey.max_qshje.into());
    row.push(survey.max_firqnl.into());
    Ok(row)
}
