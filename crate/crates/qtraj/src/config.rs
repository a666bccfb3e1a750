//! Scenario documents.
//!
//! A scenario is a JSON object. Every problem found while reading it is
//! collected, so a single run reports all of them at once.

use std::fmt;
use std::path::PathBuf;

use qtraj_core::ode::OdeTolerance;
use qtraj_core::{Mode, PhysicalParams, PotentialSpec, RectangularBarrier, Segment};
use serde_json::{Map, Value};

pub const TASKS: [&str; 5] = ["trajectory", "nodes", "tunnel", "residuals", "sweep"];

const TOP_KEYS: [&str; 14] = [
    "mode",
    "params",
    "solver",
    "potential",
    "energy",
    "energy_nr",
    "constants",
    "task",
    "trajectory",
    "nodes",
    "tunnel",
    "residuals",
    "sweep",
    "output",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Trajectory,
    Nodes,
    Tunnel,
    Residuals,
    Sweep,
}

impl TaskKind {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "trajectory" => TaskKind::Trajectory,
            "nodes" => TaskKind::Nodes,
            "tunnel" => TaskKind::Tunnel,
            "residuals" => TaskKind::Residuals,
            "sweep" => TaskKind::Sweep,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Trajectory => "trajectory",
            TaskKind::Nodes => "nodes",
            TaskKind::Tunnel => "tunnel",
            TaskKind::Residuals => "residuals",
            TaskKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Total energy as given: either `E` or `Eⁿʳ = E − mc²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Total(f64),
    NonRelativistic(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub t0: f64,
    pub x0: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            lambda: 0.0,
            t0: 0.0,
            x0: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTask {
    pub t_span: (f64, f64),
    pub samples: usize,
    /// Integration window for numerically built bases.
    pub domain: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodesTask {
    pub n_range: (i64, i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunnelTask {
    pub widths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualsTask {
    pub draws: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTask {
    pub energies: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Trajectory(TrajectoryTask),
    Nodes(NodesTask),
    Tunnel(TunnelTask),
    Residuals(ResidualsTask),
    Sweep(SweepTask),
}

impl Task {
    pub fn kind(&self) -> TaskKind {
        match self {
            Task::Trajectory(_) => TaskKind::Trajectory,
            Task::Nodes(_) => TaskKind::Nodes,
            Task::Tunnel(_) => TaskKind::Tunnel,
            Task::Residuals(_) => TaskKind::Residuals,
            Task::Sweep(_) => TaskKind::Sweep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: PhysicalParams,
    pub potential: PotentialSpec,
    /// Present when the potential was given as a barrier.
    pub barrier: Option<RectangularBarrier>,
    pub energy: Option<Energy>,
    pub constants: Constants,
    pub task: Task,
    pub output: OutputConfig,
    /// Step control for numerically integrated solution pairs.
    pub solver: OdeTolerance,
}

impl ScenarioConfig {
    pub fn mode(&self) -> Mode {
        self.params.mode()
    }

    /// Total energy `E`, converting `Eⁿʳ` in relativistic mode.
    pub fn total_energy(&self) -> Option<f64> {
        self.energy.map(|e| match (e, self.params.mode()) {
            (Energy::Total(e), _) => e,
            (Energy::NonRelativistic(e), Mode::Relativistic) => e + self.params.rest_energy(),
            (Energy::NonRelativistic(e), Mode::NonRelativistic) => e,
        })
    }
}

/// Parse and validate a scenario document whose `task` key names the task.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<SchemaError>> {
    parse_config_for(text, None)
}

/// As [`parse_config`], with the task supplied by the caller. A `task` key in
/// the document must then agree with it.
pub fn parse_config_for(
    text: &str,
    task: Option<TaskKind>,
) -> Result<ScenarioConfig, Vec<SchemaError>> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        vec![SchemaError {
            path: "$".into(),
            message: format!("not valid JSON: {e}"),
        }]
    })?;
    let mut r = Reader::default();
    let cfg = r.scenario(&value, task);
    match cfg {
        Some(cfg) if r.errors.is_empty() => Ok(cfg),
        _ => Err(r.errors),
    }
}

#[derive(Default)]
struct Reader {
    errors: Vec<SchemaError>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Reader {
    fn fail(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(SchemaError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn object<'v>(
        &mut self,
        v: &'v Value,
        path: &str,
        allowed: &[&str],
    ) -> Option<&'v Map<String, Value>> {
        let Some(map) = v.as_object() else {
            self.fail(path, "expected an object");
            return None;
        };
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                self.fail(
                    join(path, key),
                    format!("unknown key (expected one of: {})", allowed.join(", ")),
                );
            }
        }
        Some(map)
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.fail(path, "expected a finite number");
                None
            }
        }
    }

    fn opt_number(
        &mut self,
        map: &Map<String, Value>,
        path: &str,
        key: &str,
        default: f64,
    ) -> Option<f64> {
        match map.get(key) {
            None => Some(default),
            Some(v) => self.number(v, &join(path, key)),
        }
    }

    fn positive(
        &mut self,
        map: &Map<String, Value>,
        path: &str,
        key: &str,
        default: f64,
    ) -> Option<f64> {
        let x = self.opt_number(map, path, key, default)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.fail(join(path, key), "must be positive");
            None
        }
    }

    fn count(
        &mut self,
        map: &Map<String, Value>,
        path: &str,
        key: &str,
        default: usize,
        min: usize,
    ) -> Option<usize> {
        let p = join(path, key);
        let n = match map.get(key) {
            None => default,
            Some(v) => match v.as_u64() {
                Some(n) => n as usize,
                None => {
                    self.fail(p, "expected a non-negative integer");
                    return None;
                }
            },
        };
        if n < min {
            self.fail(p, format!("must be at least {min}"));
            return None;
        }
        Some(n)
    }

    fn numbers(&mut self, v: &Value, path: &str) -> Option<Vec<f64>> {
        let Some(items) = v.as_array() else {
            self.fail(path, "expected an array of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            match self.number(item, &format!("{path}[{i}]")) {
                Some(x) => out.push(x),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn pair(&mut self, v: &Value, path: &str) -> Option<(f64, f64)> {
        let xs = self.numbers(v, path)?;
        if xs.len() != 2 {
            self.fail(path, "expected exactly two numbers");
            return None;
        }
        Some((xs[0], xs[1]))
    }

    fn scenario(&mut self, v: &Value, task_hint: Option<TaskKind>) -> Option<ScenarioConfig> {
        let root = self.object(v, "$", &TOP_KEYS)?;

        let mode = match root.get("mode") {
            None => Some(Mode::Relativistic),
            Some(Value::String(s)) if s == "relativistic" => Some(Mode::Relativistic),
            Some(Value::String(s)) if s == "nonrelativistic" => Some(Mode::NonRelativistic),
            Some(_) => {
                self.fail("mode", "expected \"relativistic\" or \"nonrelativistic\"");
                None
            }
        };
        let params = self.params(root.get("params"), mode.unwrap_or_default());
        let (potential, barrier) = match root.get("potential") {
            None => (Some(PotentialSpec::constant(0.0)), None),
            Some(p) => self.potential(p),
        };

        let energy = match (root.get("energy"), root.get("energy_nr")) {
            (Some(_), Some(_)) => {
                self.fail("energy", "give either energy or energy_nr, not both");
                None
            }
            (Some(e), None) => self.number(e, "energy").map(Energy::Total),
            (None, Some(e)) => self.number(e, "energy_nr").map(Energy::NonRelativistic),
            (None, None) => None,
        };

        let constants = match root.get("constants") {
            None => Some(Constants::default()),
            Some(c) => self.constants(c),
        };

        let kind = self.task_kind(root.get("task"), task_hint);
        let task = kind.and_then(|k| self.task(root, k, energy.is_some(), barrier.is_some()));

        let output = match root.get("output") {
            None => Some(OutputConfig::default()),
            Some(o) => self.output(o),
        };

        let solver = match root.get("solver") {
            None => Some(OdeTolerance::default()),
            Some(s) => self.solver(s),
        };

        Some(ScenarioConfig {
            params: params?,
            potential: potential?,
            barrier,
            energy,
            constants: constants?,
            task: task?,
            output: output?,
            solver: solver?,
        })
    }

    fn params(&mut self, v: Option<&Value>, mode: Mode) -> Option<PhysicalParams> {
        let empty = Map::new();
        let map = match v {
            None => &empty,
            Some(v) => self.object(
                v,
                "params",
                &["mass", "light_speed", "hbar", "turning_tolerance"],
            )?,
        };
        let m = self.positive(map, "params", "mass", 1.0);
        let c = self.positive(map, "params", "light_speed", 1.0);
        let h = self.positive(map, "params", "hbar", 1.0);
        let tol = self.positive(
            map,
            "params",
            "turning_tolerance",
            qtraj_core::model::DEFAULT_TURNING_TOLERANCE,
        );
        let p = PhysicalParams::new(m?, c?, h?, mode).ok()?;
        match p.with_turning_tolerance(tol?) {
            Ok(p) => Some(p),
            Err(e) => {
                self.fail("params.turning_tolerance", e.to_string());
                None
            }
        }
    }

    fn potential(&mut self, v: &Value) -> (Option<PotentialSpec>, Option<RectangularBarrier>) {
        let Some(map) = v.as_object() else {
            self.fail("potential", "expected an object");
            return (None, None);
        };
        let kind = map.get("type").and_then(Value::as_str);
        match kind {
            Some("constant") => {
                if self.object(v, "potential", &["type", "value"]).is_none() {
                    return (None, None);
                }
                let value = self.opt_number(map, "potential", "value", 0.0);
                (value.map(PotentialSpec::constant), None)
            }
            Some("barrier") => {
                if self
                    .object(v, "potential", &["type", "height", "width"])
                    .is_none()
                {
                    return (None, None);
                }
                let height = map
                    .get("height")
                    .and_then(|h| self.number(h, "potential.height"));
                if !map.contains_key("height") {
                    self.fail("potential.height", "required");
                }
                let width = self.positive(map, "potential", "width", 1.0);
                let (Some(height), Some(width)) = (height, width) else {
                    return (None, None);
                };
                match RectangularBarrier::new(height, width) {
                    Ok(b) => (Some(b.to_spec()), Some(b)),
                    Err(e) => {
                        self.fail("potential", e.to_string());
                        (None, None)
                    }
                }
            }
            Some("piecewise") => {
                if self.object(v, "potential", &["type", "segments"]).is_none() {
                    return (None, None);
                }
                let Some(Value::Array(items)) = map.get("segments") else {
                    self.fail("potential.segments", "expected an array of segments");
                    return (None, None);
                };
                let mut segments = Vec::new();
                for (i, item) in items.iter().enumerate() {
                    let path = format!("potential.segments[{i}]");
                    let Some(seg) = self.object(item, &path, &["left", "right", "value"]) else {
                        continue;
                    };
                    let edge = |r: &mut Self, key: &str, inf: f64| match seg.get(key) {
                        None | Some(Value::Null) => Some(inf),
                        Some(x) => r.number(x, &join(&path, key)),
                    };
                    let left = edge(self, "left", f64::NEG_INFINITY);
                    let right = edge(self, "right", f64::INFINITY);
                    let value = match seg.get("value") {
                        Some(x) => self.number(x, &join(&path, "value")),
                        None => {
                            self.fail(join(&path, "value"), "required");
                            None
                        }
                    };
                    if let (Some(l), Some(r), Some(val)) = (left, right, value) {
                        segments.push(Segment::new(l, r, val));
                    }
                }
                if segments.len() != items.len() {
                    return (None, None);
                }
                match PotentialSpec::piecewise(segments) {
                    Ok(s) => (Some(s), None),
                    Err(e) => {
                        self.fail("potential.segments", e.to_string());
                        (None, None)
                    }
                }
            }
            Some("tabulated") => {
                if self.object(v, "potential", &["type", "x", "v"]).is_none() {
                    return (None, None);
                }
                let xs = map.get("x").and_then(|x| self.numbers(x, "potential.x"));
                let vs = map.get("v").and_then(|x| self.numbers(x, "potential.v"));
                for key in ["x", "v"] {
                    if !map.contains_key(key) {
                        self.fail(join("potential", key), "required");
                    }
                }
                let (Some(xs), Some(vs)) = (xs, vs) else {
                    return (None, None);
                };
                match PotentialSpec::tabulated(&xs, &vs) {
                    Ok(s) => (Some(s), None),
                    Err(e) => {
                        self.fail("potential", e.to_string());
                        (None, None)
                    }
                }
            }
            _ => {
                self.fail(
                    "potential.type",
                    "expected one of: constant, barrier, piecewise, tabulated",
                );
                (None, None)
            }
        }
    }

    fn constants(&mut self, v: &Value) -> Option<Constants> {
        let map = self.object(v, "constants", &["a", "b", "lambda", "t0", "x0"])?;
        let d = Constants::default();
        let a = self.opt_number(map, "constants", "a", d.a);
        if a == Some(0.0) {
            self.fail("constants.a", "must satisfy a ≠ 0");
        }
        let b = self.opt_number(map, "constants", "b", d.b);
        let lambda = self.opt_number(map, "constants", "lambda", d.lambda);
        let t0 = self.opt_number(map, "constants", "t0", d.t0);
        let x0 = self.opt_number(map, "constants", "x0", d.x0);
        Some(Constants {
            a: a.filter(|&a| a != 0.0)?,
            b: b?,
            lambda: lambda?,
            t0: t0?,
            x0: x0?,
        })
    }

    fn task_kind(&mut self, v: Option<&Value>, hint: Option<TaskKind>) -> Option<TaskKind> {
        let named = match v {
            None => None,
            Some(Value::String(s)) => match TaskKind::parse(s) {
                Some(k) => Some(k),
                None => {
                    self.fail(
                        "task",
                        format!("unknown task {s:?}; valid tasks: {}", TASKS.join(", ")),
                    );
                    return None;
                }
            },
            Some(_) => {
                self.fail(
                    "task",
                    format!("expected a string; valid tasks: {}", TASKS.join(", ")),
                );
                return None;
            }
        };
        match (named, hint) {
            (Some(n), Some(h)) if n != h => {
                self.fail(
                    "task",
                    format!(
                        "document is for {:?} but {:?} was requested",
                        n.as_str(),
                        h.as_str()
                    ),
                );
                None
            }
            (Some(k), _) | (None, Some(k)) => Some(k),
            (None, None) => {
                self.fail(
                    "task",
                    format!("required; valid tasks: {}", TASKS.join(", ")),
                );
                None
            }
        }
    }

    fn section<'v>(
        &mut self,
        root: &'v Map<String, Value>,
        name: &str,
        keys: &[&str],
    ) -> Option<&'v Map<String, Value>> {
        static EMPTY: std::sync::OnceLock<Map<String, Value>> = std::sync::OnceLock::new();
        match root.get(name) {
            None => Some(EMPTY.get_or_init(Map::new)),
            Some(v) => self.object(v, name, keys),
        }
    }

    fn task(
        &mut self,
        root: &Map<String, Value>,
        kind: TaskKind,
        has_energy: bool,
        has_barrier: bool,
    ) -> Option<Task> {
        let needs_energy = matches!(
            kind,
            TaskKind::Trajectory | TaskKind::Nodes | TaskKind::Tunnel
        );
        if needs_energy && !has_energy {
            self.fail(
                "energy",
                format!(
                    "required for the {} task (or give energy_nr)",
                    kind.as_str()
                ),
            );
        }
        match kind {
            TaskKind::Trajectory => {
                let s = self.section(root, "trajectory", &["t_span", "samples", "domain"])?;
                let t_span = match s.get("t_span") {
                    Some(v) => self.pair(v, "trajectory.t_span"),
                    None => {
                        self.fail("trajectory.t_span", "required");
                        None
                    }
                };
                if let Some((lo, hi)) = t_span {
                    if lo > hi {
                        self.fail("trajectory.t_span", "start must not exceed end");
                    }
                }
                let samples = self.count(s, "trajectory", "samples", 101, 2);
                let domain = match s.get("domain") {
                    None => Some(None),
                    Some(v) => match self.pair(v, "trajectory.domain") {
                        Some((lo, hi)) if lo < hi => Some(Some((lo, hi))),
                        Some(_) => {
                            self.fail("trajectory.domain", "must be increasing");
                            None
                        }
                        None => None,
                    },
                };
                let t_span = t_span.filter(|(lo, hi)| lo <= hi)?;
                Some(Task::Trajectory(TrajectoryTask {
                    t_span,
                    samples: samples?,
                    domain: domain?,
                }))
            }
            TaskKind::Nodes => {
                let s = self.section(root, "nodes", &["n_range"])?;
                let n_range = match s.get("n_range") {
                    None => Some((0, 4)),
                    Some(v) => match v
                        .as_array()
                        .map(|a| a.iter().map(Value::as_i64).collect::<Vec<_>>())
                    {
                        Some(xs) if xs.len() == 2 && xs.iter().all(Option::is_some) => {
                            let (lo, hi) = (xs[0].unwrap(), xs[1].unwrap());
                            if lo <= hi {
                                Some((lo, hi))
                            } else {
                                self.fail("nodes.n_range", "start must not exceed end");
                                None
                            }
                        }
                        _ => {
                            self.fail("nodes.n_range", "expected two integers");
                            None
                        }
                    },
                };
                Some(Task::Nodes(NodesTask { n_range: n_range? }))
            }
            TaskKind::Tunnel => {
                if !has_barrier {
                    self.fail(
                        "potential",
                        "the tunnel task needs a potential of type barrier",
                    );
                }
                let s = self.section(root, "tunnel", &["q"])?;
                let widths = match s.get("q") {
                    None => None,
                    Some(v) => {
                        let qs = self.numbers(v, "tunnel.q")?;
                        if qs.is_empty() || qs.iter().any(|&q| q <= 0.0) {
                            self.fail("tunnel.q", "expected a non-empty list of positive widths");
                            return None;
                        }
                        Some(qs)
                    }
                };
                Some(Task::Tunnel(TunnelTask {
                    widths: widths.unwrap_or_default(),
                }))
            }
            TaskKind::Residuals => {
                let s = self.section(root, "residuals", &["draws", "samples"])?;
                let draws = self.count(s, "residuals", "draws", 50, 1);
                let samples = self.count(s, "residuals", "samples", 1000, 2);
                Some(Task::Residuals(ResidualsTask {
                    draws: draws?,
                    samples: samples?,
                }))
            }
            TaskKind::Sweep => {
                let s = self.section(root, "sweep", &["energies", "a", "b", "samples"])?;
                let energies = match s.get("energies") {
                    Some(v) => self.numbers(v, "sweep.energies"),
                    None => {
                        self.fail("sweep.energies", "required");
                        None
                    }
                };
                let a = match s.get("a") {
                    None => Some(vec![1.0]),
                    Some(v) => self.numbers(v, "sweep.a"),
                };
                if let Some(a) = &a {
                    if a.contains(&0.0) {
                        self.fail("sweep.a", "must satisfy a ≠ 0");
                    }
                }
                let b = match s.get("b") {
                    None => Some(vec![0.0]),
                    Some(v) => self.numbers(v, "sweep.b"),
                };
                let samples = self.count(s, "sweep", "samples", 64, 2);
                Some(Task::Sweep(SweepTask {
                    energies: energies?,
                    a: a.filter(|a| !a.contains(&0.0))?,
                    b: b?,
                    samples: samples?,
                }))
            }
        }
    }

    fn solver(&mut self, v: &Value) -> Option<OdeTolerance> {
        let map = self.object(v, "solver", &["rel_tol", "abs_tol"])?;
        let d = OdeTolerance::default();
        let rel = self.positive(map, "solver", "rel_tol", d.rel);
        let abs = self.positive(map, "solver", "abs_tol", d.abs);
        Some(OdeTolerance {
            rel: rel?,
            abs: abs?,
        })
    }

    fn output(&mut self, v: &Value) -> Option<OutputConfig> {
        let map = self.object(v, "output", &["path", "format"])?;
        let path = match map.get("path") {
            None | Some(Value::Null) => Some(None),
            Some(Value::String(s)) => Some(Some(PathBuf::from(s))),
            Some(_) => {
                self.fail("output.path", "expected a string");
                None
            }
        };
        let format = match map.get("format") {
            None => Some(Format::Csv),
            Some(Value::String(s)) => {
                let f = Format::parse(s);
                if f.is_none() {
                    self.fail("output.format", "expected \"csv\" or \"json\"");
                }
                f
            }
            Some(_) => {
                self.fail("output.format", "expected \"csv\" or \"json\"");
                None
            }
        };
        Some(OutputConfig {
            path: path?,
            format: format?,
        })
    }
}
