//! Law of motion, time of flight, trajectories and the conservation residual.
//!
//! The law of motion is first order: `ẋ = G(ε)/P(x)` with `G = ε − m²c⁴/ε`
//! (or `2ε` non-relativistically). Trajectories are built from its inverse
//! `dt/dx = P/G`, which stays smooth and single-signed inside a region even
//! where `ẋ` itself swings far above `c`: the map `t(x)` is accumulated by
//! quadrature on a sub-wavelength grid and inverted by safeguarded Newton
//! iteration at each requested time.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::fmath::sqrt;
use crate::hj::{momentum_jet, qshje_residual_at, MicrostateConstants, PhaseWalker};
use crate::model::{Mode, PhysicalParams, RegionClass};
use crate::potential::{PotentialSpec, PotentialValue, Side};
use crate::quad::{self, QuadOptions};

/// Position and its first three time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    /// Time, when known (kinematics at a bare position carry `None`).
    pub t: Option<f64>,
    pub x: f64,
    pub velocity: f64,
    pub acceleration: f64,
    pub jerk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub velocity: f64,
    pub momentum: f64,
    pub action: f64,
    pub qshje_residual: f64,
    pub firqnl_residual: f64,
    /// Arctan branch index of the reduced action relative to `x0`.
    pub branch: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// `ε² → m²c⁴`: the velocity vanishes and `t(x)` diverges.
    TurningReached,
    /// `ε → 0`: the relativistic law of motion has a pole.
    PoleReached,
    /// End of the basis domain or a potential discontinuity.
    DomainEdge,
    /// `x` runs off to infinity in finite time, or the step budget ran out.
    Escape,
}

impl BoundaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryKind::TurningReached => "turning_reached",
            BoundaryKind::PoleReached => "pole_reached",
            BoundaryKind::DomainEdge => "domain_edge",
            BoundaryKind::Escape => "escape",
        }
    }
}

/// Where a trajectory stopped short of the requested time span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEvent {
    pub kind: BoundaryKind,
    pub x: f64,
    /// Last time actually reached.
    pub t: f64,
}

/// Samples ordered in time plus any boundary events that truncated them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub boundaries: Vec<BoundaryEvent>,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.boundaries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// `n` equally spaced times across the span, endpoints included.
    Uniform(usize),
    /// Explicit times (sorted internally).
    Times(Vec<f64>),
}

impl Sampling {
    fn times(&self, span: (f64, f64)) -> Result<Vec<f64>> {
        let (lo, hi) = span;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(
                "time span must be finite and ordered",
            ));
        }
        match self {
            Sampling::Uniform(n) => {
                if lo == hi {
                    return Ok(vec![lo]);
                }
                if *n < 2 {
                    return Err(Error::InvalidArgument(
                        "uniform sampling needs at least 2 samples",
                    ));
                }
                let last = (*n - 1) as f64;
                Ok((0..*n)
                    .map(|i| {
                        if i == *n - 1 {
                            hi
                        } else {
                            lo + (hi - lo) * i as f64 / last
                        }
                    })
                    .collect())
            }
            Sampling::Times(ts) => {
                if ts.iter().any(|t| !t.is_finite()) {
                    return Err(Error::InvalidArgument("sample times must be finite"));
                }
                let mut ts = ts.clone();
                ts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                Ok(ts)
            }
        }
    }
}

/// `ẋ = (ε − m²c⁴/ε)/P`, or `2(E − V)/P` non-relativistically.
pub fn velocity_law(
    params: &PhysicalParams,
    energy: f64,
    potential: f64,
    momentum: f64,
) -> Result<f64> {
    if !(momentum.is_finite() && momentum != 0.0) {
        return Err(Error::InvalidArgument(
            "momentum must be finite and non-zero",
        ));
    }
    let eps = check_motion(params, energy, potential)?;
    Ok(params.drive(eps) / momentum)
}

/// `ε`, refusing turning points and (relativistically) `ε = 0`.
fn check_motion(params: &PhysicalParams, energy: f64, potential: f64) -> Result<f64> {
    let eps = energy - potential;
    if params.mode() == Mode::Relativistic && eps == 0.0 {
        return Err(Error::ZeroEpsilon);
    }
    if params.classify(energy, potential) == RegionClass::Turning {
        return Err(Error::TurningPoint { epsilon: eps });
    }
    Ok(eps)
}

/// `(ẋ_cl, P_cl)` of classical motion at the same energy.
pub fn classical_reference(
    params: &PhysicalParams,
    energy: f64,
    potential: f64,
) -> Result<(f64, f64)> {
    let eps = energy - potential;
    match params.classify(energy, potential) {
        RegionClass::Evanescent => Err(Error::ClassicallyForbidden),
        RegionClass::Turning => Ok((0.0, 0.0)),
        RegionClass::Propagating => match params.mode() {
            Mode::Relativistic => {
                let root = sqrt(params.gap(eps));
                Ok((
                    params.light_speed() * root / eps,
                    root / params.light_speed(),
                ))
            }
            Mode::NonRelativistic => {
                let m = params.mass();
                Ok((sqrt(2.0 * eps / m), sqrt(2.0 * m * eps)))
            }
        },
    }
}

/// Bundles the inputs shared by every trajectory computation.
struct Motion<'a> {
    basis: &'a BasisPair,
    consts: &'a MicrostateConstants,
    params: &'a PhysicalParams,
    spec: &'a PotentialSpec,
    energy: f64,
}

impl Motion<'_> {
    fn kinematics_at(&self, x: f64, pv: PotentialValue) -> Result<KinematicState> {
        let eps = check_motion(self.params, self.energy, pv.value)?;
        let (p, dp, ddp) = momentum_jet(self.basis, self.consts, self.params, x)?;
        let g = self.params.drive(eps);
        let (g1, g2) = self.params.drive_derivatives(eps);
        // dε/dx = −V'
        let dg = -g1 * pv.slope;
        let ddg = g2 * pv.slope * pv.slope - g1 * pv.curvature;
        let u = g / p;
        let du = dg / p - g * dp / (p * p);
        let ddu =
            ddg / p - 2.0 * dg * dp / (p * p) - g * ddp / (p * p) + 2.0 * g * dp * dp / (p * p * p);
        Ok(KinematicState {
            t: None,
            x,
            velocity: u,
            acceleration: u * du,
            jerk: u * (du * du + u * ddu),
        })
    }

    /// `dt/dx = P/G`, with turning points and poles reported as interval errors.
    fn slowness(&self, x: f64, pv: PotentialValue) -> Result<f64> {
        let eps = self.energy - pv.value;
        if self.params.mode() == Mode::Relativistic && eps == 0.0 {
            return Err(Error::PoleInInterval { x });
        }
        if self.params.classify(self.energy, pv.value) == RegionClass::Turning {
            return Err(Error::TurningInInterval { x });
        }
        let (p, _, _) = momentum_jet(self.basis, self.consts, self.params, x)?;
        Ok(p / self.params.drive(eps))
    }

    fn potential_inside(&self, x: f64, lo: f64, hi: f64) -> Result<PotentialValue> {
        match self.spec.eval(x) {
            Err(Error::AtDiscontinuity { .. }) => {
                let side = if x <= lo {
                    Side::Right
                } else if x >= hi {
                    Side::Left
                } else {
                    Side::Right
                };
                self.spec.eval_one_sided(x, side)
            }
            other => other,
        }
    }

    /// Sign pattern `(gap, ε)` used to detect regime changes.
    fn signature(&self, pv: PotentialValue) -> (bool, bool) {
        let eps = self.energy - pv.value;
        (self.params.gap(eps) > 0.0, eps > 0.0)
    }

    fn time_between(&self, from: f64, to: f64) -> Result<f64> {
        if from == to {
            return Ok(0.0);
        }
        let (lo, hi) = if from < to { (from, to) } else { (to, from) };

        let mut marks: Vec<f64> = vec![lo];
        marks.extend(self.spec.discontinuities_in(lo, hi));
        marks.extend(self.spec.knots_in(lo, hi));
        marks.push(hi);
        marks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        marks.dedup();

        // Screen each piece for a change of regime between its ends.
        for w in marks.windows(2) {
            let left = self.potential_inside(w[0], w[0], w[1])?;
            let right = self.potential_inside(w[1], w[0], w[1])?;
            for (x, pv) in [(w[0], left), (w[1], right)] {
                self.slowness(x, pv)?;
            }
            let (gl, el) = self.signature(left);
            let (gr, er) = self.signature(right);
            if gl != gr {
                return Err(Error::TurningInInterval {
                    x: 0.5 * (w[0] + w[1]),
                });
            }
            if el != er {
                return Err(Error::PoleInInterval {
                    x: 0.5 * (w[0] + w[1]),
                });
            }
        }

        // Split into pieces no longer than two local lengths.
        let mut breaks = vec![marks[0]];
        for w in marks.windows(2) {
            let mut x = w[0];
            while x < w[1] {
                let ell = self.basis.length_scale(x)?.unwrap_or(w[1] - w[0]);
                let next = (x + 2.0 * ell).min(w[1]);
                breaks.push(next);
                x = next;
            }
        }

        let r = quad::integrate_pieces(
            |x| {
                let pv = self.potential_inside(x, lo, hi)?;
                self.slowness(x, pv)
            },
            &breaks,
            QuadOptions::default(),
        )?;
        if !r.converged {
            return Err(Error::QuadratureFailure {
                estimated_error: r.error,
            });
        }
        Ok(if from < to { r.value } else { -r.value })
    }
}

/// `(ẋ, ẍ, x⃛)` at `x` from the analytic momentum derivatives and the chain
/// rule `ẍ = ẋ·dẋ/dx`, `x⃛ = ẋ·dẍ/dx`.
pub fn kinematics(
    basis: &BasisPair,
    consts: &MicrostateConstants,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    energy: f64,
    x: f64,
) -> Result<KinematicState> {
    let motion = Motion {
        basis,
        consts,
        params,
        spec,
        energy,
    };
    motion.kinematics_at(x, spec.eval(x)?)
}

/// Time to travel from `x_from` to `x_to`: the integral of `dt/dx = P·ε/(ε² − m²c⁴)`.
///
/// Negative when the particle moves from `x_to` to `x_from`.
pub fn time_of_flight(
    basis: &BasisPair,
    consts: &MicrostateConstants,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    energy: f64,
    x_from: f64,
    x_to: f64,
) -> Result<f64> {
    Motion {
        basis,
        consts,
        params,
        spec,
        energy,
    }
    .time_between(x_from, x_to)
}

/// Scaled residual of the first integral of the quantum Newton law.
///
/// Relativistic: the left side divided by `(mc²)⁸`, evaluated in natural
/// units. Non-relativistic: the left side divided by `(E − V)⁴`.
pub fn firqnl_residual(
    params: &PhysicalParams,
    spec: &PotentialSpec,
    energy: f64,
    kin: &KinematicState,
) -> Result<f64> {
    Ok(firqnl_at(params, energy, spec.eval(kin.x)?, kin))
}

pub(crate) fn firqnl_at(
    params: &PhysicalParams,
    energy: f64,
    pv: PotentialValue,
    kin: &KinematicState,
) -> f64 {
    let eps = energy - pv.value;
    match params.mode() {
        Mode::Relativistic => {
            let units = params.units();
            let e = eps / units.energy;
            let u = kin.velocity / units.velocity;
            let acc = kin.acceleration * units.time / units.velocity;
            let jerk = kin.jerk * units.time * units.time / units.velocity;
            let v1 = pv.slope * units.length / units.energy;
            let v2 = pv.curvature * units.length * units.length / units.energy;
            let e2 = e * e;
            let gap = -params.gap(eps) / (units.energy * units.energy);
            let t1 = gap * gap * gap * (1.0 - e2 * (1.0 - u * u));
            let t2 = 0.5 * gap * gap * e2 * (1.5 * (acc / u) * (acc / u) - jerk / u);
            let t3 = 0.5 * (1.0 - e2 * e2) * e * (u * u * v2 + acc * v1);
            let t4 = 0.25 * (1.0 - 10.0 * e2 - 3.0 * e2 * e2) * (u * v1) * (u * v1);
            t1 + t2 + t3 + t4
        }
        Mode::NonRelativistic => {
            let m = params.mass();
            let h2 = params.hbar() * params.hbar();
            let (v, a, j) = (kin.velocity, kin.acceleration, kin.jerk);
            let r = eps * eps * eps * eps - 0.5 * m * v * v * eps * eps * eps
                + h2 / 8.0 * (1.5 * (a / v) * (a / v) - j / v) * eps * eps
                - h2 / 8.0 * (v * v * pv.curvature + a * pv.slope) * eps
                - 3.0 * h2 / 16.0 * (v * pv.slope) * (v * pv.slope);
            r / (eps * eps * eps * eps)
        }
    }
}

const MAX_CELLS: usize = 1_000_000;
const STALL_LIMIT: usize = 64;

/// Sample the trajectory through `(t0, x0)` over `t_span`.
///
/// Marching stops at turning points, poles of the law of motion, domain edges
/// and potential discontinuities; the samples reached so far are returned
/// together with a [`BoundaryEvent`].
pub fn integrate_trajectory(
    basis: &BasisPair,
    consts: &MicrostateConstants,
    params: &PhysicalParams,
    spec: &PotentialSpec,
    energy: f64,
    t_span: (f64, f64),
    sampling: &Sampling,
) -> Result<Trajectory> {
    let motion = Motion {
        basis,
        consts,
        params,
        spec,
        energy,
    };
    let times = sampling.times(t_span)?;
    let (x0, t0) = (consts.x0, consts.t0);
    let start = motion.kinematics_at(x0, spec.eval(x0)?)?;
    let heading = start.velocity.signum();

    let mut backward: Vec<f64> = times.iter().copied().filter(|&t| t < t0).collect();
    backward.reverse();
    let forward: Vec<f64> = times.iter().copied().filter(|&t| t >= t0).collect();

    let mut boundaries = Vec::new();
    let (mut back_pts, back_event) = march(&motion, x0, t0, -heading, &backward)?;
    let (fwd_pts, fwd_event) = march(&motion, x0, t0, heading, &forward)?;
    boundaries.extend(back_event);
    boundaries.extend(fwd_event);
    back_pts.reverse();

    let mut walker = PhaseWalker::new(basis, consts)?;
    let mut samples = Vec::with_capacity(back_pts.len() + fwd_pts.len());
    for (t, x, from) in back_pts.into_iter().chain(fwd_pts) {
        let side = if from < x { Side::Left } else { Side::Right };
        let pv = match spec.eval(x) {
            Err(Error::AtDiscontinuity { .. }) => spec.eval_one_sided(x, side)?,
            other => other?,
        };
        let (p, dp, ddp) = momentum_jet(basis, consts, params, x)?;
        let mut kin = motion.kinematics_at(x, pv)?;
        kin.t = Some(t);
        let (theta, branch) = walker.phase_and_branch(x)?;
        samples.push(TrajectorySample {
            t,
            x,
            velocity: kin.velocity,
            momentum: p,
            action: params.hbar() * (theta + consts.lambda),
            qshje_residual: qshje_residual_at(params, energy - pv.value, p, dp, ddp),
            firqnl_residual: firqnl_at(params, energy, pv, &kin),
            branch,
        });
    }
    Ok(Trajectory {
        samples,
        boundaries,
    })
}

/// Samples `(t, x, x0)` and the event that ended the walk, if any.
type Walk = (Vec<(f64, f64, f64)>, Option<BoundaryEvent>);

/// Walk away from `x0` in direction `dir` (sign of `dx`), collecting `(t, x, x0)`
/// at each target time. Targets are ordered by increasing `|t − t0|`.
fn march(motion: &Motion<'_>, x0: f64, t0: f64, dir: f64, targets: &[f64]) -> Result<Walk> {
    let mut out = Vec::with_capacity(targets.len());
    let mut idx = 0;
    while idx < targets.len() && targets[idx] == t0 {
        out.push((t0, x0, x0));
        idx += 1;
    }
    if idx == targets.len() {
        return Ok((out, None));
    }

    let (dom_lo, dom_hi) = motion.basis.domain();
    let (spec_lo, spec_hi) = motion.spec.domain();
    let outer = if dir > 0.0 {
        dom_hi.min(spec_hi)
    } else {
        dom_lo.max(spec_lo)
    };
    let fallback_len = motion.params.units().length;
    let start_sig = motion.signature(motion.spec.eval(x0)?);

    let (mut xa, mut ta) = (x0, t0);
    // Once a regime change is bracketed, cells close in on it geometrically.
    let mut approach: Option<(f64, BoundaryKind)> = None;
    let mut stalls = 0;
    let mut event = None;

    for _ in 0..MAX_CELLS {
        if idx == targets.len() {
            break;
        }
        let ell = motion.basis.length_scale(xa)?.unwrap_or(fallback_len);
        let mut h = 0.5 * ell;
        let mut limit = outer;
        let next_disc = if dir > 0.0 {
            motion.spec.discontinuities_in(xa, outer).first().copied()
        } else {
            motion.spec.discontinuities_in(outer, xa).last().copied()
        };
        if let Some(d) = next_disc {
            limit = d;
        }
        if let Some((xc, kind)) = approach {
            let remaining = (xc - xa).abs();
            if remaining <= 1e-12 * xc.abs().max(ell) {
                event = Some(BoundaryEvent { kind, x: xc, t: ta });
                break;
            }
            h = h.min(0.5 * remaining);
        }
        let mut at_edge = false;
        if (limit - xa).abs() <= h {
            h = (limit - xa).abs();
            at_edge = true;
        }
        if h == 0.0 {
            event = Some(BoundaryEvent {
                kind: BoundaryKind::DomainEdge,
                x: xa,
                t: ta,
            });
            break;
        }
        let xb = xa + dir * h;

        if approach.is_none() {
            let side = if dir > 0.0 { Side::Left } else { Side::Right };
            let pv = motion.spec.eval_one_sided(xb, side)?;
            let turning = motion.params.classify(motion.energy, pv.value) == RegionClass::Turning;
            let sig = motion.signature(pv);
            if turning || sig != start_sig {
                let kind = if turning || sig.0 != start_sig.0 {
                    BoundaryKind::TurningReached
                } else {
                    BoundaryKind::PoleReached
                };
                let xc = locate_change(motion, xa, xb, start_sig, kind)?;
                approach = Some((xc, kind));
                continue;
            }
        }

        let tb = ta + motion.time_between(xa, xb)?;
        stalls = if tb == ta { stalls + 1 } else { 0 };
        while idx < targets.len() && (targets[idx] - t0).abs() <= (tb - t0).abs() {
            let x = invert_cell(motion, xa, ta, xb, tb, targets[idx])?;
            out.push((targets[idx], x, x0));
            idx += 1;
        }
        if idx == targets.len() {
            break;
        }
        if at_edge {
            event = Some(BoundaryEvent {
                kind: BoundaryKind::DomainEdge,
                x: xb,
                t: tb,
            });
            break;
        }
        if stalls >= STALL_LIMIT {
            event = Some(BoundaryEvent {
                kind: BoundaryKind::Escape,
                x: xb,
                t: tb,
            });
            break;
        }
        xa = xb;
        ta = tb;
    }
    if event.is_none() && idx < targets.len() {
        event = Some(BoundaryEvent {
            kind: BoundaryKind::Escape,
            x: xa,
            t: ta,
        });
    }
    Ok((out, event))
}

/// Bisect for the point in `(xa, xb]` where the regime leaves `start_sig`.
fn locate_change(
    motion: &Motion<'_>,
    xa: f64,
    xb: f64,
    start_sig: (bool, bool),
    kind: BoundaryKind,
) -> Result<f64> {
    let changed = |x: f64| -> Result<bool> {
        let pv = motion
            .spec
            .eval_one_sided(x, if xb > xa { Side::Left } else { Side::Right })?;
        let sig = motion.signature(pv);
        Ok(match kind {
            BoundaryKind::TurningReached => {
                sig.0 != start_sig.0
                    || motion.params.classify(motion.energy, pv.value) == RegionClass::Turning
            }
            _ => sig.1 != start_sig.1,
        })
    };
    let (mut good, mut bad) = (xa, xb);
    for _ in 0..200 {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if changed(mid)? {
            bad = mid;
        } else {
            good = mid;
        }
    }
    Ok(bad)
}

/// Solve `t(x) = target` inside a cell whose end times bracket the target.
fn invert_cell(
    motion: &Motion<'_>,
    xa: f64,
    ta: f64,
    xb: f64,
    tb: f64,
    target: f64,
) -> Result<f64> {
    if target == tb {
        return Ok(xb);
    }
    if target == ta {
        return Ok(xa);
    }
    let span = xb - xa;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut s = ((target - ta) / (tb - ta)).clamp(0.0, 1.0);
    let below = ta < target;
    // Time at the previous iterate, so each step only integrates the increment.
    let (mut x_prev, mut t_prev) = (xa, ta);
    for _ in 0..100 {
        let x = xa + s * span;
        let t = t_prev + motion.time_between(x_prev, x)?;
        (x_prev, t_prev) = (x, t);
        let residual = t - target;
        if residual == 0.0 {
            return Ok(x);
        }
        if (residual < 0.0) == below {
            lo = s;
        } else {
            hi = s;
        }
        let pv = motion.potential_inside(x, xa.min(xb), xa.max(xb))?;
        let slope = motion.slowness(x, pv)? * span;
        let mut next = s - residual / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 4.0 * f64::EPSILON || hi - lo <= 4.0 * f64::EPSILON {
            return Ok(xa + next * span);
        }
        s = next;
    }
    Ok(xa + s * span)
}
