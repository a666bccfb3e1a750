//! Closed-form motion in a constant potential.
//!
//! With the trigonometric basis the law of motion integrates to
//! `arctan(a·tan(kx) + b) = ω(t − t0)` with `ω = G/ħ`, and with the
//! exponential basis to `arctan(a·e^{2κx} + b) = (G/ħ)(t − t0)`. The additive
//! constant of the reduced action is absorbed into `t0`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fmath::{atan2, cos, ln, round, sin, sqrt};
use crate::hj::MicrostateConstants;
use crate::model::{Mode, PhysicalParams, RegionClass};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatingPosition {
    pub x: f64,
    /// Index of the `[−π/2, π/2]` window of `ω(t − t0)` containing `t`.
    pub branch: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvanescentPosition {
    pub x: f64,
    /// First time after `t0` at which the velocity diverges.
    pub divergence_time: f64,
    /// `t` sits on a divergence time to within rounding.
    pub near_divergence: bool,
    /// The log argument is positive without taking its absolute value, i.e.
    /// the point lies on the trajectory the exponential basis actually
    /// describes rather than on its mirror image.
    pub on_physical_branch: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub n: i64,
    pub t: f64,
    pub x: f64,
}

/// Node coordinates and the spacings shared by all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTable {
    pub nodes: Vec<Node>,
    /// Time between adjacent nodes (positive).
    pub dt: f64,
    /// Distance between adjacent nodes (positive).
    pub dx: f64,
    /// Signed mean velocity between adjacent nodes.
    pub mean_velocity: f64,
    pub de_broglie: f64,
}

struct Propagating {
    k: f64,
    omega: f64,
}

fn propagating(params: &PhysicalParams, eps: f64) -> Result<Propagating> {
    if params.mode() == Mode::Relativistic && eps == 0.0 {
        return Err(Error::ZeroEpsilon);
    }
    if params.classify(eps, 0.0) != RegionClass::Propagating {
        return Err(Error::NotPropagating);
    }
    Ok(Propagating {
        k: sqrt(params.wave_number_sq(eps)),
        omega: params.drive(eps) / params.hbar(),
    })
}

/// Position at time `t` with the branch window made explicit.
///
/// `x(t)` is continuous and strictly monotone, increasing when `a·ε > 0`.
/// For `a < 0` the nodes sit at `−π(n + ½)/k`.
pub fn propagating_position(
    params: &PhysicalParams,
    eps: f64,
    consts: &MicrostateConstants,
    t: f64,
) -> Result<PropagatingPosition> {
    let pr = propagating(params, eps)?;
    let theta = pr.omega * (t - consts.t0);
    let w = round(theta / PI);
    let tr = theta - w * PI;
    let (s, c) = (sin(tr), cos(tr));
    let sign = consts.a.signum();
    // arctan((tan θ − b)/a) on the principal window, written to stay finite at θ = ±π/2
    let angle = atan2((s - consts.b * c) * sign, consts.a.abs() * c);
    Ok(PropagatingPosition {
        x: (angle + sign * w * PI) / pr.k,
        branch: w as i64,
    })
}

/// `ẋ = (G/ħk)·a / (a²cos²θ + (sin θ − b cos θ)²)` with `θ = ω(t − t0)`.
pub fn propagating_velocity(
    params: &PhysicalParams,
    eps: f64,
    consts: &MicrostateConstants,
    t: f64,
) -> Result<f64> {
    let pr = propagating(params, eps)?;
    let theta = pr.omega * (t - consts.t0);
    let (s, c) = (sin(theta), cos(theta));
    let (a, b) = (consts.a, consts.b);
    let q = s - b * c;
    Ok(pr.omega / pr.k * a / (a * a * c * c + q * q))
}

/// Nodes `n` in `n_range` (inclusive): the points every trajectory of energy
/// `eps` passes through, whatever `a` and `b`.
pub fn node_table(
    params: &PhysicalParams,
    eps: f64,
    consts: &MicrostateConstants,
    n_range: (i64, i64),
) -> Result<NodeTable> {
    let pr = propagating(params, eps)?;
    if n_range.0 > n_range.1 {
        return Err(Error::InvalidArgument("node range must be ordered"));
    }
    let sign = consts.a.signum();
    let nodes = (n_range.0..=n_range.1)
        .map(|n| {
            let phase = PI * (n as f64 + 0.5);
            Node {
                n,
                t: consts.t0 + phase / pr.omega,
                x: sign * phase / pr.k,
            }
        })
        .collect();
    let dt = PI / pr.omega.abs();
    let dx = PI / pr.k;
    Ok(NodeTable {
        nodes,
        dt,
        dx,
        mean_velocity: sign * pr.omega.signum() * dx / dt,
        de_broglie: 2.0 * PI / pr.k,
    })
}

struct Evanescent {
    kappa: f64,
    omega: f64,
}

fn evanescent(params: &PhysicalParams, eps: f64) -> Result<Evanescent> {
    if params.mode() == Mode::Relativistic && eps == 0.0 {
        return Err(Error::ZeroEpsilon);
    }
    if params.classify(eps, 0.0) != RegionClass::Evanescent {
        return Err(Error::NotEvanescent);
    }
    Ok(Evanescent {
        kappa: sqrt(-params.wave_number_sq(eps)),
        omega: -params.drive(eps) / params.hbar(),
    })
}

fn rounding_scale(theta: f64, b: f64) -> f64 {
    64.0 * f64::EPSILON * theta.abs().max(1.0) * (1.0 + b.abs())
}

/// `x = (1/2κ)·ln|(sin θ + b cos θ)/(a cos θ)|` with `θ = ω'(t − t0)`, `ω' = −G/ħ`.
pub fn evanescent_position(
    params: &PhysicalParams,
    eps: f64,
    consts: &MicrostateConstants,
    t: f64,
) -> Result<EvanescentPosition> {
    let ev = evanescent(params, eps)?;
    let theta = ev.omega * (t - consts.t0);
    let (s, c) = (sin(theta), cos(theta));
    let num = s + consts.b * c;
    let den = consts.a * c;
    let tol = rounding_scale(theta, consts.b);
    if num.abs() <= tol {
        return Err(Error::LogSingularity { t });
    }
    let x = if den == 0.0 {
        f64::INFINITY
    } else {
        ln((num / den).abs()) / (2.0 * ev.kappa)
    };
    Ok(EvanescentPosition {
        x,
        divergence_time: consts.t0 + PI / (2.0 * ev.omega.abs()),
        near_divergence: c.abs() <= tol,
        on_physical_branch: num / den < 0.0,
    })
}

/// `ẋ = (ω'/2κ) / (cos θ·(sin θ + b cos θ))`.
pub fn evanescent_velocity(
    params: &PhysicalParams,
    eps: f64,
    consts: &MicrostateConstants,
    t: f64,
) -> Result<f64> {
    let ev = evanescent(params, eps)?;
    let theta = ev.omega * (t - consts.t0);
    let (s, c) = (sin(theta), cos(theta));
    let num = s + consts.b * c;
    let tol = rounding_scale(theta, consts.b);
    if c.abs() <= tol || num.abs() <= tol {
        return Err(Error::PoleAtDivergenceTime { t });
    }
    Ok(ev.omega / (2.0 * ev.kappa) / (c * num))
}
