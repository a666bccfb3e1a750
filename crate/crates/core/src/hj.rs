//! Reduced action, conjugate momentum and the stationary Hamilton-Jacobi residual.
//!
//! For a basis `(φ1, φ2)` with Wronskian `W` and constants `(a, b, λ)`:
//!
//! ```text
//! S0 = ħ·arctan(a·φ1/φ2 + b) + ħλ
//! P  = ∂S0/∂x = ħ·a·W / (φ2² + (a·φ1 + b·φ2)²)
//! ```
//!
//! `P` has the sign of `aW` and never vanishes. Its derivatives follow from
//! the quotient rule with `φ'' = Qφ`, so no finite differencing is involved.

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use crate::fmath::{atan, atan2, round};
use crate::model::{Mode, PhysicalParams};
use crate::potential::PotentialSpec;

use core::f64::consts::{FRAC_PI_2, PI};

/// The non-classical integration constants selecting one trajectory, plus the
/// reference epoch and position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicrostateConstants {
    pub(crate) a: f64,
    pub(crate) b: f64,
    pub(crate) lambda: f64,
    pub(crate) t0: f64,
    pub(crate) x0: f64,
}

impl MicrostateConstants {
    /// `a` must be finite and non-zero.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a != 0.0) {
            return Err(Error::InvalidArgument(
                "constant a must be finite and non-zero",
            ));
        }
        if !b.is_finite() {
            return Err(Error::InvalidArgument("constant b must be finite"));
        }
        Ok(Self {
            a,
            b,
            lambda: 0.0,
            t0: 0.0,
            x0: 0.0,
        })
    }

    /// `a = 1, b = 0`: the trajectory that coincides with the classical one.
    pub fn classical() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            lambda: 0.0,
            t0: 0.0,
            x0: 0.0,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Reference epoch `t0`: the time at which the particle sits at `x0`.
    pub fn with_epoch(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// Reference position `x0`; also where `S0` takes its principal arctan value.
    pub fn with_origin(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
}

/// `S0` and the first three spatial derivatives of the action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HJState {
    pub action: f64,
    pub momentum: f64,
    pub dmomentum: f64,
    pub d2momentum: f64,
}

/// `(P/ħ, (P/ħ)', (P/ħ)'')` at `x`.
pub(crate) fn momentum_ratio_jet(
    basis: &BasisPair,
    a: f64,
    b: f64,
    x: f64,
) -> Result<(f64, f64, f64)> {
    let f = basis.eval(x)?;
    let q = basis.curvature(x)?;
    let psi = a * f.phi1 + b * f.phi2;
    let dpsi = a * f.dphi1 + b * f.dphi2;
    let d = f.phi2 * f.phi2 + psi * psi;
    let dd = 2.0 * (f.phi2 * f.dphi2 + psi * dpsi);
    let ddd = 2.0 * (f.dphi2 * f.dphi2 + dpsi * dpsi) + 2.0 * q * d;
    let p = a * basis.wronskian_ref() / d;
    let r = dd / d;
    Ok((p, -p * r, p * (2.0 * r * r - ddd / d)))
}

/// Principal value `arctan(ψ/φ2)`, with `±π/2` where `φ2 = 0`.
fn principal_phase(basis: &BasisPair, a: f64, b: f64, x: f64) -> Result<(f64, f64, f64)> {
    let f = basis.eval(x)?;
    let psi = a * f.phi1 + b * f.phi2;
    let principal = if f.phi2 == 0.0 {
        FRAC_PI_2.copysign(psi)
    } else {
        atan(psi / f.phi2)
    };
    Ok((principal, f.phi2, psi))
}

/// Tracks the continuous phase `θ = S0/ħ − λ` of the vector `(φ2, ψ)` by
/// stepping in sub-wavelength increments and unwrapping.
pub(crate) struct PhaseWalker<'a> {
    basis: &'a BasisPair,
    a: f64,
    b: f64,
    x: f64,
    theta: f64,
    angle: f64,
}

impl<'a> PhaseWalker<'a> {
    pub(crate) fn new(basis: &'a BasisPair, consts: &MicrostateConstants) -> Result<Self> {
        let (principal, phi2, psi) = principal_phase(basis, consts.a, consts.b, consts.x0)?;
        Ok(Self {
            basis,
            a: consts.a,
            b: consts.b,
            x: consts.x0,
            theta: principal,
            angle: atan2(psi, phi2),
        })
    }

    fn step_to(&mut self, x: f64) -> Result<()> {
        let f = self.basis.eval(x)?;
        let angle = atan2(self.a * f.phi1 + self.b * f.phi2, f.phi2);
        let mut delta = angle - self.angle;
        while delta > PI {
            delta -= 2.0 * PI;
        }
        while delta <= -PI {
            delta += 2.0 * PI;
        }
        self.theta += delta;
        self.angle = angle;
        self.x = x;
        Ok(())
    }

    /// Continuous phase at `x`; the walker may move in either direction.
    pub(crate) fn advance_to(&mut self, x: f64) -> Result<f64> {
        while self.x != x {
            let remaining = x - self.x;
            let h = match self.basis.length_scale(self.x)? {
                Some(ell) => (0.5 * ell).min(remaining.abs()),
                None => remaining.abs(),
            };
            let next = if h >= remaining.abs() {
                x
            } else {
                self.x + h.copysign(remaining)
            };
            self.step_to(next)?;
        }
        Ok(self.theta)
    }

    /// `(θ, n)` where `θ = principal + nπ`.
    pub(crate) fn phase_and_branch(&mut self, x: f64) -> Result<(f64, i64)> {
        let theta = self.advance_to(x)?;
        let (principal, _, _) = principal_phase(self.basis, self.a, self.b, x)?;
        Ok((theta, round((theta - principal) / PI) as i64))
    }
}

/// `S0(x)`, continued across zeros of `φ2` so that it is continuous in `x`.
///
/// The principal branch is taken at the reference position `x0`.
pub fn reduced_action(
    basis: &BasisPair,
    consts: &MicrostateConstants,
    params: &PhysicalParams,
    x: f64,
) -> Result<f64> {
    let mut walker = PhaseWalker::new(basis, consts)?;
    let theta = walker.advance_to(x)?;
    Ok(params.hbar() * (theta + consts.lambda))
}

/// Reduced action together with its arctan branch index.
pub fn reduced_action_with_branch(
    basis: &BasisPair,
    consts: &MicrostateConstants,
    params: &PhysicalParams,
    x: f64,
) -> Result<(f64, i64)> {
    let mut walker = PhaseWalker::new(basis, consts)?;
    let (theta, n) = walker.phase_and_branch(x)?;
    Ok((params.hbar() * (theta + consts.lambda), n))
}

/// `P = ħ·a·W / (φ2² + (a·φ1 + b·φ2)²)`.
pub fn conjugate_momentum(
    basis: &BasisPair,
    consts: &MicrostateConstants,
    params: &PhysicalParams,
    x: f64,
) -> Result<f64> {
    let f = basis.eval(x)?;
    let psi = consts.a * f.phi1 + consts.b * f.phi2;
    Ok(params.hbar() * consts.a * basis.wronskian_ref() / (f.phi2 * f.phi2 + psi * psi))
}

/// `(P, P', P'')` without the action.
pub(crate) fn momentum_jet(
    basis: &BasisPair,
    consts: &MicrostateConstants,
    params: &PhysicalParams,
    x: f64,
) -> Result<(f64, f64, f64)> {
    let (p, dp, ddp) = momentum_ratio_jet(basis, consts.a, consts.b, x)?;
    let hbar = params.hbar();
    Ok((hbar * p, hbar * dp, hbar * ddp))
}

pub fn momentum_derivatives(
    basis: &BasisPair,
    consts: &MicrostateConstants,
    params: &PhysicalParams,
    x: f64,
) -> Result<HJState> {
    let (momentum, dmomentum, d2momentum) = momentum_jet(basis, consts, params, x)?;
    Ok(HJState {
        action: reduced_action(basis, consts, params, x)?,
        momentum,
        dmomentum,
        d2momentum,
    })
}

/// Left minus right side of the stationary Hamilton-Jacobi equation,
/// divided by `mc²` (relativistic) or `|E − V|` (non-relativistic).
pub fn qshje_residual(
    params: &PhysicalParams,
    spec: &PotentialSpec,
    energy: f64,
    state: &HJState,
    x: f64,
) -> Result<f64> {
    let v = spec.eval(x)?.value;
    Ok(qshje_residual_at(
        params,
        energy - v,
        state.momentum,
        state.dmomentum,
        state.d2momentum,
    ))
}

pub(crate) fn qshje_residual_at(
    params: &PhysicalParams,
    eps: f64,
    p: f64,
    dp: f64,
    ddp: f64,
) -> f64 {
    let m = params.mass();
    let hbar = params.hbar();
    let quantum = hbar * hbar / (4.0 * m) * (1.5 * (dp / p) * (dp / p) - ddp / p);
    match params.mode() {
        Mode::Relativistic => {
            let mc2 = params.rest_energy();
            // p²/2m + mc²/2 − ε²/(2mc²) written as (p²c² − (ε² − m²c⁴)) / (2mc²)
            let c = params.light_speed();
            let classical = (p * p * c * c - params.gap(eps)) / (2.0 * mc2);
            (classical - quantum) / mc2
        }
        Mode::NonRelativistic => {
            let classical = p * p / (2.0 * m) - eps;
            (classical - quantum) / eps.abs().max(f64::MIN_POSITIVE)
        }
    }
}
