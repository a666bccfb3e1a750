//! Traversal time of a rectangular barrier.
//!
//! Inside the barrier the exponential basis gives
//! `T(q) = (ħ/G)·[arctan(a·e^{2ξ} + b) − arctan(a + b)]` with `ξ = κq`, which
//! tends to `(ħ/G)·2κaq/(1 + (a + b)²)` for thin barriers and saturates at
//! `(ħ/G)·[sgn(a)·π/2 − arctan(a + b)]` for thick ones.

use core::f64::consts::FRAC_PI_2;

use crate::basis::constant_basis;
use crate::dynamics::time_of_flight;
use crate::error::{Error, Result};
use crate::fmath::{atan, atan2, exp, expm1, sqrt};
use crate::hj::MicrostateConstants;
use crate::model::{Mode, PhysicalParams, RegionClass};
use crate::potential::RectangularBarrier;

pub const THIN_LIMIT: f64 = 0.1;
pub const THICK_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Thin,
    Intermediate,
    Thick,
}

impl Regime {
    pub fn from_thickness(xi: f64) -> Self {
        if xi <= THIN_LIMIT {
            Regime::Thin
        } else if xi >= THICK_LIMIT {
            Regime::Thick
        } else {
            Regime::Intermediate
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Thin => "thin",
            Regime::Intermediate => "intermediate",
            Regime::Thick => "thick",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunnelingReport {
    pub q: f64,
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    /// `κq`.
    pub xi: f64,
    pub t_exact: f64,
    pub t_thin: f64,
    pub t_thick: f64,
    /// The same delay from adaptive quadrature of `dt/dx` across the barrier.
    pub t_quadrature: f64,
    pub regime: Regime,
}

/// Relativistic report at `E = Eⁿʳ + mc²` next to the non-relativistic one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonRelativisticComparison {
    pub relativistic: TunnelingReport,
    pub nonrelativistic: TunnelingReport,
}

/// Delay across `barrier` at total energy `energy`, with `(a, b)` the
/// constants of the trajectory inside the barrier.
///
/// The delay is positive only when `sgn(a) = sgn(G)`, i.e. `a < 0` for
/// `0 < ε < mc²` and `a > 0` for `−mc² < ε < 0` (always `a < 0`
/// non-relativistically); other signs are rejected.
pub fn barrier_delay(
    params: &PhysicalParams,
    barrier: &RectangularBarrier,
    energy: f64,
    consts: &MicrostateConstants,
) -> Result<TunnelingReport> {
    let eps = energy - barrier.height;
    if params.mode() == Mode::Relativistic && eps == 0.0 {
        return Err(Error::ZeroEpsilon);
    }
    if params.classify(energy, barrier.height) != RegionClass::Evanescent {
        return Err(Error::NotEvanescent);
    }
    let g = params.drive(eps);
    let (a, b) = (consts.a, consts.b);
    if a.signum() != g.signum() {
        return Err(Error::SignConventionViolated { a, epsilon: eps });
    }
    let kappa = sqrt(-params.wave_number_sq(eps));
    let q = barrier.width;
    let xi = kappa * q;
    let scale = params.hbar() / g;

    // arctan(u) − arctan(v) = arg((1 + uv) + i(u − v)), exact for all real u, v.
    let u = a * exp(2.0 * xi) + b;
    let v = a + b;
    let t_exact = scale * atan2(a * expm1(2.0 * xi), 1.0 + u * v);
    let t_thin = scale * 2.0 * kappa * a * q / (1.0 + v * v);
    let t_thick = scale * (FRAC_PI_2.copysign(a) - atan(v));

    let basis = constant_basis(params, eps, RegionClass::Evanescent)?;
    let inside = MicrostateConstants::new(a, b)?;
    let spec = barrier.to_spec();
    let t_quadrature = time_of_flight(&basis, &inside, params, &spec, energy, 0.0, q)?;

    Ok(TunnelingReport {
        q,
        epsilon: eps,
        a,
        b,
        xi,
        t_exact,
        t_thin,
        t_thick,
        t_quadrature,
        regime: Regime::from_thickness(xi),
    })
}

/// Compare the relativistic delay at `ε = εⁿʳ + mc²` with the
/// non-relativistic delay at `εⁿʳ`, for the same barrier and constants.
pub fn nonrelativistic_delay(
    params: &PhysicalParams,
    barrier: &RectangularBarrier,
    energy_nr: f64,
    consts: &MicrostateConstants,
) -> Result<NonRelativisticComparison> {
    let rel = params.with_mode(Mode::Relativistic);
    let nonrel = params.with_mode(Mode::NonRelativistic);
    let nonrelativistic = barrier_delay(&nonrel, barrier, energy_nr, consts)?;
    let relativistic = barrier_delay(&rel, barrier, energy_nr + rel.rest_energy(), consts)?;
    Ok(NonRelativisticComparison {
        relativistic,
        nonrelativistic,
    })
}
