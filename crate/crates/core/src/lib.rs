//! Deterministic quantum trajectories of a spinless particle in one dimension.
//!
//! The crate works from the stationary quantum Hamilton-Jacobi equation. A pair
//! of independent real solutions of the stationary wave equation (Klein-Gordon,
//! or Schrödinger in non-relativistic mode) fixes the reduced action
//! `S0 = ħ·arctan(a·φ1/φ2 + b) + ħλ`, whose gradient is a conjugate momentum
//! that never vanishes. Trajectories follow from the law of motion
//! `ẋ·P = ε − m²c⁴/ε` and are checked against the third-order conservation law
//! they must satisfy.
//!
//! Modules:
//! - [`model`]: physical parameters, energy bookkeeping, region classification.
//! - [`potential`]: piecewise-constant and tabulated (cubic) potentials.
//! - [`basis`]: analytic and numerically integrated solution pairs.
//! - [`hj`]: reduced action, conjugate momentum and the Hamilton-Jacobi residual.
//! - [`dynamics`]: law of motion, time of flight, trajectories, conservation residual.
//! - [`constant_motion`]: closed-form motion in a constant potential, nodes.
//! - [`tunneling`]: time delay through a rectangular barrier.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// Negated comparisons are used on purpose: NaN inputs must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod fmath;

pub mod basis;
pub mod constant_motion;
pub mod dynamics;
pub mod hj;
pub mod model;
pub mod ode;
pub mod potential;
pub mod quad;
pub mod tunneling;

pub use basis::{
    constant_basis, numeric_basis, reparametrize_constants, BasisPair, BasisPoint, Provenance,
};
pub use constant_motion::{
    evanescent_position, evanescent_velocity, node_table, propagating_position,
    propagating_velocity, EvanescentPosition, Node, NodeTable, PropagatingPosition,
};
pub use dynamics::{
    classical_reference, firqnl_residual, integrate_trajectory, kinematics, time_of_flight,
    velocity_law, BoundaryEvent, BoundaryKind, KinematicState, Sampling, Trajectory,
    TrajectorySample,
};
pub use error::{Error, Result};
pub use hj::{
    conjugate_momentum, momentum_derivatives, qshje_residual, reduced_action, HJState,
    MicrostateConstants,
};
pub use model::{classify_point, EnergyContext, Mode, NaturalUnits, PhysicalParams, RegionClass};
pub use potential::{PotentialSpec, PotentialValue, RectangularBarrier, Segment, Side};
pub use tunneling::{
    barrier_delay, nonrelativistic_delay, NonRelativisticComparison, Regime, TunnelingReport,
};
