//! Physical parameters, energy bookkeeping and region classification.

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Default relative tolerance for the turning-point neighbourhood.
pub const DEFAULT_TURNING_TOLERANCE: f64 = 1e-12;

/// Which wave equation and law of motion apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Klein-Gordon equation, `ẋ·P = ε − m²c⁴/ε`.
    #[default]
    Relativistic,
    /// Schrödinger equation, `ẋ·P = 2(E − V)`. Energies exclude the rest energy.
    NonRelativistic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    light_speed: f64,
    hbar: f64,
    mode: Mode,
    turning_tolerance: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, light_speed: f64, hbar: f64, mode: Mode) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(mass) {
            return Err(Error::InvalidArgument("mass must be positive and finite"));
        }
        if !positive(light_speed) {
            return Err(Error::InvalidArgument(
                "light speed must be positive and finite",
            ));
        }
        if !positive(hbar) {
            return Err(Error::InvalidArgument("hbar must be positive and finite"));
        }
        Ok(Self {
            mass,
            light_speed,
            hbar,
            mode,
            turning_tolerance: DEFAULT_TURNING_TOLERANCE,
        })
    }

    /// Relativistic mode with `m = c = ħ = 1`.
    pub fn natural() -> Self {
        Self {
            mass: 1.0,
            light_speed: 1.0,
            hbar: 1.0,
            mode: Mode::Relativistic,
            turning_tolerance: DEFAULT_TURNING_TOLERANCE,
        }
    }

    pub fn with_turning_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::InvalidArgument(
                "turning tolerance must be non-negative",
            ));
        }
        self.turning_tolerance = tol;
        Ok(self)
    }

    /// Same constants, different mode.
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn turning_tolerance(&self) -> f64 {
        self.turning_tolerance
    }

    /// `mc²`.
    pub fn rest_energy(&self) -> f64 {
        self.mass * self.light_speed * self.light_speed
    }

    pub fn units(&self) -> NaturalUnits {
        NaturalUnits::new(self)
    }

    /// Sign-carrying kinetic gap: `ε² − m²c⁴` (relativistic) or `2mε`.
    ///
    /// Positive in propagating regions, negative in evanescent ones. The
    /// relativistic form is factored to avoid cancellation near `ε ≈ mc²`.
    pub fn gap(&self, eps: f64) -> f64 {
        match self.mode {
            Mode::Relativistic => {
                let m = self.rest_energy();
                (eps - m) * (eps + m)
            }
            Mode::NonRelativistic => 2.0 * self.mass * eps,
        }
    }

    /// `k²` of the stationary wave equation `φ'' = −k²φ` in a constant potential.
    pub fn wave_number_sq(&self, eps: f64) -> f64 {
        match self.mode {
            Mode::Relativistic => {
                let hc = self.hbar * self.light_speed;
                self.gap(eps) / (hc * hc)
            }
            Mode::NonRelativistic => self.gap(eps) / (self.hbar * self.hbar),
        }
    }

    /// Right-hand side `G(ε)` of the law of motion `ẋ·P = G`.
    pub fn drive(&self, eps: f64) -> f64 {
        match self.mode {
            Mode::Relativistic => self.gap(eps) / eps,
            Mode::NonRelativistic => 2.0 * eps,
        }
    }

    /// `(dG/dε, d²G/dε²)`.
    pub fn drive_derivatives(&self, eps: f64) -> (f64, f64) {
        match self.mode {
            Mode::Relativistic => {
                let m2 = self.rest_energy() * self.rest_energy();
                (1.0 + m2 / (eps * eps), -2.0 * m2 / (eps * eps * eps))
            }
            Mode::NonRelativistic => (2.0, 0.0),
        }
    }

    /// Classify motion at total energy `energy` over a local potential `potential`.
    pub fn classify(&self, energy: f64, potential: f64) -> RegionClass {
        let eps = energy - potential;
        let (measure, scale) = match self.mode {
            Mode::Relativistic => {
                let m = self.rest_energy();
                (self.gap(eps), m * m)
            }
            Mode::NonRelativistic => (eps, energy.abs().max(potential.abs())),
        };
        if measure.abs() <= self.turning_tolerance * scale {
            RegionClass::Turning
        } else if measure > 0.0 {
            RegionClass::Propagating
        } else {
            RegionClass::Evanescent
        }
    }
}

/// Scales that make `m = c = ħ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalUnits {
    pub energy: f64,
    pub length: f64,
    pub time: f64,
    pub momentum: f64,
    pub velocity: f64,
}

impl NaturalUnits {
    pub fn new(params: &PhysicalParams) -> Self {
        let energy = params.rest_energy();
        let momentum = params.mass * params.light_speed;
        Self {
            energy,
            length: params.hbar / momentum,
            time: params.hbar / energy,
            momentum,
            velocity: params.light_speed,
        }
    }
}

/// Total energy with the local potential; `ε` is always derived, never cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyContext {
    pub energy: f64,
    pub potential: f64,
}

impl EnergyContext {
    pub fn new(energy: f64, potential: f64) -> Self {
        Self { energy, potential }
    }

    /// `ε = E − V`.
    pub fn epsilon(&self) -> f64 {
        self.energy - self.potential
    }

    /// `Eⁿʳ = E − mc²`.
    pub fn nonrelativistic_energy(&self, params: &PhysicalParams) -> f64 {
        self.energy - params.rest_energy()
    }

    /// Inverse of [`Self::nonrelativistic_energy`].
    pub fn from_nonrelativistic(params: &PhysicalParams, energy_nr: f64, potential: f64) -> Self {
        Self::new(energy_nr + params.rest_energy(), potential)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionClass {
    /// `ε² > m²c⁴`: oscillatory solutions, classically allowed.
    Propagating,
    /// `ε² < m²c⁴`: exponential solutions, classically forbidden.
    Evanescent,
    /// `|ε² − m²c⁴|` within the turning tolerance.
    Turning,
}

impl RegionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionClass::Propagating => "propagating",
            RegionClass::Evanescent => "evanescent",
            RegionClass::Turning => "turning",
        }
    }
}

pub fn classify_point(
    params: &PhysicalParams,
    energy: f64,
    spec: &PotentialSpec,
    x: f64,
) -> Result<RegionClass> {
    let v = spec.eval(x)?;
    Ok(params.classify(energy, v.value))
}
