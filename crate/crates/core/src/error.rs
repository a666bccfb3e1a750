use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the numerical core can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A constructor or operation received an argument outside its contract.
    InvalidArgument(&'static str),
    /// Position outside the domain of a potential or basis.
    OutOfDomain { x: f64 },
    /// Position sits exactly on a piecewise-constant boundary.
    AtDiscontinuity { x: f64 },
    /// `ε² = m²c⁴` (or `E = V` non-relativistically): the law of motion degenerates.
    TurningPoint { epsilon: f64 },
    /// `ε = 0`, the pole of the relativistic law of motion.
    ZeroEpsilon,
    /// The Wronskian of a numeric basis drifted beyond its bound.
    WronskianDrift { x: f64, drift: f64 },
    /// No constants reproduce the conjugate momentum in the new basis.
    NoSolution { max_deviation: f64 },
    /// A turning point lies inside a time-of-flight interval.
    TurningInInterval { x: f64 },
    /// A zero of `ε` lies inside a time-of-flight interval.
    PoleInInterval { x: f64 },
    /// Adaptive quadrature did not reach its tolerance.
    QuadratureFailure { estimated_error: f64 },
    /// The adaptive integrator could not make progress.
    StepSizeUnderflow { x: f64 },
    /// Classical motion is impossible at this energy.
    ClassicallyForbidden,
    /// Motion is evanescent where a propagating regime is required.
    NotPropagating,
    /// Motion is propagating where an evanescent regime is required.
    NotEvanescent,
    /// The logarithm in the evanescent position law has a zero argument.
    LogSingularity { t: f64 },
    /// The evanescent velocity diverges at this time.
    PoleAtDivergenceTime { t: f64 },
    /// The sign of `a` is inconsistent with the sign of `ε` inside a barrier.
    SignConventionViolated { a: f64, epsilon: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::OutOfDomain { x } => write!(f, "position {x} is outside the domain"),
            Error::AtDiscontinuity { x } => {
                write!(f, "position {x} is a potential discontinuity; evaluate one-sided")
            }
            Error::TurningPoint { epsilon } => {
                write!(f, "turning point (epsilon = {epsilon}): velocity vanishes")
            }
            Error::ZeroEpsilon => write!(f, "epsilon = E - V is zero: pole of the law of motion"),
            Error::WronskianDrift { x, drift } => {
                write!(f, "Wronskian drift {drift:e} at x = {x} exceeds bound")
            }
            Error::NoSolution { max_deviation } => write!(
                f,
                "no constants reproduce the conjugate momentum (max relative deviation {max_deviation:e})"
            ),
            Error::TurningInInterval { x } => write!(f, "turning point inside interval near x = {x}"),
            Error::PoleInInterval { x } => write!(f, "epsilon = 0 inside interval near x = {x}"),
            Error::QuadratureFailure { estimated_error } => {
                write!(f, "quadrature did not converge (estimated error {estimated_error:e})")
            }
            Error::StepSizeUnderflow { x } => write!(f, "integrator step size underflow at x = {x}"),
            Error::ClassicallyForbidden => write!(f, "classically forbidden energy"),
            Error::NotPropagating => write!(f, "motion is not propagating at this energy"),
            Error::NotEvanescent => write!(f, "motion is not evanescent at this energy"),
            Error::LogSingularity { t } => write!(f, "logarithmic singularity at t = {t}"),
            Error::PoleAtDivergenceTime { t } => write!(f, "velocity diverges at t = {t}"),
            Error::SignConventionViolated { a, epsilon } => write!(
                f,
                "a = {a} violates the sign convention for epsilon = {epsilon} (need a < 0 for epsilon > 0, a > 0 for epsilon < 0)"
            ),
        }
    }
}

impl core::error::Error for Error {}
