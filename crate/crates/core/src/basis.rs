//! Pairs of independent real solutions of the stationary wave equation.
//!
//! In a region with local energy `ε = E − V`, both supported equations take
//! the form `φ'' = Q(x)·φ` with `Q = (m²c⁴ − ε²)/(ħc)²` (Klein-Gordon) or
//! `Q = 2m(V − E)/ħ²` (Schrödinger). A [`BasisPair`] evaluates `(φ1, φ1', φ2, φ2')`
//! and knows `Q`, which the momentum derivatives need.

use alloc::sync::Arc;

use crate::error::{Error, Result};
use crate::fmath::{cos, exp, sin, sqrt};
use crate::hj::{momentum_ratio_jet, MicrostateConstants};
use crate::model::{Mode, PhysicalParams, RegionClass};
use crate::ode::{self, DenseSolution, OdeTolerance};
use crate::potential::PotentialSpec;

/// Relative bound on Wronskian drift for numerically integrated pairs.
pub const WRONSKIAN_DRIFT_BOUND: f64 = 1e-9;

/// Relative tolerance for the momentum-invariance check after a basis change.
pub const REPARAMETRIZE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    AnalyticTrig,
    AnalyticExp,
    Numeric,
}

/// `(φ1, φ1', φ2, φ2')` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisPoint {
    pub phi1: f64,
    pub dphi1: f64,
    pub phi2: f64,
    pub dphi2: f64,
}

impl BasisPoint {
    pub fn wronskian(&self) -> f64 {
        self.dphi1 * self.phi2 - self.phi1 * self.dphi2
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Trig { k: f64 },
    Exp { kappa: f64 },
    Numeric(Arc<NumericSolution>),
}

#[derive(Debug, Clone, PartialEq)]
struct NumericSolution {
    equation: WaveEquation,
    solution: DenseSolution<4>,
}

/// `φ'' = Q(x) φ` driven by a potential.
#[derive(Debug, Clone, PartialEq)]
struct WaveEquation {
    params: PhysicalParams,
    energy: f64,
    spec: PotentialSpec,
}

impl WaveEquation {
    fn curvature(&self, x: f64) -> Result<f64> {
        let v = self.spec.eval(x)?;
        Ok(-self.params.wave_number_sq(self.energy - v.value))
    }
}

impl ode::System<4> for WaveEquation {
    fn rhs(&self, x: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let q = self.curvature(x)?;
        Ok([y[1], q * y[0], y[3], q * y[2]])
    }
}

/// Two independent solutions with a constant reference Wronskian.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPair {
    source: Source,
    /// Rows give the new functions as combinations of the source pair.
    mix: [[f64; 2]; 2],
    domain: (f64, f64),
    wronskian: f64,
}

impl BasisPair {
    /// `φ1 = sin(kx)`, `φ2 = cos(kx)`, `W = k`.
    pub fn trig(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidArgument("wave number must be positive"));
        }
        Ok(Self {
            source: Source::Trig { k },
            mix: IDENTITY,
            domain: (f64::NEG_INFINITY, f64::INFINITY),
            wronskian: k,
        })
    }

    /// `φ1 = e^{κx}`, `φ2 = e^{−κx}`, `W = 2κ`.
    pub fn exponential(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidArgument("decay constant must be positive"));
        }
        Ok(Self {
            source: Source::Exp { kappa },
            mix: IDENTITY,
            domain: (f64::NEG_INFINITY, f64::INFINITY),
            wronskian: 2.0 * kappa,
        })
    }

    /// New pair `(m00 φ1 + m01 φ2, m10 φ1 + m11 φ2)`.
    ///
    /// The Wronskian scales by the determinant, so a reflection gives `W < 0`;
    /// the caller's ordering is kept as given.
    pub fn combined(&self, m: [[f64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if !(det.is_finite() && det != 0.0) {
            return Err(Error::InvalidArgument("basis change must be invertible"));
        }
        let mix = [
            [
                m[0][0] * self.mix[0][0] + m[0][1] * self.mix[1][0],
                m[0][0] * self.mix[0][1] + m[0][1] * self.mix[1][1],
            ],
            [
                m[1][0] * self.mix[0][0] + m[1][1] * self.mix[1][0],
                m[1][0] * self.mix[0][1] + m[1][1] * self.mix[1][1],
            ],
        ];
        Ok(Self {
            source: self.source.clone(),
            mix,
            domain: self.domain,
            wronskian: self.wronskian * det,
        })
    }

    /// `(φ2, φ1)`.
    pub fn swapped(&self) -> Self {
        self.combined([[0.0, 1.0], [1.0, 0.0]])
            .expect("swap is invertible")
    }

    /// Same pair restricted to `[lo, hi]` (intersected with the current domain).
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Self> {
        let (a, b) = (lo.max(self.domain.0), hi.min(self.domain.1));
        if !(a < b) {
            return Err(Error::InvalidArgument("restriction leaves an empty domain"));
        }
        let mut out = self.clone();
        out.domain = (a, b);
        Ok(out)
    }

    pub fn provenance(&self) -> Provenance {
        match self.source {
            Source::Trig { .. } => Provenance::AnalyticTrig,
            Source::Exp { .. } => Provenance::AnalyticExp,
            Source::Numeric(_) => Provenance::Numeric,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Reference Wronskian `φ1'φ2 − φ1φ2'`, fixed at construction.
    pub fn wronskian_ref(&self) -> f64 {
        self.wronskian
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if x.is_nan() || x < self.domain.0 || x > self.domain.1 {
            Err(Error::OutOfDomain { x })
        } else {
            Ok(())
        }
    }

    pub fn eval(&self, x: f64) -> Result<BasisPoint> {
        self.check_domain(x)?;
        let (f1, d1, f2, d2) = match &self.source {
            Source::Trig { k } => {
                let (s, c) = (sin(k * x), cos(k * x));
                (s, k * c, c, -k * s)
            }
            Source::Exp { kappa } => {
                let (up, down) = (exp(kappa * x), exp(-kappa * x));
                (up, kappa * up, down, -kappa * down)
            }
            Source::Numeric(n) => {
                let y = n.solution.eval(&n.equation, x)?;
                (y[0], y[1], y[2], y[3])
            }
        };
        let m = &self.mix;
        Ok(BasisPoint {
            phi1: m[0][0] * f1 + m[0][1] * f2,
            dphi1: m[0][0] * d1 + m[0][1] * d2,
            phi2: m[1][0] * f1 + m[1][1] * f2,
            dphi2: m[1][0] * d1 + m[1][1] * d2,
        })
    }

    /// `Q(x)` in `φ'' = Q φ`.
    pub fn curvature(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        match &self.source {
            Source::Trig { k } => Ok(-k * k),
            Source::Exp { kappa } => Ok(kappa * kappa),
            Source::Numeric(n) => n.equation.curvature(x),
        }
    }

    /// Local oscillation / decay length `1/√|Q|`, or `None` where `Q = 0`.
    pub(crate) fn length_scale(&self, x: f64) -> Result<Option<f64>> {
        let q = self.curvature(x)?;
        Ok(if q == 0.0 {
            None
        } else {
            Some(1.0 / sqrt(q.abs()))
        })
    }
}

const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

/// Pointwise Wronskian `φ1'φ2 − φ1φ2'`.
pub fn wronskian(basis: &BasisPair, x: f64) -> Result<f64> {
    Ok(basis.eval(x)?.wronskian())
}

/// Closed-form pair in a constant potential.
///
/// Propagating: `sin(kx), cos(kx)` with `W = k`. Evanescent: `e^{κx}, e^{−κx}`
/// with `W = 2κ`. `region` must agree with the sign of `k²` at `eps`.
pub fn constant_basis(params: &PhysicalParams, eps: f64, region: RegionClass) -> Result<BasisPair> {
    let k2 = params.wave_number_sq(eps);
    match region {
        RegionClass::Turning => Err(Error::TurningPoint { epsilon: eps }),
        RegionClass::Propagating if k2 > 0.0 => BasisPair::trig(sqrt(k2)),
        RegionClass::Evanescent if k2 < 0.0 => BasisPair::exponential(sqrt(-k2)),
        _ => Err(Error::InvalidArgument(
            "region class disagrees with the energy",
        )),
    }
}

/// Integrate the wave equation over `domain` from `(φ1, φ1') = (0, 1)` and
/// `(φ2, φ2') = (1, 0)` at the left edge, so that `W = 1`.
///
/// Fails with [`Error::WronskianDrift`] if the Wronskian moves by more than
/// [`WRONSKIAN_DRIFT_BOUND`] (relative) at any accepted node.
pub fn numeric_basis(
    params: &PhysicalParams,
    spec: &PotentialSpec,
    energy: f64,
    domain: (f64, f64),
    tol: OdeTolerance,
) -> Result<BasisPair> {
    let (lo, hi) = domain;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(
            "numeric basis needs a finite increasing domain",
        ));
    }
    if !spec.contains(lo) {
        return Err(Error::OutOfDomain { x: lo });
    }
    if !spec.contains(hi) {
        return Err(Error::OutOfDomain { x: hi });
    }
    if !spec.discontinuities_in(lo, hi).is_empty() {
        return Err(Error::InvalidArgument(
            "numeric basis domain crosses a potential discontinuity",
        ));
    }
    let equation = WaveEquation {
        params: *params,
        energy,
        spec: spec.clone(),
    };
    let solution = ode::integrate(&equation, lo, hi, [0.0, 1.0, 1.0, 0.0], tol)?;
    for (x, y) in solution.nodes() {
        let drift = (y[1] * y[2] - y[0] * y[3] - 1.0).abs();
        if drift > WRONSKIAN_DRIFT_BOUND {
            return Err(Error::WronskianDrift { x, drift });
        }
    }
    Ok(BasisPair {
        source: Source::Numeric(Arc::new(NumericSolution { equation, solution })),
        mix: IDENTITY,
        domain: (lo, hi),
        wronskian: 1.0,
    })
}

/// Find `(ã, b̃)` such that the conjugate momentum built from `new` equals the
/// one built from `old` with `consts`, everywhere on the common domain.
///
/// `P` and `P'` are matched at one reference point, then invariance is checked
/// on a sample grid; failure reports the largest relative deviation. Unbounded
/// common domains are checked on ten local lengths either side of `x0`.
pub fn reparametrize_constants(
    old: &BasisPair,
    new: &BasisPair,
    consts: &MicrostateConstants,
) -> Result<MicrostateConstants> {
    let lo = old.domain.0.max(new.domain.0);
    let hi = old.domain.1.min(new.domain.1);
    if !(lo < hi) {
        return Err(Error::InvalidArgument("bases share no common domain"));
    }
    let window = if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        let centre = consts.x0.clamp(lo, hi);
        let ell = old.length_scale(centre)?.unwrap_or(1.0);
        ((centre - 10.0 * ell).max(lo), (centre + 10.0 * ell).min(hi))
    };
    reparametrize_constants_on(old, new, consts, window, 257)
}

/// [`reparametrize_constants`] with an explicit verification window.
pub fn reparametrize_constants_on(
    old: &BasisPair,
    new: &BasisPair,
    consts: &MicrostateConstants,
    window: (f64, f64),
    samples: usize,
) -> Result<MicrostateConstants> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || samples < 2 {
        return Err(Error::InvalidArgument(
            "verification window must be finite and non-empty",
        ));
    }
    let grid = |i: usize| lo + (hi - lo) * i as f64 / (samples - 1) as f64;

    // Reference point: where |φ̃2| is largest relative to its derivative, so the
    // division below is well conditioned.
    let mut best = (f64::NEG_INFINITY, lo);
    for i in 0..9 {
        let x = lo + (hi - lo) * i as f64 / 8.0;
        let p = new.eval(x)?;
        let ell = new.length_scale(x)?.unwrap_or(hi - lo);
        let norm = sqrt(p.phi2 * p.phi2 + (ell * p.dphi2) * (ell * p.dphi2));
        let score = p.phi2.abs() / norm;
        if score > best.0 {
            best = (score, x);
        }
    }
    let xr = best.1;

    // Work with p = P/ħ. Matching p and p' fixes ψ = ãφ̃1 + b̃φ̃2 at xr:
    // ψ = −(p' φ̃2 / (2p²) + φ̃2' / p), then ã = p(ψ² + φ̃2²)/W̃.
    let (p, dp, _) = momentum_ratio_jet(old, consts.a, consts.b, xr)?;
    let f = new.eval(xr)?;
    let psi = -(dp * f.phi2 / (2.0 * p * p) + f.dphi2 / p);
    let a = p * (psi * psi + f.phi2 * f.phi2) / new.wronskian_ref();
    let b = (psi - a * f.phi1) / f.phi2;
    let candidate = MicrostateConstants { a, b, ..*consts };
    if !(a.is_finite() && b.is_finite() && a != 0.0) {
        return Err(Error::NoSolution {
            max_deviation: f64::INFINITY,
        });
    }

    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let x = grid(i);
        let (p_old, _, _) = momentum_ratio_jet(old, consts.a, consts.b, x)?;
        let (p_new, _, _) = momentum_ratio_jet(new, a, b, x)?;
        worst = worst.max(((p_new - p_old) / p_old).abs());
    }
    if !(worst <= REPARAMETRIZE_TOLERANCE) {
        return Err(Error::NoSolution {
            max_deviation: worst,
        });
    }
    Ok(candidate)
}

/// Residual of the wave equation for a function with second derivative
/// `phi_dd`, in units of the local `|Q φ|` scale.
pub fn wave_equation_residual(params: &PhysicalParams, eps: f64, phi: f64, phi_dd: f64) -> f64 {
    let hbar = params.hbar();
    let m = params.mass();
    match params.mode() {
        Mode::Relativistic => {
            let c = params.light_speed();
            let mc2 = params.rest_energy();
            let lhs = -hbar * hbar / (2.0 * m) * phi_dd
                + (mc2 * mc2 - eps * eps) / (2.0 * m * c * c) * phi;
            lhs / mc2
        }
        Mode::NonRelativistic => {
            let lhs = -hbar * hbar / (2.0 * m) * phi_dd - eps * phi;
            lhs / eps.abs().max(f64::MIN_POSITIVE)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_4, SQRT_2};

    #[test]
    fn trig_pair_from_energy() {
        let p = PhysicalParams::natural();
        let b = constant_basis(&p, SQRT_2, RegionClass::Propagating).unwrap();
        assert_eq!(b.provenance(), Provenance::AnalyticTrig);
        assert!((b.wronskian_ref() - 1.0).abs() < 1e-15);
        for x in [-3.0, 0.0, 0.7, 12.0] {
            assert!((wronskian(&b, x).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exp_pair_from_energy() {
        let p = PhysicalParams::natural();
        let b = constant_basis(&p, 0.6, RegionClass::Evanescent).unwrap();
        assert_eq!(b.provenance(), Provenance::AnalyticExp);
        assert!((b.wronskian_ref() - 1.6).abs() < 1e-15);
        assert!((b.curvature(0.0).unwrap() - 0.64).abs() < 1e-15);
        for x in [-2.0, 0.0, 1.3] {
            assert!((wronskian(&b, x).unwrap() - 1.6).abs() < 1e-13);
        }
    }

    #[test]
    fn turning_and_mismatch_rejected() {
        let p = PhysicalParams::natural();
        assert_eq!(
            constant_basis(&p, 1.0, RegionClass::Turning),
            Err(Error::TurningPoint { epsilon: 1.0 })
        );
        assert!(constant_basis(&p, 0.6, RegionClass::Propagating).is_err());
    }

    #[test]
    fn nonrelativistic_pair() {
        let p = PhysicalParams::natural().with_mode(Mode::NonRelativistic);
        // k = √(2mε)/ħ = 1 at ε = 0.5
        let b = constant_basis(&p, 0.5, RegionClass::Propagating).unwrap();
        assert!((b.wronskian_ref() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_pairs_solve_the_wave_equation() {
        let p = PhysicalParams::natural();
        for (eps, region) in [
            (SQRT_2, RegionClass::Propagating),
            (0.6, RegionClass::Evanescent),
        ] {
            let b = constant_basis(&p, eps, region).unwrap();
            for x in [-1.0, 0.2, 2.5] {
                let pt = b.eval(x).unwrap();
                let q = b.curvature(x).unwrap();
                for phi in [pt.phi1, pt.phi2] {
                    let r = wave_equation_residual(&p, eps, phi, q * phi);
                    assert!(r.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn combination_scales_wronskian() {
        let b = BasisPair::trig(1.0).unwrap();
        assert!((b.swapped().wronskian_ref() + 1.0).abs() < 1e-15);
        let c = b.combined([[2.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((c.wronskian_ref() - 2.0).abs() < 1e-15);
        assert!((wronskian(&c, 0.4).unwrap() - 2.0).abs() < 1e-14);
        assert!(b.combined([[1.0, 2.0], [2.0, 4.0]]).is_err());
        let s = b.swapped().eval(FRAC_PI_4 / 2.0).unwrap();
        let o = b.eval(FRAC_PI_4 / 2.0).unwrap();
        assert_eq!((s.phi1, s.phi2), (o.phi2, o.phi1));
    }

    #[test]
    fn restricted_domain() {
        let b = BasisPair::trig(1.0).unwrap().restricted(0.0, 1.0).unwrap();
        assert_eq!(b.eval(1.5), Err(Error::OutOfDomain { x: 1.5 }));
        assert!(BasisPair::trig(1.0).unwrap().restricted(2.0, 1.0).is_err());
    }
}
