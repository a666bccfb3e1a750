//! Potential definitions with derivative access.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `V(x)` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

impl PotentialValue {
    fn flat(value: f64) -> Self {
        Self {
            value,
            slope: 0.0,
            curvature: 0.0,
        }
    }
}

/// Which side of a discontinuity to evaluate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One constant piece `[left, right)` with value `value`. Ends may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub left: f64,
    pub right: f64,
    pub value: f64,
}

impl Segment {
    pub fn new(left: f64, right: f64, value: f64) -> Self {
        Self { left, right, value }
    }
}

/// Rectangular barrier of height `height` occupying `[0, width]`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangularBarrier {
    pub height: f64,
    pub width: f64,
}

impl RectangularBarrier {
    pub fn new(height: f64, width: f64) -> Result<Self> {
        if !height.is_finite() {
            return Err(Error::InvalidArgument("barrier height must be finite"));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidArgument("barrier width must be positive"));
        }
        Ok(Self { height, width })
    }

    pub fn to_spec(&self) -> PotentialSpec {
        PotentialSpec::PiecewiseConstant(vec![
            Segment::new(f64::NEG_INFINITY, 0.0, 0.0),
            Segment::new(0.0, self.width, self.height),
            Segment::new(self.width, f64::INFINITY, 0.0),
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// Contiguous, non-overlapping constant segments in increasing order.
    PiecewiseConstant(Vec<Segment>),
    /// Samples interpolated by a not-a-knot cubic spline.
    Tabulated(CubicSpline),
}

impl PotentialSpec {
    /// `V(x) = value` on the whole real line.
    pub fn constant(value: f64) -> Self {
        PotentialSpec::PiecewiseConstant(vec![Segment::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            value,
        )])
    }

    pub fn piecewise(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument(
                "piecewise potential needs at least one segment",
            ));
        }
        for s in &segments {
            if !s.value.is_finite() {
                return Err(Error::InvalidArgument("segment values must be finite"));
            }
            if s.left.is_nan() || s.right.is_nan() || s.left >= s.right {
                return Err(Error::InvalidArgument("segments need left < right"));
            }
        }
        for w in segments.windows(2) {
            if w[0].right != w[1].left {
                return Err(Error::InvalidArgument(
                    "segments must be contiguous and non-overlapping",
                ));
            }
            if !w[0].right.is_finite() {
                return Err(Error::InvalidArgument(
                    "interior segment boundaries must be finite",
                ));
            }
        }
        Ok(PotentialSpec::PiecewiseConstant(segments))
    }

    pub fn tabulated(xs: &[f64], values: &[f64]) -> Result<Self> {
        Ok(PotentialSpec::Tabulated(CubicSpline::not_a_knot(
            xs, values,
        )?))
    }

    pub fn rectangular_barrier(height: f64, width: f64) -> Result<Self> {
        Ok(RectangularBarrier::new(height, width)?.to_spec())
    }

    /// Closed domain `[lo, hi]`; ends may be infinite.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            PotentialSpec::PiecewiseConstant(segs) => (segs[0].left, segs[segs.len() - 1].right),
            PotentialSpec::Tabulated(s) => (s.xs[0], s.xs[s.xs.len() - 1]),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    /// `(V, V', V'')` at `x`.
    ///
    /// Piecewise-constant potentials refuse to evaluate exactly on an interior
    /// boundary; use [`Self::eval_one_sided`] there.
    pub fn eval(&self, x: f64) -> Result<PotentialValue> {
        if x.is_nan() || !self.contains(x) {
            return Err(Error::OutOfDomain { x });
        }
        match self {
            PotentialSpec::PiecewiseConstant(segs) => {
                let i = segs.partition_point(|s| s.right <= x);
                if i > 0 && i < segs.len() && segs[i].left == x {
                    return Err(Error::AtDiscontinuity { x });
                }
                Ok(PotentialValue::flat(segs[i.min(segs.len() - 1)].value))
            }
            PotentialSpec::Tabulated(s) => Ok(s.eval(x)),
        }
    }

    /// Limit of `V` approaching `x` from `side`.
    pub fn eval_one_sided(&self, x: f64, side: Side) -> Result<PotentialValue> {
        if x.is_nan() || !self.contains(x) {
            return Err(Error::OutOfDomain { x });
        }
        match self {
            PotentialSpec::PiecewiseConstant(segs) => {
                let i = match side {
                    Side::Left => segs.partition_point(|s| s.right < x),
                    Side::Right => segs.partition_point(|s| s.right <= x),
                };
                Ok(PotentialValue::flat(segs[i.min(segs.len() - 1)].value))
            }
            PotentialSpec::Tabulated(s) => Ok(s.eval(x)),
        }
    }

    /// Interior discontinuities strictly inside `(lo, hi)`, ascending.
    pub fn discontinuities_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        match self {
            PotentialSpec::PiecewiseConstant(segs) => segs[..segs.len() - 1]
                .iter()
                .map(|s| s.right)
                .filter(|&b| b > lo && b < hi)
                .collect(),
            PotentialSpec::Tabulated(_) => Vec::new(),
        }
    }

    /// Tabulation knots strictly inside `(lo, hi)`, ascending.
    pub fn knots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        match self {
            PotentialSpec::PiecewiseConstant(_) => Vec::new(),
            PotentialSpec::Tabulated(s) => {
                s.xs.iter().copied().filter(|&k| k > lo && k < hi).collect()
            }
        }
    }
}

/// Not-a-knot cubic spline; reproduces cubics exactly and gives a continuous `V''`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn not_a_knot(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() {
            return Err(Error::InvalidArgument("grid and values differ in length"));
        }
        if n < 4 {
            return Err(Error::InvalidArgument(
                "tabulated potential needs at least 4 points",
            ));
        }
        if xs.iter().chain(ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("tabulated samples must be finite"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "tabulated grid must be strictly increasing",
            ));
        }

        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        // Unknowns M_1..M_{n-2}; the end values are eliminated with the
        // not-a-knot conditions (continuous third derivative at x_1, x_{n-2}).
        let m = n - 2;
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for r in 0..m {
            let i = r + 1;
            sub[r] = h[i - 1];
            diag[r] = 2.0 * (h[i - 1] + h[i]);
            sup[r] = h[i];
            rhs[r] = 6.0 * (d[i] - d[i - 1]);
        }
        // M_0 = ((h0 + h1) M_1 − h0 M_2) / h1
        let (h0, h1) = (h[0], h[1]);
        diag[0] += h0 * (h0 + h1) / h1;
        sup[0] -= h0 * h0 / h1;
        sub[0] = 0.0;
        // M_{n-1} = ((h_{n-3} + h_{n-2}) M_{n-2} − h_{n-2} M_{n-3}) / h_{n-3}
        let (ha, hb) = (h[n - 3], h[n - 2]);
        diag[m - 1] += hb * (ha + hb) / ha;
        sub[m - 1] -= hb * hb / ha;
        sup[m - 1] = 0.0;

        let interior = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        let mut second = vec![0.0; n];
        second[1..n - 1].copy_from_slice(&interior);
        second[0] = ((h0 + h1) * second[1] - h0 * second[2]) / h1;
        second[n - 1] = ((ha + hb) * second[n - 2] - hb * second[n - 3]) / ha;

        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            second,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    /// Caller guarantees `x` lies in the grid range.
    fn eval(&self, x: f64) -> PotentialValue {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&k| k <= x).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        PotentialValue {
            value: a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0,
            slope: (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0
                + (3.0 * b * b - 1.0) / 6.0 * h * m1,
            curvature: a * m0 + b * m1,
        }
    }
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::InvalidArgument("singular spline system"));
    }
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::InvalidArgument("singular spline system"));
        }
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}
