//! Gragg-Bulirsch-Stoer extrapolation integrator with re-integration dense output.
//!
//! Each step runs the modified midpoint rule with 2, 4, 6, … substeps and
//! extrapolates the results polynomially in `h²`. The step is accepted once two
//! successive diagonal entries agree to tolerance. Values between accepted
//! nodes are produced by a fresh extrapolated step from the nearest node, so
//! interpolated values carry the same accuracy as the nodes themselves.

use alloc::vec::Vec;

use crate::error::{Error, Result};

const MAX_ROWS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-12,
        }
    }
}

/// `dy/dx = f(x, y)` over a fixed-size state.
pub trait System<const N: usize> {
    fn rhs(&self, x: f64, y: &[f64; N]) -> Result<[f64; N]>;
}

impl<const N: usize, F> System<N> for F
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    fn rhs(&self, x: f64, y: &[f64; N]) -> Result<[f64; N]> {
        self(x, y)
    }
}

fn midpoint<const N: usize, S: System<N>>(
    sys: &S,
    x: f64,
    y: &[f64; N],
    big_h: f64,
    steps: usize,
) -> Result<[f64; N]> {
    let h = big_h / steps as f64;
    let f0 = sys.rhs(x, y)?;
    let mut prev = *y;
    let mut cur = [0.0; N];
    for i in 0..N {
        cur[i] = y[i] + h * f0[i];
    }
    for m in 1..steps {
        let f = sys.rhs(x + m as f64 * h, &cur)?;
        let mut next = [0.0; N];
        for i in 0..N {
            next[i] = prev[i] + 2.0 * h * f[i];
        }
        prev = cur;
        cur = next;
    }
    let f = sys.rhs(x + big_h, &cur)?;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = 0.5 * (cur[i] + prev[i] + h * f[i]);
    }
    Ok(out)
}

/// One extrapolated step. Returns the new state and the row at which it
/// converged, or `None` if the table was exhausted.
fn extrapolated_step<const N: usize, S: System<N>>(
    sys: &S,
    x: f64,
    y: &[f64; N],
    big_h: f64,
    tol: OdeTolerance,
) -> Result<Option<([f64; N], usize)>> {
    let mut table: [[[f64; N]; MAX_ROWS]; MAX_ROWS] = [[[0.0; N]; MAX_ROWS]; MAX_ROWS];
    let seq = |k: usize| 2 * (k + 1);
    for k in 0..MAX_ROWS {
        table[k][0] = midpoint(sys, x, y, big_h, seq(k))?;
        for j in 1..=k {
            let ratio = seq(k) as f64 / seq(k - j) as f64;
            let denom = ratio * ratio - 1.0;
            #[allow(clippy::needless_range_loop)]
            for i in 0..N {
                table[k][j][i] =
                    table[k][j - 1][i] + (table[k][j - 1][i] - table[k - 1][j - 1][i]) / denom;
            }
        }
        if k >= 2 {
            let mut err: f64 = 0.0;
            for i in 0..N {
                let scale = tol.abs + tol.rel * y[i].abs().max(table[k][k][i].abs());
                err = err.max((table[k][k][i] - table[k][k - 1][i]).abs() / scale);
            }
            if err <= 1.0 {
                return Ok(Some((table[k][k], k)));
            }
        }
    }
    Ok(None)
}

/// Accepted nodes of an integration, with dense evaluation in between.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution<const N: usize> {
    xs: Vec<f64>,
    ys: Vec<[f64; N]>,
    tol: OdeTolerance,
}

impl<const N: usize> DenseSolution<N> {
    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[f64; N])> {
        self.xs.iter().copied().zip(self.ys.iter())
    }

    pub fn span(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// State at `x` inside the integrated span.
    pub fn eval<S: System<N>>(&self, sys: &S, x: f64) -> Result<[f64; N]> {
        let (lo, hi) = self.span();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfDomain { x });
        }
        let i = self.xs.partition_point(|&k| k <= x).max(1) - 1;
        if self.xs[i] == x {
            return Ok(self.ys[i]);
        }
        let h = x - self.xs[i];
        if let Some((y, _)) = extrapolated_step(sys, self.xs[i], &self.ys[i], h, self.tol)? {
            return Ok(y);
        }
        let sub = integrate(sys, self.xs[i], x, self.ys[i], self.tol)?;
        Ok(sub.ys[sub.ys.len() - 1])
    }
}

/// Integrate from `x0` to `x1` (`x1 > x0`), keeping every accepted node.
pub fn integrate<const N: usize, S: System<N>>(
    sys: &S,
    x0: f64,
    x1: f64,
    y0: [f64; N],
    tol: OdeTolerance,
) -> Result<DenseSolution<N>> {
    if !(x1 > x0) {
        return Err(Error::InvalidArgument(
            "integration span must be increasing",
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    xs.push(x0);
    ys.push(y0);
    let mut x = x0;
    let mut y = y0;
    let mut h = (x1 - x0) / 16.0;
    while x < x1 {
        if x + h >= x1 {
            h = x1 - x;
        }
        match extrapolated_step(sys, x, &y, h, tol)? {
            Some((next, row)) => {
                x = if x + h >= x1 { x1 } else { x + h };
                y = next;
                xs.push(x);
                ys.push(y);
                h *= match row {
                    0..=3 => 2.0,
                    4..=5 => 1.3,
                    6 => 1.0,
                    _ => 0.7,
                };
            }
            None => {
                h *= 0.25;
                if h.abs() <= 1e-14 * x.abs().max(x1 - x0) {
                    return Err(Error::StepSizeUnderflow { x });
                }
            }
        }
    }
    Ok(DenseSolution { xs, ys, tol })
}
