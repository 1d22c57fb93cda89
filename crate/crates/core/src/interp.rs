//! Piecewise-cubic interpolation.
//!
//! Monotone cubic (Fritsch-Carlson) slope limiting on top of standard cubic
//! Hermite segments. Used for tabulated reference curves, where preserving
//! monotonicity matters more than formal order: a curve tabulated from a
//! decreasing profile must interpolate decreasing, or intersection counts
//! against it pick up spurious crossings.

use crate::error::{Error, Result};

/// Evaluate the cubic Hermite segment with values `(y0, y1)` and slopes
/// `(m0, m1)` at the endpoints of `[x0, x1]`, at point `x`.
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

/// Three-point endpoint slope with the usual shape-preserving limits.
fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    if d0 == 0.0 {
        return 0.0;
    }
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Shape-preserving piecewise-cubic interpolant on a strictly increasing
/// grid.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Build from samples. Requires at least two points and strictly
    /// increasing `xs`.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::invalid_parameter(format!(
                "interpolant needs >= 2 matching samples, got {} x {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid_parameter(
                "interpolation grid must be strictly increasing",
            ));
        }
        let n = xs.len();
        let d: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();

        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = d[0];
            m[1] = d[0];
        } else {
            // Limited three-point one-sided slopes at the ends: second
            // order, clipped so the boundary segment cannot overshoot.
            m[0] = edge_slope(xs[1] - xs[0], xs[2] - xs[1], d[0], d[1]);
            m[n - 1] = edge_slope(
                xs[n - 1] - xs[n - 2],
                xs[n - 2] - xs[n - 3],
                d[n - 2],
                d[n - 3],
            );
        }
        for i in 1..n - 1 {
            if d[i - 1] * d[i] <= 0.0 {
                m[i] = 0.0;
            } else {
                // Weighted harmonic mean keeps the interpolant monotone on
                // both adjacent intervals.
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        // Fritsch-Carlson limiter at the boundaries of flat segments.
        for i in 0..n - 1 {
            if d[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
            } else {
                let a = m[i] / d[i];
                let b = m[i + 1] / d[i];
                let s = (a * a + b * b).sqrt();
                if s > 3.0 {
                    m[i] = 3.0 / s * a * d[i];
                    m[i + 1] = 3.0 / s * b * d[i];
                }
            }
        }
        Ok(MonotoneCubic { xs, ys, slopes: m })
    }

    /// Domain of definition.
    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Evaluate at `x`. Outside the grid the boundary segment is
    /// extrapolated linearly with the boundary slope.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.slopes[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (x - self.xs[n - 1]);
        }
        let i = match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        hermite(
            self.xs[i],
            self.xs[i + 1],
            self.ys[i],
            self.ys[i + 1],
            self.slopes[i],
            self.slopes[i + 1],
            x,
        )
    }
}
