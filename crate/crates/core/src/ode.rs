//! Adaptive embedded Runge-Kutta integration.
//!
//! Dormand-Prince 5(4) with the FSAL property, following the coefficients
//! of Dormand & Prince (1980) and the error-control conventions of Hairer,
//! Norsett & Wanner, "Solving Ordinary Differential Equations I" (DOPRI5).
//! The error norm is taken over a caller-chosen prefix of the state vector
//! so that co-integrated accumulators ride along without throttling the
//! step size.
//!
//! Zero-crossing events on one state component are refined by bisection on
//! the length of a single trial step from the last accepted node: each
//! trial is one fifth-order step, so the event location inherits the
//! integrator's own accuracy without a dense-output interpolant.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// Fifth-order solution weights (row 7 of the tableau; also the nodes of
// the FSAL stage).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 35.0 / 384.0 - 5179.0 / 57600.0;
const E3: f64 = 500.0 / 1113.0 - 7571.0 / 16695.0;
const E4: f64 = 125.0 / 192.0 - 393.0 / 640.0;
const E5: f64 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
const E6: f64 = 11.0 / 84.0 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size and tolerance configuration.
#[derive(Debug, Clone, Copy)]
pub struct Dp45Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// First attempted step.
    pub h_init: f64,
    /// Hard cap on the step, which doubles as the sample spacing bound.
    pub h_max: f64,
    pub max_steps: usize,
    /// Number of leading state components entering the error norm.
    pub n_controlled: usize,
}

/// Why integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// Reached `s_end`.
    EndReached,
    /// The watched component crossed zero from above at the recorded `s`.
    Crossing { s: f64 },
}

/// Final state of a completed integration.
#[derive(Debug, Clone)]
pub struct Outcome<const N: usize> {
    pub stop: Stop,
    pub s: f64,
    pub y: [f64; N],
    pub steps: usize,
}

/// One Dormand-Prince step of size `h` from `(s, y)` with `k1 = rhs(s, y)`
/// already known. Returns `(y5, err, k7)` where `k7 = rhs(s + h, y5)` is
/// the FSAL stage and `err` is the embedded fourth-order error estimate.
fn rk_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    rhs: &F,
    s: f64,
    y: &[f64; N],
    h: f64,
    k1: &[f64; N],
) -> ([f64; N], [f64; N], [f64; N]) {
    let mut t = [0.0; N];

    for i in 0..N {
        t[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = rhs(s + C2 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = rhs(s + C3 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = rhs(s + C4 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = rhs(s + C5 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = rhs(s + h, &t);
    let mut y5 = [0.0; N];
    for i in 0..N {
        y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let k7 = rhs(s + h, &y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err, k7)
}

/// Integrate `dy/ds = rhs(s, y)` from `(s0, y0)` toward `s_end > s0`.
///
/// `crossing` watches one component for a sign change from positive to
/// nonpositive and stops there (refined by step-length bisection).
/// `on_sample` receives every accepted node, including the initial one.
pub fn integrate<const N: usize, F, S>(
    rhs: F,
    s0: f64,
    y0: [f64; N],
    s_end: f64,
    crossing: Option<usize>,
    opts: &Dp45Options,
    mut on_sample: S,
) -> Result<Outcome<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N]),
{
    if !(s_end > s0) {
        return Err(Error::invalid_parameter(format!(
            "integration span must be increasing, got [{s0}, {s_end}]"
        )));
    }
    if opts.n_controlled == 0 || opts.n_controlled > N {
        return Err(Error::invalid_parameter(format!(
            "n_controlled must lie in 1..={N}, got {}",
            opts.n_controlled
        )));
    }
    let mut s = s0;
    let mut y = y0;
    let mut k1 = rhs(s, &y);
    let mut h = opts.h_init.min(opts.h_max).min(s_end - s0);
    let mut steps = 0usize;
    let mut rejects_in_a_row = 0u32;
    on_sample(s, &y);

    loop {
        if steps >= opts.max_steps {
            return Err(Error::step_limit(format!(
                "step budget {} exhausted at s = {s} (span [{s0}, {s_end}])",
                opts.max_steps
            )));
        }
        steps += 1;

        let clipped = h >= s_end - s;
        let h_try = if clipped { s_end - s } else { h };
        let (y5, err, k7) = rk_step(&rhs, s, &y, h_try, &k1);

        // Scaled RMS error over the controlled prefix.
        let mut norm_sq = 0.0;
        for i in 0..opts.n_controlled {
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            let e = err[i] / sc;
            norm_sq += e * e;
        }
        let err_norm = (norm_sq / opts.n_controlled as f64).sqrt();

        if !err_norm.is_finite() {
            // The step ran into non-finite territory; retreat hard.
            rejects_in_a_row += 1;
            if rejects_in_a_row > 60 {
                return Err(Error::non_finite(format!(
                    "right-hand side non-finite near s = {s} at step size {h_try:.3e}"
                )));
            }
            h = h_try * 0.1;
            continue;
        }

        if err_norm > 1.0 {
            rejects_in_a_row += 1;
            if rejects_in_a_row > 200 {
                return Err(Error::no_convergence(format!(
                    "step control stalled near s = {s} (error norm {err_norm:.3e})"
                )));
            }
            let factor = (0.9 * err_norm.powf(-0.2)).max(0.1);
            h = h_try * factor;
            if h < 1e-14 * (1.0 + s.abs()) {
                return Err(Error::no_convergence(format!(
                    "step size underflow at s = {s}"
                )));
            }
            continue;
        }
        rejects_in_a_row = 0;

        // Accepted. Check for a zero crossing inside this step.
        if let Some(ci) = crossing {
            if y[ci] > 0.0 && y5[ci] <= 0.0 {
                // Bisect on the length of a single step from (s, y).
                let (mut lo, mut hi) = (0.0_f64, h_try);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if mid == lo || mid == hi {
                        break;
                    }
                    let (ym, _, _) = rk_step(&rhs, s, &y, mid, &k1);
                    if ym[ci] > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let (yf, _, _) = rk_step(&rhs, s, &y, hi, &k1);
                let sf = s + hi;
                on_sample(sf, &yf);
                return Ok(Outcome {
                    stop: Stop::Crossing { s: sf },
                    s: sf,
                    y: yf,
                    steps,
                });
            }
        }

        s += h_try;
        y = y5;
        k1 = k7;
        on_sample(s, &y);

        if clipped || s >= s_end {
            return Ok(Outcome {
                stop: Stop::EndReached,
                s,
                y,
                steps,
            });
        }

        let factor = (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0);
        h = (h_try * factor).min(opts.h_max);
    }
}
