//! Scalar root finding and 1-d maximisation.
//!
//! The solvers here are deliberately simple and fully deterministic:
//! bisection carries the guarantee, a few Newton steps buy back the digits,
//! and golden-section search handles the unimodal maximisations needed for
//! diagnostics. A small ascending-series Bessel `J0` lives here too because
//! its first zero feeds the linearised eigenvalue bound.

use crate::error::{Error, Result};

/// Outcome of a bracketed root solve.
#[derive(Debug, Clone, Copy)]
pub struct BracketRoot {
    pub x: f64,
    /// Residual `f(x)` at the returned point.
    pub fx: f64,
}

/// Find the root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` have
/// opposite signs. Bisection to roughly sqrt(eps) width, then Newton with a
/// centred finite-difference slope, falling back to plain bisection if a
/// Newton step leaves the bracket.
pub fn bisect_newton<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<BracketRoot> {
    let (mut lo, mut hi) = (lo, hi);
    let (mut flo, fhi) = (f(lo), f(hi));
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::non_finite(format!(
            "bracket endpoints f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }
    if flo == 0.0 {
        return Ok(BracketRoot { x: lo, fx: 0.0 });
    }
    if fhi == 0.0 {
        return Ok(BracketRoot { x: hi, fx: 0.0 });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::bracket_failed(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }

    // Bisection until the bracket is narrow enough for Newton to be safe.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(BracketRoot { x: mid, fx: 0.0 });
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol.max(1e-8 * (1.0 + mid.abs())) {
            break;
        }
    }

    // Newton polish from the bracket midpoint.
    let mut x = 0.5 * (lo + hi);
    for _ in 0..6 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(BracketRoot { x, fx });
        }
        let h = (hi - lo).max(1e-12 * (1.0 + x.abs())) * 1e-2;
        let slope = (f(x + h) - f(x - h)) / (2.0 * h);
        if !slope.is_finite() || slope == 0.0 {
            break;
        }
        let next = x - fx / slope;
        if !(lo..=hi).contains(&next) {
            break;
        }
        if (next - x).abs() <= f64::EPSILON * (1.0 + x.abs()) {
            x = next;
            break;
        }
        x = next;
    }
    let fx = f(x);
    let mid = 0.5 * (lo + hi);
    let fmid = f(mid);
    // Keep whichever candidate has the smaller residual.
    if fmid.abs() < fx.abs() {
        Ok(BracketRoot { x: mid, fx: fmid })
    } else {
        Ok(BracketRoot { x, fx })
    }
}

/// Locate the maximiser of a unimodal `f` on `[lo, hi]` by golden-section
/// search. Returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Bessel function of the first kind `J0` by the ascending series
/// `sum_{m>=0} (-1)^m (x^2/4)^m / (m!)^2`, accurate to machine precision
/// for the moderate arguments used here (first zero hunting on `[0, 4]`).
pub fn bessel_j0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for m in 1..=60 {
        let mf = m as f64;
        term *= -q / (mf * mf);
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

/// First positive zero of `J0`, computed by bracketed bisection on `[2, 3]`.
pub fn bessel_j0_first_zero() -> f64 {
    bisect_newton(bessel_j0, 2.0, 3.0, 1e-15)
        .expect("J0 changes sign on [2, 3]")
        .x
}
