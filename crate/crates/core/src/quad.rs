//! Adaptive quadrature.
//!
//! Gauss-Legendre panels with nodes computed at first use by Newton
//! iteration on the Legendre recurrence, wrapped in a globally adaptive
//! bisection driven by the difference between 15-point and 7-point rules
//! on each panel. This is used for `F(t) = int_0^t f` in regimes where no
//! closed form is available and for miscellaneous diagnostics.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Chebyshev-style initial guess, then Newton on P_n(x) = 0.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

fn rule15() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(15))
}

fn rule7() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(7))
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in rule {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrate `f` over `[a, b]` to the requested relative tolerance.
///
/// Panels are split recursively where the 15-vs-7 point discrepancy exceeds
/// the locally apportioned tolerance. Fails if the recursion would exceed
/// `max_depth = 40` or if the integrand returns a non-finite value.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // Seed with uniform subpanels so features narrower than the node
    // spacing of one top-level rule still get sampled.
    const SEED: usize = 16;
    let mut stack: Vec<(f64, f64, u32)> = Vec::with_capacity(SEED);
    let mut coarse = 0.0;
    for i in 0..SEED {
        let lo = a + (b - a) * i as f64 / SEED as f64;
        let hi = if i + 1 == SEED {
            b
        } else {
            a + (b - a) * (i + 1) as f64 / SEED as f64
        };
        coarse += panel(&f, lo, hi, rule15());
        stack.push((lo, hi, 0u32));
    }
    if !coarse.is_finite() {
        return Err(Error::non_finite(format!(
            "integrand non-finite on [{a}, {b}]"
        )));
    }
    let scale = coarse.abs().max(1e-300);
    let mut total = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let fine = panel(&f, lo, hi, rule15());
        let rough = panel(&f, lo, hi, rule7());
        if !fine.is_finite() || !rough.is_finite() {
            return Err(Error::non_finite(format!(
                "integrand non-finite on [{lo}, {hi}]"
            )));
        }
        let err = (fine - rough).abs();
        // Two acceptance routes: error small against the panel's own
        // contribution (sums to rel_tol * int |f| globally), or against the
        // length-apportioned share of the whole integral (covers panels
        // where f crosses zero).
        let local_tol = rel_tol * scale * ((hi - lo) / (b - a)).abs().max(f64::EPSILON);
        if err <= local_tol || err <= rel_tol * fine.abs() || err <= 4.0 * f64::EPSILON * fine.abs()
        {
            total += fine;
        } else if depth >= 40 {
            return Err(Error::no_convergence(format!(
                "quadrature stalled on [{lo}, {hi}] with error {err:.3e}"
            )));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Ok(total)
}
