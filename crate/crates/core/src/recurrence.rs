//! Bubble characterization recurrences.
//!
//! For `p > 2` the tower of bubbles is encoded by two coupled sequences:
//! starting from `(delta_0, a_0) = (1, 2)`, the ratio `d_k =
//! delta_k/delta_{k-1}` is the unique interior root of
//!
//! ```text
//!     g(x) = (2p/(2 + a_{k-1})) (1 - x) - 1 + x^p = 0,   x in (0, 1),
//! ```
//!
//! and `a_k = 2 - d_k^{p-1} (2 + a_{k-1})`. Derived per row are the energy
//! `E_k = 2 a_k / delta_k^{p-1}`, the valley location `delta_k* =
//! (1 - a_k/(2(p-1))) delta_k`, and the valley height `beta_k* =
//! (2 + a_k)(1 - a_k/(2(p-1)))^{p-1}`. The `p -> infinity` limit replaces
//! `g` by `(2/(2 + a_hat_{k-1})) log(1/x) - 1 + x` acting on `t = x^{p-1}`
//! directly.
//!
//! The telescoping identity `delta_k^{p-1} sum_{i<=k} E_i = 2 + a_k` holds
//! by induction once `E_k` and `a_k` come from the same `d_k^{p-1}`, so the
//! table tracks that power through the same product recurrence and the
//! identity is preserved to rounding for hundreds of rows.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::csvout::{fmt_float, Table};
use crate::error::{Error, Result};
use crate::roots::bisect_newton;

/// Default residual tolerance for the row root solves.
pub const DEFAULT_TOL: f64 = 1e-12;

/// One row of the bubble table.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RecurrenceRow {
    pub k: usize,
    /// `delta_k`, the k-th concentration scale relative to the first.
    pub delta: f64,
    /// `a_k`, the k-th bubble exponent.
    pub a: f64,
    /// `d_k = delta_k / delta_{k-1}`; `None` for the seed row.
    pub d: Option<f64>,
    /// `E_k = 2 a_k / delta_k^{p-1}`.
    pub e: f64,
    /// `delta_k* = (1 - a_k / (2(p-1))) delta_k`.
    pub delta_star: f64,
    /// `beta_k* = (2 + a_k)(1 - a_k / (2(p-1)))^{p-1}`.
    pub beta_star: f64,
}

/// The computed table for one `(p, K)`.
#[derive(Debug)]
pub struct RecurrenceTable {
    p: f64,
    rows: Vec<RecurrenceRow>,
    /// `delta_k^{p-1}`, accumulated as a product of the per-row `d_k^{p-1}`.
    pow_delta: Vec<f64>,
    /// Partial sums `sum_{i<=k} E_i`.
    cum_e: Vec<f64>,
}

/// One row of the `p -> infinity` limit table.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct HatRow {
    pub k: usize,
    /// `c_hat_k`, the limit of `delta_k^{p-1}`.
    pub c_hat: f64,
    /// `a_hat_k`, the limit of `a_k`.
    pub a_hat: f64,
    /// `beta_hat_k* = (2 + a_hat_k) exp(-a_hat_k / 2)`.
    pub beta_hat_star: f64,
}

/// Solve `g(x) = c(1-x) - 1 + x^p = 0` on the interior branch, returning
/// `(x, x^{p-1})` in whichever parametrization keeps the digits.
fn solve_row(p: f64, a_prev: f64, tol: f64) -> Result<(f64, f64)> {
    let c = 2.0 * p / (2.0 + a_prev);
    if p - 2.0 < 1e-3 {
        // Near p = 2 the root collapses toward 0 like (p-2)/2; solve in
        // y = log(1/x), where it sits at moderate size.
        let g = |y: f64| -c * f64::exp_m1(-y) - 1.0 + (-p * y).exp();
        // The interior root lies right of the minimum of g in x, i.e.
        // right of y* = log((2+a)/2)/(p-1).
        let y_star = ((2.0 + a_prev) / 2.0).ln() / (p - 1.0);
        let mut hi = y_star + 1.0;
        let mut tries = 0;
        while g(hi) <= 0.0 {
            hi *= 2.0;
            tries += 1;
            if tries > 200 {
                return Err(Error::bracket_failed(format!(
                    "no positive value of the near-2 row function up to y = {hi}"
                )));
            }
        }
        let root = bisect_newton(g, y_star, hi, tol)?;
        if root.fx.abs() > tol {
            return Err(Error::no_convergence(format!(
                "near-2 row residual {:.3e} above tol {tol:.1e}",
                root.fx
            )));
        }
        let y = root.x;
        Ok(((-y).exp(), (-(p - 1.0) * y).exp()))
    } else if p >= 16.0 {
        // For large p the root in x crowds toward 1 while x^{p-1} carries
        // the information; solve directly in t = x^{p-1}.
        let e = 1.0 / (p - 1.0);
        let g = |t: f64| {
            let x = t.powf(e);
            c * (1.0 - x) - 1.0 + t * x
        };
        let t_star = 2.0 / (2.0 + a_prev);
        let root = bisect_newton(g, 1e-300, t_star, tol)?;
        if root.fx.abs() > tol {
            return Err(Error::no_convergence(format!(
                "large-p row residual {:.3e} above tol {tol:.1e}",
                root.fx
            )));
        }
        let t = root.x;
        Ok((t.powf(e), t))
    } else {
        let g = |x: f64| c * (1.0 - x) - 1.0 + x.powf(p);
        // g decreases to its minimum at x* = (2/(2+a))^{1/(p-1)} and rises
        // back to the trivial root at 1, so [~0, x*] brackets the interior
        // root.
        let x_star = (2.0 / (2.0 + a_prev)).powf(1.0 / (p - 1.0));
        let root = bisect_newton(g, 1e-13, x_star, tol)?;
        if root.fx.abs() > tol {
            return Err(Error::no_convergence(format!(
                "row residual {:.3e} above tol {tol:.1e}",
                root.fx
            )));
        }
        let x = root.x;
        Ok((x, x.powf(p - 1.0)))
    }
}

fn build_table(p: f64, k_max: usize, tol: f64) -> Result<RecurrenceTable> {
    let mut rows = Vec::with_capacity(k_max + 1);
    let mut pow_delta = Vec::with_capacity(k_max + 1);
    let mut cum_e = Vec::with_capacity(k_max + 1);

    let star_factor = |a: f64| 1.0 - a / (2.0 * (p - 1.0));
    let seed_a = 2.0;
    rows.push(RecurrenceRow {
        k: 0,
        delta: 1.0,
        a: seed_a,
        d: None,
        e: 2.0 * seed_a,
        delta_star: star_factor(seed_a),
        beta_star: (2.0 + seed_a) * star_factor(seed_a).powf(p - 1.0),
    });
    pow_delta.push(1.0);
    cum_e.push(2.0 * seed_a);

    for k in 1..=k_max {
        let prev = rows[k - 1];
        let (x, t) = solve_row(p, prev.a, tol)?;
        let a = 2.0 - t * (2.0 + prev.a);
        if !(a > 0.0 && a < prev.a) {
            return Err(Error::consistency(format!(
                "row {k}: a = {a} escapes (0, {}) at p = {p}",
                prev.a
            )));
        }
        let delta = prev.delta * x;
        let pow = pow_delta[k - 1] * t;
        let e = 2.0 * a / pow;
        rows.push(RecurrenceRow {
            k,
            delta,
            a,
            d: Some(x),
            e,
            delta_star: star_factor(a) * delta,
            beta_star: (2.0 + a) * star_factor(a).powf(p - 1.0),
        });
        pow_delta.push(pow);
        cum_e.push(cum_e[k - 1] + e);
    }
    Ok(RecurrenceTable {
        p,
        rows,
        pow_delta,
        cum_e,
    })
}

/// Compute (or fetch from the process-wide cache) the table for `(p, K)`.
pub fn compute_recurrence(p: f64, k_max: usize, tol: f64) -> Result<Arc<RecurrenceTable>> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::invalid_parameter(format!(
            "the bubble recurrence needs p > 2 (the root degenerates at 2), got {p}"
        )));
    }
    if k_max < 1 {
        return Err(Error::invalid_parameter(
            "table needs at least one computed row (K >= 1)",
        ));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::invalid_parameter(format!(
            "tol must lie in (0, 1e-6], got {tol}"
        )));
    }
    static CACHE: OnceLock<Mutex<BTreeMap<(u64, usize, u64), Arc<RecurrenceTable>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let key = (p.to_bits(), k_max, tol.to_bits());
    if let Some(table) = cache.lock().unwrap().get(&key) {
        return Ok(Arc::clone(table));
    }
    let table = Arc::new(build_table(p, k_max, tol)?);
    cache.lock().unwrap().insert(key, Arc::clone(&table));
    Ok(table)
}

impl RecurrenceTable {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn rows(&self) -> &[RecurrenceRow] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> Option<&RecurrenceRow> {
        self.rows.get(k)
    }

    /// Largest computed index.
    pub fn k_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `delta_k^{p-1}` as accumulated by the table.
    pub fn pow_delta(&self, k: usize) -> f64 {
        self.pow_delta[k]
    }

    /// Relative residual of the telescoping identity
    /// `delta_k^{p-1} sum_{i<=k} E_i = 2 + a_k` at row `k`.
    pub fn identity_residual(&self, k: usize) -> f64 {
        let lhs = self.pow_delta[k] * self.cum_e[k];
        let rhs = 2.0 + self.rows[k].a;
        (lhs - rhs).abs() / rhs
    }

    /// The valley interpolation
    /// `beta_k(delta) = 2(2+a_k)(delta/delta_k)^p / (2+a_k - 2p(1 - delta/delta_k))`
    /// on the bracket `[delta_{k+1}, delta_k]`; equals 2 at both ends and
    /// dips to `beta_k*` at `delta_k*`.
    pub fn beta(&self, k: usize, delta: f64) -> Result<f64> {
        let (Some(row), Some(next)) = (self.rows.get(k), self.rows.get(k + 1)) else {
            return Err(Error::invalid_parameter(format!(
                "beta_k needs rows {k} and {}, table holds 0..={}",
                k + 1,
                self.k_max()
            )));
        };
        let slack = 1e-12 * row.delta;
        if !(delta >= next.delta - slack && delta <= row.delta + slack) {
            return Err(Error::invalid_parameter(format!(
                "delta = {delta} outside the bracket [{}, {}] of row {k}",
                next.delta, row.delta
            )));
        }
        let ratio = delta / row.delta;
        let denom = 2.0 + row.a - 2.0 * self.p * (1.0 - ratio);
        Ok(2.0 * (2.0 + row.a) * ratio.powf(self.p) / denom)
    }

    /// Render as CSV (`k,delta,a,d,E,delta_star,beta_star`).
    pub fn to_csv(&self) -> String {
        let mut table = Table::new(&["k", "delta", "a", "d", "E", "delta_star", "beta_star"]);
        for row in &self.rows {
            table.push_raw(vec![
                row.k.to_string(),
                fmt_float(row.delta),
                fmt_float(row.a),
                fmt_float(row.d.unwrap_or(f64::NAN)),
                fmt_float(row.e),
                fmt_float(row.delta_star),
                fmt_float(row.beta_star),
            ]);
        }
        table.render()
    }
}

/// Compute the `p -> infinity` limit table: `c_hat_k / c_hat_{k-1}` is the
/// root of `(2/(2+a_hat_{k-1})) log(1/x) - 1 + x` in `(0, 1)` and
/// `a_hat_k = 2 - x (2 + a_hat_{k-1})`.
pub fn compute_hat_recurrence(k_max: usize, tol: f64) -> Result<Vec<HatRow>> {
    if k_max < 1 {
        return Err(Error::invalid_parameter(
            "hat table needs at least one computed row (K >= 1)",
        ));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::invalid_parameter(format!(
            "tol must lie in (0, 1e-6], got {tol}"
        )));
    }
    let beta_hat = |a: f64| (2.0 + a) * (-a / 2.0).exp();
    let mut rowv = vec![HatRow {
        k: 0,
        c_hat: 1.0,
        a_hat: 2.0,
        beta_hat_star: beta_hat(2.0),
    }];
    for k in 1..=k_max {
        let prev = rowv[k - 1];
        let c2 = 2.0 / (2.0 + prev.a_hat);
        let g = |x: f64| -c2 * x.ln() - 1.0 + x;
        // Interior root left of the minimum at x = 2/(2+a_hat).
        let root = bisect_newton(g, 1e-12, c2, tol)?;
        if root.fx.abs() > tol {
            return Err(Error::no_convergence(format!(
                "hat row residual {:.3e} above tol {tol:.1e}",
                root.fx
            )));
        }
        let x = root.x;
        let a_hat = 2.0 - x * (2.0 + prev.a_hat);
        rowv.push(HatRow {
            k,
            c_hat: prev.c_hat * x,
            a_hat,
            beta_hat_star: beta_hat(a_hat),
        });
    }
    Ok(rowv)
}

/// Render the hat table as CSV (`k,c_hat,a_hat,beta_hat_star`).
pub fn hat_to_csv(rows: &[HatRow]) -> String {
    let mut table = Table::new(&["k", "c_hat", "a_hat", "beta_hat_star"]);
    for row in rows {
        table.push_raw(vec![
            row.k.to_string(),
            fmt_float(row.c_hat),
            fmt_float(row.a_hat),
            fmt_float(row.beta_hat_star),
        ]);
    }
    table.render()
}

/// One row of the limit-trend diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct LimitRow {
    pub p: f64,
    pub a: f64,
    /// `delta_k(p)^{p-1}`, the quantity converging to `c_hat_k`.
    pub delta_pow: f64,
    pub d: f64,
}

/// Trend of row `k` across a `p` grid against both limits.
#[derive(Debug, Clone)]
pub struct LimitReport {
    pub k: usize,
    pub rows: Vec<LimitRow>,
    pub a_hat: f64,
    pub c_hat: f64,
    /// `|a_k(p) - a_hat_k|` shrinks along increasing `p`.
    pub gap_shrinks: bool,
    /// `a_k(p)` climbs toward 2 along decreasing `p`.
    pub approaches_two: bool,
}

/// Evaluate row `k` across an increasing grid of `p > 2` values and check
/// both limit trends.
pub fn limit_convergence_report(k: usize, p_grid: &[f64]) -> Result<LimitReport> {
    if k < 1 {
        return Err(Error::invalid_parameter("trend report needs k >= 1"));
    }
    if p_grid.is_empty() || p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid_parameter(
            "p grid must be nonempty and increasing",
        ));
    }
    let hat = compute_hat_recurrence(k, DEFAULT_TOL)?;
    let hat_row = hat[k];
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let table = compute_recurrence(p, k, DEFAULT_TOL)?;
        let row = table.row(k).unwrap();
        rows.push(LimitRow {
            p,
            a: row.a,
            delta_pow: table.pow_delta(k),
            d: row.d.unwrap(),
        });
    }
    let gap_shrinks = rows
        .windows(2)
        .all(|w| (w[1].a - hat_row.a_hat).abs() <= (w[0].a - hat_row.a_hat).abs() + 1e-12);
    let approaches_two = rows.windows(2).all(|w| w[1].a <= w[0].a + 1e-12);
    Ok(LimitReport {
        k,
        rows,
        a_hat: hat_row.a_hat,
        c_hat: hat_row.c_hat,
        gap_shrinks,
        approaches_two,
    })
}
