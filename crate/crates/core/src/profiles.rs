//! Closed-form limit profiles and reference curves.
//!
//! The profiles solve the limit equation `-z'' - z'/r = e^z` on `(0, inf)`
//! with finite mass `int e^z r dr`:
//!
//! * `Regular0`: `z(r) = log(64 / (8 + r^2)^2)`, mass 4, regular at 0,
//! * `SingularA { a, b }`: `z(r) = log(2 a^2 b / (r^{2-a} (1 + b r^a)^2))`,
//!   mass `2a`, log-singular at 0; the default `b = (sqrt(2)/a)^a`
//!   normalizes `z(a/sqrt(2)) = 0`,
//! * `Tilde0`: `z(r) = log(16 / (2 + r^2)^2)`, mass 4.
//!
//! In log-radius `s = log r` with `zeta(s) = z(e^s)` the equation becomes
//! `-zeta'' = e^{2s + zeta}`, every profile is a logistic expression in one
//! sigmoid `q`, and all magnitudes stay O(1) over `r` spanning dozens of
//! decades. Residuals are therefore reported in this form; the radial form
//! is the same quantity divided by `r^2`.
//!
//! The reference curves `U_beta` and `V_L` used for intersection counting
//! live here too, together with a tabulated variant for curves sampled
//! from computed solutions.

use crate::csvout::Table;
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quad;
use crate::roots::golden_max;

/// `log(e^a + e^b)` without overflow.
fn log_sum(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// A Liouville limit profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Regular0,
    SingularA { a: f64, b: f64 },
    Tilde0,
}

impl Profile {
    /// Singular profile with slope exponent `a in (0, 2)`; `b` defaults to
    /// `(sqrt(2)/a)^a`, which places the zero of `z` at `r = a/sqrt(2)`.
    pub fn singular(a: f64, b: Option<f64>) -> Result<Profile> {
        if !(a > 0.0 && a < 2.0) {
            return Err(Error::invalid_parameter(format!(
                "slope exponent a must lie in (0, 2), got {a}"
            )));
        }
        let b = b.unwrap_or_else(|| (2.0_f64.sqrt() / a).powf(a));
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid_parameter(format!(
                "scale b must be positive, got {b}"
            )));
        }
        Ok(Profile::SingularA { a, b })
    }

    /// Sigmoid parameters `(k, s0, coef, offset)` of the log-radius form:
    /// with `q(s) = 1/(1 + exp(-k (s - s0)))`,
    ///
    /// ```text
    ///   zeta(s)  = offset + (k - 2) s - 2 log(1 + exp(k (s - s0)))
    ///   zeta'    = (k - 2) - 2 k q
    ///   zeta''   = -2 k^2 q (1 - q)
    ///   e^{2s+zeta} = 2 k^2 q (1 - q)
    /// ```
    fn sigmoid(&self) -> (f64, f64, f64) {
        // The offset satisfies exp(offset + k s0) = 2 k^2, which is what
        // makes e^{2s + zeta} = 2 k^2 q (1 - q) below.
        match *self {
            Profile::Regular0 => (2.0, 0.5 * 8.0_f64.ln(), 0.0),
            Profile::SingularA { a, b } => (a, -b.ln() / a, (2.0 * a * a * b).ln()),
            Profile::Tilde0 => (2.0, 0.5 * 2.0_f64.ln(), 4.0_f64.ln()),
        }
    }

    /// `(zeta, zeta', zeta'')` at `s = log r`.
    pub fn eval_log_radius(&self, s: f64) -> (f64, f64, f64) {
        let (k, s0, log_coef) = self.sigmoid();
        let q = 1.0 / (1.0 + (-k * (s - s0)).exp());
        let zeta = log_coef + (k - 2.0) * s - 2.0 * log_sum(0.0, k * (s - s0));
        let d1 = (k - 2.0) - 2.0 * k * q;
        let d2 = -2.0 * k * k * q * (1.0 - q);
        (zeta, d1, d2)
    }

    /// `(z, z', z'')` in the radial variable. `r = 0` is accepted for the
    /// two regular profiles only.
    pub fn eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::invalid_parameter(format!(
                "profile radius must be >= 0, got {r}"
            )));
        }
        if r == 0.0 {
            return match *self {
                Profile::Regular0 => Ok((0.0, 0.0, -0.5)),
                Profile::Tilde0 => Ok((16.0_f64.ln() - 2.0 * 2.0_f64.ln(), 0.0, -2.0)),
                Profile::SingularA { .. } => Err(Error::invalid_parameter(
                    "the singular profile diverges at r = 0",
                )),
            };
        }
        let (zeta, d1, d2) = self.eval_log_radius(r.ln());
        Ok((zeta, d1 / r, (d2 - d1) / (r * r)))
    }

    /// Residual of `-zeta'' = e^{2s + zeta}` at `s`. The radial residual
    /// `-z'' - z'/r - e^z` equals this divided by `r^2`.
    pub fn residual_log_radius(&self, s: f64) -> f64 {
        let (zeta, _, d2) = self.eval_log_radius(s);
        -d2 - (2.0 * s + zeta).exp()
    }

    /// Residual at radius `r > 0` (log-radius form; see
    /// [`Profile::residual_log_radius`]).
    pub fn residual(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid_parameter(format!(
                "residual needs r > 0, got {r}"
            )));
        }
        Ok(self.residual_log_radius(r.ln()))
    }

    /// Mass `int_0^inf e^z r dr`, integrated in log-radius. Closed forms:
    /// 4 for the regular profiles, `2a` for the singular family.
    pub fn mass(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0 && tol <= 1e-6) {
            return Err(Error::invalid_parameter(format!(
                "tol must lie in (0, 1e-6], got {tol}"
            )));
        }
        let (k, s0, _) = self.sigmoid();
        // The integrand 2 k^2 q(1-q) decays like e^{-k|s - s0|}.
        let half_width = 90.0 / k;
        quad::integrate(
            |s| {
                let (zeta, _, _) = self.eval_log_radius(s);
                (2.0 * s + zeta).exp()
            },
            s0 - half_width,
            s0 + half_width,
            tol,
        )
    }

    /// Scaled mass density `R^2 e^{z(R)}`, whose peaks mark bubble centers.
    pub fn phi_density(&self, big_r: f64) -> f64 {
        if big_r <= 0.0 {
            return 0.0;
        }
        let (zeta, _, _) = self.eval_log_radius(big_r.ln());
        (2.0 * big_r.ln() + zeta).exp()
    }

    /// Numerical maximum of the density over `R`, by golden-section search
    /// in log-radius. Closed-form targets: 2 at `R = 2 sqrt(2)` for
    /// `Regular0`, `a^2/2` at `b R^a = 1` for the singular family, 2 at
    /// `R = sqrt(2)` for `Tilde0`.
    pub fn phi_max(&self) -> (f64, f64) {
        let (_, s0, _) = self.sigmoid();
        let (s, value) = golden_max(|s| self.phi_density(s.exp()), s0 - 30.0, s0 + 30.0, 1e-12);
        (s.exp(), value)
    }

    /// CSV dump `s,z,zprime,residual` over the given log-radius grid
    /// (`zprime = dz/ds`, residual in the log-radius form).
    pub fn dump_csv(&self, s_grid: &[f64]) -> String {
        let mut table = Table::new(&["s", "z", "zprime", "residual"]);
        for &s in s_grid {
            let (zeta, d1, _) = self.eval_log_radius(s);
            table.push_floats(&[s, zeta, d1, self.residual_log_radius(s)]);
        }
        table.render()
    }
}

/// A reference curve to count intersections against.
#[derive(Debug, Clone)]
pub enum Curve {
    /// `U_beta(r) = (beta log(1/r))^{1/p}`, defined on `r <= 1`.
    UBeta { beta: f64, p: f64 },
    /// `V_L(r) = {2 log(1/r) - (1 - (1-m)/p) log(2 log(1/r)) + L}^{1/p}`,
    /// defined where `2 log(1/r) > 1` and the brace is nonnegative.
    VL { l: f64, p: f64, m: f64 },
    /// Monotone-cubic interpolant of samples `(s, value)`.
    Tabulated(MonotoneCubic),
}

impl Curve {
    pub fn u_beta(beta: f64, p: f64) -> Result<Curve> {
        if !(beta > 0.0) || !(p > 0.0) {
            return Err(Error::invalid_parameter(format!(
                "U_beta needs beta > 0 and p > 0, got beta = {beta}, p = {p}"
            )));
        }
        Ok(Curve::UBeta { beta, p })
    }

    pub fn v_l(l: f64, p: f64, m: f64) -> Result<Curve> {
        if !(p > 0.0) {
            return Err(Error::invalid_parameter(format!(
                "V_L needs p > 0, got {p}"
            )));
        }
        Ok(Curve::VL { l, p, m })
    }

    pub fn tabulated(s: Vec<f64>, values: Vec<f64>) -> Result<Curve> {
        Ok(Curve::Tabulated(MonotoneCubic::new(s, values)?))
    }

    /// Curve value at `r = e^s`. Errors outside the definition region.
    pub fn eval_log_radius(&self, s: f64) -> Result<f64> {
        match self {
            Curve::UBeta { beta, p } => {
                let brace = -beta * s;
                if brace < 0.0 {
                    return Err(Error::invalid_parameter(format!(
                        "U_beta is defined for s <= 0, got s = {s}"
                    )));
                }
                Ok(brace.powf(1.0 / p))
            }
            Curve::VL { l, p, m } => {
                let t = -2.0 * s;
                if t <= 1.0 {
                    return Err(Error::invalid_parameter(format!(
                        "V_L needs 2 log(1/r) > 1, got {t} at s = {s}"
                    )));
                }
                let brace = t - (1.0 - (1.0 - m) / p) * t.ln() + l;
                if brace < 0.0 {
                    return Err(Error::invalid_parameter(format!(
                        "V_L brace is negative ({brace}) at s = {s}"
                    )));
                }
                Ok(brace.powf(1.0 / p))
            }
            Curve::Tabulated(interp) => {
                let (lo, hi) = interp.domain();
                if s < lo || s > hi {
                    return Err(Error::invalid_parameter(format!(
                        "tabulated curve is defined on [{lo}, {hi}], got s = {s}"
                    )));
                }
                Ok(interp.eval(s))
            }
        }
    }

    /// Short identifier used in intersection reports.
    pub fn id(&self) -> String {
        match self {
            Curve::UBeta { beta, p } => format!("u_beta(beta={beta},p={p})"),
            Curve::VL { l, p, m } => format!("v_l(L={l},p={p},m={m})"),
            Curve::Tabulated(interp) => {
                let (lo, hi) = interp.domain();
                format!("tabulated([{lo:.6},{hi:.6}])")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn regular_profile_boundary_values() {
        let p = Profile::Regular0;
        let (z, zp, zpp) = p.eval(0.0).unwrap();
        assert_eq!((z, zp), (0.0, 0.0));
        assert!((zpp + 0.5).abs() < 1e-15);
        // z(1) = log(64/81).
        let (z, _, _) = p.eval(1.0).unwrap();
        assert!((z - (64.0_f64 / 81.0).ln()).abs() < 1e-14);
        assert!((z + 0.235_566_071_312_766_91).abs() < 1e-14);
    }

    #[test]
    fn singular_profile_normalization() {
        // With the default b, z vanishes at r = a/sqrt(2) and the slope
        // there satisfies -r z'(r) = 2.
        for a in [0.25, 1.0, 1.464_101_615_137_754_6, 1.9] {
            let p = Profile::singular(a, None).unwrap();
            let r = a / SQRT2;
            let (z, zp, _) = p.eval(r).unwrap();
            assert!(z.abs() < 1e-13, "a = {a}: z = {z}");
            assert!((-r * zp - 2.0).abs() < 1e-13, "a = {a}");
        }
    }

    #[test]
    fn tilde_profile_boundary_values() {
        let p = Profile::Tilde0;
        let (z, zp, _) = p.eval(SQRT2).unwrap();
        assert!(z.abs() < 1e-14);
        assert!((zp + SQRT2).abs() < 1e-14);
    }

    #[test]
    fn radial_derivatives_match_finite_differences() {
        let profiles = [
            Profile::Regular0,
            Profile::singular(1.3, None).unwrap(),
            Profile::Tilde0,
        ];
        for p in &profiles {
            for &r in &[0.3, 1.0, 4.7] {
                let h = 1e-6 * r;
                let (z0, zp, zpp) = p.eval(r).unwrap();
                let (zu, zpu, _) = p.eval(r + h).unwrap();
                let (zd, zpd, _) = p.eval(r - h).unwrap();
                assert!(((zu - zd) / (2.0 * h) - zp).abs() < 1e-7 * (1.0 + zp.abs()));
                assert!(((zpu - zpd) / (2.0 * h) - zpp).abs() < 1e-6 * (1.0 + zpp.abs()));
                let _ = z0;
            }
        }
    }

    #[test]
    fn residuals_vanish_over_twelve_decades() {
        let profiles = [
            Profile::Regular0,
            Profile::singular(0.25, None).unwrap(),
            Profile::singular(1.0, None).unwrap(),
            Profile::singular(1.9, None).unwrap(),
            Profile::Tilde0,
        ];
        for p in &profiles {
            for i in 0..=120 {
                let r = 10.0_f64.powf(-6.0 + 0.1 * i as f64);
                let res = p.residual(r).unwrap();
                assert!(res.abs() < 1e-12, "{p:?} at r = {r:.3e}: {res:.3e}");
            }
        }
    }

    #[test]
    fn masses_match_closed_forms() {
        assert!((Profile::Regular0.mass(1e-10).unwrap() - 4.0).abs() < 1e-8);
        assert!((Profile::Tilde0.mass(1e-10).unwrap() - 4.0).abs() < 1e-8);
        for i in 0..20 {
            let a = 0.05 + 1.9 * i as f64 / 20.0;
            let p = Profile::singular(a, None).unwrap();
            assert!(
                (p.mass(1e-10).unwrap() - 2.0 * a).abs() < 1e-8 * (2.0 * a),
                "a = {a}"
            );
        }
    }

    #[test]
    fn density_maxima_match_closed_forms() {
        let (arg, max) = Profile::Regular0.phi_max();
        assert!((max - 2.0).abs() < 1e-12);
        assert!((arg - 2.0 * SQRT2).abs() < 1e-5);
        assert!((Profile::Regular0.phi_density(2.0 * SQRT2) - 2.0).abs() < 1e-15);
        assert_eq!(Profile::Regular0.phi_density(0.0), 0.0);

        for a in [0.25, 1.0, 1.9] {
            let p = Profile::singular(a, None).unwrap();
            let (arg, max) = p.phi_max();
            assert!((max - a * a / 2.0).abs() < 1e-12, "a = {a}");
            let Profile::SingularA { b, .. } = p else {
                unreachable!()
            };
            // Peak sits where b R^a = 1.
            assert!((b * arg.powf(a) - 1.0).abs() < 1e-4, "a = {a}");
        }

        let (arg, max) = Profile::Tilde0.phi_max();
        assert!((max - 2.0).abs() < 1e-12);
        assert!((arg - SQRT2).abs() < 1e-5);
    }

    #[test]
    fn small_a_profiles_flatten_toward_the_pure_log() {
        // As a shrinks along the bubble sequence, z approaches
        // log(a^2/2) + 2 log(1/r) uniformly on [0.1, 10].
        let sup_gap = |a: f64| {
            let p = Profile::singular(a, None).unwrap();
            let mut sup: f64 = 0.0;
            for i in 0..=200 {
                let r = 10.0_f64.powf(-1.0 + 0.01 * i as f64);
                let (z, _, _) = p.eval(r).unwrap();
                let target = (a * a / 2.0).ln() + 2.0 * (1.0 / r).ln();
                sup = sup.max((z - target).abs());
            }
            sup
        };
        let table = crate::recurrence::compute_recurrence(3.0, 50, 1e-12).unwrap();
        let a10 = table.row(10).unwrap().a;
        let a50 = table.row(50).unwrap().a;
        assert!(sup_gap(a50) < sup_gap(a10));
    }

    #[test]
    fn curves_match_hand_values() {
        let u = Curve::u_beta(2.0, 3.0).unwrap();
        assert!((u.eval_log_radius(-0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(u.eval_log_radius(0.0).unwrap(), 0.0);
        assert!(u.eval_log_radius(0.1).is_err());

        // With m = 1 - 2p the log coefficient collapses to -1, so at
        // r = e^{-8}: V = (16 + log 16)^{1/3}.
        let v = Curve::v_l(0.0, 3.0, -5.0).unwrap();
        let val = v.eval_log_radius(-8.0).unwrap();
        assert!((val - 2.657_712_843_676_549_7).abs() < 1e-14);
        assert!(v.eval_log_radius(-0.4).is_err());
    }

    #[test]
    fn tabulated_curve_round_trips_samples() {
        let s: Vec<f64> = (0..=156).map(|i| -8.0 + 0.05 * i as f64).collect();
        let u = Curve::u_beta(1.5, 3.0).unwrap();
        let vals: Vec<f64> = s.iter().map(|&s| u.eval_log_radius(s).unwrap()).collect();
        let tab = Curve::tabulated(s.clone(), vals.clone()).unwrap();
        for (si, vi) in s.iter().zip(&vals) {
            assert!((tab.eval_log_radius(*si).unwrap() - vi).abs() < 1e-14);
        }
        // Interpolation error between nodes stays small away from the
        // branch-point end, where the curve's curvature blows up.
        for i in 0..=100 {
            let si = -7.9 + 0.069 * i as f64;
            let exact = u.eval_log_radius(si).unwrap();
            assert!(
                (tab.eval_log_radius(si).unwrap() - exact).abs() < 1e-4,
                "s = {si}"
            );
        }
        assert!(tab.eval_log_radius(1.0).is_err());
    }

    #[test]
    fn csv_dump_is_pinned() {
        let grid = [-2.0, 0.0, 2.0];
        let text = Profile::Regular0.dump_csv(&grid);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "s,z,zprime,residual");
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(Profile::singular(0.0, None).is_err());
        assert!(Profile::singular(2.0, None).is_err());
        assert!(Profile::singular(1.0, Some(-1.0)).is_err());
        assert!(Profile::singular(1.0, None).unwrap().eval(0.0).is_err());
        assert!(Profile::Regular0.eval(-1.0).is_err());
        assert!(Profile::Regular0.residual(0.0).is_err());
        assert!(Profile::Regular0.mass(1e-3).is_err());
        assert!(Curve::u_beta(0.0, 3.0).is_err());
        assert!(Curve::v_l(0.0, 0.0, 1.0).is_err());
    }
}
