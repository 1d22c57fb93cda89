//! Nonlinearity families `f(t) = h(t) exp(t^p)`.
//!
//! Three families of `h` are supported:
//!
//! * `UnitH`: `h == 1`, so `f(t) = exp(t^p)`; with `p = 1` this is the
//!   classical Gelfand nonlinearity,
//! * `PowerExp { m, alpha, q }`: `h(t) = t^m exp(alpha t^q)` above a join
//!   threshold, capped below it by a C^1 cubic when `m < 0` would make
//!   `h` blow up at the origin,
//! * `H4 { tau0 }`: the full nonlinearity `f(t) = (4(p-1)/p^2) t^{1-2p}
//!   exp(t^p)` above `tau0`, extended below by a C^2 quintic. The constant
//!   `4(p-1)/p^2` is exactly the one that makes `(2 log(1/r))^{1/p}` an
//!   exact singular solution of `-U'' - U'/r = f(U)`.
//!
//! Everything is evaluated through [`LogValue`] so that `t^p` up to `1e8`
//! in the exponent stays representable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::LogValue;
use crate::quad;

/// Which `h` family the spec uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// `h == 1`.
    UnitH,
    /// `h(t) = t^m exp(alpha t^q)` for `t >= t_join`.
    PowerExp { m: f64, alpha: f64, q: f64 },
    /// `f(t) = (4(p-1)/p^2) t^{1-2p} exp(t^p)` for `t >= tau0`.
    H4 { tau0: f64 },
}

/// Smooth cap used below the join threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Blend {
    /// No cap: the closed form holds on all of `[0, inf)`.
    None,
    /// Quintic extension of `f` itself on `[0, tau0]`, in `x = t/tau0`:
    /// `f = f0 + a3 x^3 + a4 x^4 + a5 x^5`. Matches `f, f', f''` at `tau0`
    /// and has `f(0) = f0`, `f'(0) = f''(0) = 0`.
    QuinticF { f0: f64, a3: f64, a4: f64, a5: f64 },
    /// Cubic cap of `h` on `[0, t_join]`, in `x = t/t_join`:
    /// `h = h0 + a2 x^2 + a3 x^3`. Matches `h, h'` at `t_join` and has
    /// `h(0) = h0`, `h'(0) = 0`.
    CubicH { h0: f64, a2: f64, a3: f64 },
}

/// A validated nonlinearity `f(t) = h(t) exp(t^p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    p: f64,
    variant: Variant,
    t_join: f64,
    blend: Blend,
}

/// JSON wire form of a spec, as accepted by the CLI (`--spec`).
///
/// `variant` is one of `"unit"`, `"power_exp"`, `"h4"`; the remaining
/// fields apply per variant and unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecParams {
    pub p: f64,
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_join: Option<f64>,
}

impl NonlinearitySpec {
    /// Build and validate a spec. The join threshold defaults per variant:
    /// `0` for `UnitH` and nonnegative-`m` `PowerExp` (closed form
    /// everywhere), `1` for `PowerExp` with `m < 0`, `tau0` for `H4`.
    pub fn new(p: f64, variant: Variant) -> Result<Self> {
        Self::with_join(p, variant, None)
    }

    /// As [`NonlinearitySpec::new`] with an explicit join threshold for the
    /// `PowerExp` cap.
    pub fn with_join(p: f64, variant: Variant, t_join: Option<f64>) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::invalid_parameter(format!(
                "p must be positive and finite, got {p}"
            )));
        }
        let (t_join, blend) = match variant {
            Variant::UnitH => (0.0, Blend::None),
            Variant::PowerExp { m, alpha, q } => {
                if alpha != 0.0 && !(q > 0.0 && q < p) {
                    return Err(Error::invalid_parameter(format!(
                        "power-exp inner exponent must satisfy 0 < q < p, got q = {q}, p = {p}"
                    )));
                }
                if m >= 0.0 {
                    (0.0, Blend::None)
                } else {
                    let tj = t_join.unwrap_or(1.0);
                    if !(tj > 0.0) {
                        return Err(Error::invalid_parameter(format!(
                            "join threshold must be positive for m < 0, got {tj}"
                        )));
                    }
                    // h and t h'/h at the join.
                    let h_j = tj.powf(m) * (alpha * tj.powf(q)).exp();
                    let th_ratio = m + alpha * q * tj.powf(q);
                    let h0 = 0.5 * h_j;
                    let delta = h_j - h0;
                    let u2 = h_j * th_ratio;
                    let blend = Blend::CubicH {
                        h0,
                        a2: 3.0 * delta - u2,
                        a3: u2 - 2.0 * delta,
                    };
                    check_blend_positive(|x| {
                        let Blend::CubicH { h0, a2, a3 } = blend else {
                            unreachable!()
                        };
                        h0 + a2 * x * x + a3 * x * x * x
                    })?;
                    (tj, blend)
                }
            }
            Variant::H4 { tau0 } => {
                if !(tau0 > 0.0) {
                    return Err(Error::invalid_parameter(format!(
                        "tau0 must be positive, got {tau0}"
                    )));
                }
                if !(p > 1.0) {
                    return Err(Error::invalid_parameter(format!(
                        "the t^{{1-2p}} family needs p > 1 for a positive prefactor, got p = {p}"
                    )));
                }
                // Closed-form values of f, t f'/f, and the second log
                // derivative at tau0.
                let tp = tau0.powf(p);
                if tp > 700.0 {
                    return Err(Error::range_overflow(format!(
                        "tau0^p = {tp} puts the join value of f outside f64 range"
                    )));
                }
                let c4 = 4.0 * (p - 1.0) / (p * p);
                let f_j = c4 * tau0.powf(1.0 - 2.0 * p) * tp.exp();
                // log f = log c4 + (1-2p) log t + t^p, so
                // f'/f = (1-2p)/t + p t^{p-1},
                // f''/f = (f'/f)^2 - (1-2p)/t^2 + p(p-1) t^{p-2}.
                let lf1 = (1.0 - 2.0 * p) / tau0 + p * tau0.powf(p - 1.0);
                let lf2 = -(1.0 - 2.0 * p) / (tau0 * tau0) + p * (p - 1.0) * tau0.powf(p - 2.0);
                let fp_j = f_j * lf1;
                let fpp_j = f_j * (lf1 * lf1 + lf2);
                // Quintic y(x) = f0 + a3 x^3 + a4 x^4 + a5 x^5 with
                // y(1) = f_j, y'(1) = tau0 f'_j, y''(1) = tau0^2 f''_j.
                let f0 = 0.5 * f_j;
                let u1 = f_j - f0;
                let u2 = tau0 * fp_j;
                let u3 = tau0 * tau0 * fpp_j;
                let blend = Blend::QuinticF {
                    f0,
                    a3: 10.0 * u1 - 4.0 * u2 + 0.5 * u3,
                    a4: -15.0 * u1 + 7.0 * u2 - u3,
                    a5: 6.0 * u1 - 3.0 * u2 + 0.5 * u3,
                };
                check_blend_positive(|x| {
                    let Blend::QuinticF { f0, a3, a4, a5 } = blend else {
                        unreachable!()
                    };
                    f0 + a3 * x.powi(3) + a4 * x.powi(4) + a5 * x.powi(5)
                })?;
                (tau0, blend)
            }
        };
        Ok(NonlinearitySpec {
            p,
            variant,
            t_join,
            blend,
        })
    }

    /// Parse the JSON wire form.
    pub fn from_params(params: &SpecParams) -> Result<Self> {
        let variant = match params.variant.as_str() {
            "unit" => Variant::UnitH,
            "power_exp" => Variant::PowerExp {
                m: params.m.unwrap_or(0.0),
                alpha: params.alpha.unwrap_or(0.0),
                q: params.q.unwrap_or(0.0),
            },
            "h4" => Variant::H4 {
                tau0: params.tau0.unwrap_or(1.0),
            },
            other => {
                return Err(Error::invalid_parameter(format!(
                    "unknown variant {other:?}; expected unit, power_exp, or h4"
                )))
            }
        };
        Self::with_join(params.p, variant, params.t_join)
    }

    /// JSON wire form of this spec.
    pub fn to_params(&self) -> SpecParams {
        let mut params = SpecParams {
            p: self.p,
            variant: String::new(),
            m: None,
            alpha: None,
            q: None,
            tau0: None,
            t_join: None,
        };
        match self.variant {
            Variant::UnitH => params.variant = "unit".into(),
            Variant::PowerExp { m, alpha, q } => {
                params.variant = "power_exp".into();
                params.m = Some(m);
                params.alpha = Some(alpha);
                params.q = Some(q);
                if m < 0.0 {
                    params.t_join = Some(self.t_join);
                }
            }
            Variant::H4 { tau0 } => {
                params.variant = "h4".into();
                params.tau0 = Some(tau0);
            }
        }
        params
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Threshold above which the closed form holds.
    pub fn t_join(&self) -> f64 {
        self.t_join
    }

    /// `log h(t)` for `t` at or above the join (closed-form region).
    fn log_h_closed(&self, t: f64) -> f64 {
        match self.variant {
            Variant::UnitH => 0.0,
            Variant::PowerExp { m, alpha, q } => {
                let base = if m == 0.0 { 0.0 } else { m * t.ln() };
                base + if alpha == 0.0 { 0.0 } else { alpha * t.powf(q) }
            }
            Variant::H4 { .. } => {
                let c4 = 4.0 * (self.p - 1.0) / (self.p * self.p);
                c4.ln() + (1.0 - 2.0 * self.p) * t.ln()
            }
        }
    }

    /// Blend value of `f` below the join (direct `f64`; magnitudes there
    /// are moderate by construction).
    fn f_blend(&self, t: f64) -> f64 {
        match self.blend {
            Blend::None => unreachable!("no blend region"),
            Blend::QuinticF { f0, a3, a4, a5 } => {
                let x = t / self.t_join;
                f0 + a3 * x.powi(3) + a4 * x.powi(4) + a5 * x.powi(5)
            }
            Blend::CubicH { h0, a2, a3 } => {
                let x = t / self.t_join;
                let h = h0 + a2 * x * x + a3 * x * x * x;
                h * t.powf(self.p).exp()
            }
        }
    }

    /// `log f(t)` as a signed log-space value. Never overflows for
    /// `t^p` up to about `1e8`.
    pub fn eval_log_f(&self, t: f64) -> Result<LogValue> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid_parameter(format!(
                "f is defined for t >= 0, got {t}"
            )));
        }
        if t >= self.t_join {
            // Closed form. At t = 0 a plain power h gives h(0) = 0 for
            // m > 0 and h(0) = 1 for m = 0; handle the limit explicitly.
            if t == 0.0 {
                return Ok(match self.variant {
                    Variant::UnitH => LogValue::ONE,
                    Variant::PowerExp { m, .. } => {
                        if m > 0.0 {
                            LogValue::ZERO
                        } else {
                            LogValue::ONE
                        }
                    }
                    Variant::H4 { .. } => unreachable!("H4 always blends below tau0 > 0"),
                });
            }
            return Ok(LogValue::from_log(self.log_h_closed(t) + t.powf(self.p)));
        }
        Ok(LogValue::from_f64(self.f_blend(t)))
    }

    /// `log f'(t)` as a signed log-space value, assembled from the
    /// factorization `f'(t) = p t^{p-1} h(t) (1 + h'(t)/(p t^{p-1} h(t)))
    /// exp(t^p)` in the closed-form region and from the blend polynomial
    /// below the join.
    pub fn eval_log_f_prime(&self, t: f64) -> Result<LogValue> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid_parameter(format!(
                "f' is evaluated for t > 0, got {t}"
            )));
        }
        if t >= self.t_join {
            let log_main =
                self.p.ln() + (self.p - 1.0) * t.ln() + self.log_h_closed(t) + t.powf(self.p);
            let correction = 1.0 + self.h_ratio_over_p(t);
            return Ok(LogValue::from_log(log_main).mul(LogValue::from_f64(correction)));
        }
        match self.blend {
            Blend::None => unreachable!(),
            Blend::QuinticF { a3, a4, a5, .. } => {
                let x = t / self.t_join;
                let dfdx = 3.0 * a3 * x * x + 4.0 * a4 * x.powi(3) + 5.0 * a5 * x.powi(4);
                Ok(LogValue::from_f64(dfdx / self.t_join))
            }
            Blend::CubicH { h0, a2, a3 } => {
                let x = t / self.t_join;
                let h = h0 + a2 * x * x + a3 * x * x * x;
                let dh = (2.0 * a2 * x + 3.0 * a3 * x * x) / self.t_join;
                let direct = dh + h * self.p * t.powf(self.p - 1.0);
                Ok(LogValue::from_f64(direct).mul(LogValue::from_log(t.powf(self.p))))
            }
        }
    }

    /// `h'(t) / (p t^{p-1} h(t))` in the closed-form region.
    fn h_ratio_over_p(&self, t: f64) -> f64 {
        self.h1_ratio_closed(t) / self.p
    }

    /// `h'(t) / (t^{p-1} h(t))` in the closed-form region.
    fn h1_ratio_closed(&self, t: f64) -> f64 {
        match self.variant {
            Variant::UnitH => 0.0,
            Variant::PowerExp { m, alpha, q } => {
                (m / t + alpha * q * t.powf(q - 1.0)) / t.powf(self.p - 1.0)
            }
            Variant::H4 { .. } => (1.0 - 2.0 * self.p) / t.powf(self.p),
        }
    }

    /// Logarithmic derivative `(log f)'(t) = f'(t)/f(t)`, computed from
    /// closed forms (no cancellation). Used by the series start of the
    /// radial integrator.
    pub fn dlogf_dt(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid_parameter(format!(
                "(log f)' is evaluated for t > 0, got {t}"
            )));
        }
        if t >= self.t_join {
            let h_part = match self.variant {
                Variant::UnitH => 0.0,
                Variant::PowerExp { m, alpha, q } => m / t + alpha * q * t.powf(q - 1.0),
                Variant::H4 { .. } => (1.0 - 2.0 * self.p) / t,
            };
            return Ok(h_part + self.p * t.powf(self.p - 1.0));
        }
        match self.blend {
            Blend::None => unreachable!(),
            Blend::QuinticF { f0, a3, a4, a5 } => {
                let x = t / self.t_join;
                let f = f0 + a3 * x.powi(3) + a4 * x.powi(4) + a5 * x.powi(5);
                let dfdx = 3.0 * a3 * x * x + 4.0 * a4 * x.powi(3) + 5.0 * a5 * x.powi(4);
                Ok(dfdx / (self.t_join * f))
            }
            Blend::CubicH { h0, a2, a3 } => {
                let x = t / self.t_join;
                let h = h0 + a2 * x * x + a3 * x * x * x;
                let dh = (2.0 * a2 * x + 3.0 * a3 * x * x) / self.t_join;
                Ok(dh / h + self.p * t.powf(self.p - 1.0))
            }
        }
    }

    /// Primitive `F(t) = int_0^t f(s) ds` by adaptive quadrature, only in
    /// the directly representable range (`t^p <= 700` and `f` within `f64`).
    pub fn primitive(&self, t: f64, rel_tol: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid_parameter(format!(
                "F is defined for t >= 0, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if t.powf(self.p) > 700.0 {
            return Err(Error::range_overflow(format!(
                "t^p = {:.3e} exceeds the direct-representation bound 700",
                t.powf(self.p)
            )));
        }
        // The integrand is largest at the right endpoint or at the join;
        // reject if either leaves f64 range.
        for probe in [t, self.t_join.min(t)] {
            let lf = self.eval_log_f(probe)?;
            if lf.sign != 0 && lf.log_abs > 700.0 {
                return Err(Error::range_overflow(format!(
                    "log f({probe}) = {:.3} exceeds the direct-representation bound",
                    lf.log_abs
                )));
            }
        }
        let f = |s: f64| self.eval_log_f(s).map(LogValue::to_f64).unwrap_or(f64::NAN);
        // Split at the join so each panel sees a smooth integrand.
        if self.t_join > 0.0 && t > self.t_join {
            Ok(quad::integrate(f, 0.0, self.t_join, rel_tol)?
                + quad::integrate(f, self.t_join, t, rel_tol)?)
        } else {
            quad::integrate(f, 0.0, t, rel_tol)
        }
    }

    /// Growth ratio `h'(t) / (t^{p-1} h(t))`, the quantity whose decay to
    /// zero distinguishes `h` from the dominant `exp(t^p)` factor.
    pub fn h1_ratio(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid_parameter(format!(
                "growth ratio needs t > 0, got {t}"
            )));
        }
        if t >= self.t_join {
            return Ok(self.h1_ratio_closed(t));
        }
        match self.blend {
            Blend::None => unreachable!(),
            Blend::QuinticF { .. } => {
                // Below the join h = f exp(-t^p), so
                // h'/h = (log f)' - p t^{p-1}.
                let d = self.dlogf_dt(t)? - self.p * t.powf(self.p - 1.0);
                Ok(d / t.powf(self.p - 1.0))
            }
            Blend::CubicH { h0, a2, a3 } => {
                let x = t / self.t_join;
                let h = h0 + a2 * x * x + a3 * x * x * x;
                let dh = (2.0 * a2 * x + 3.0 * a3 * x * x) / self.t_join;
                Ok(dh / (h * t.powf(self.p - 1.0)))
            }
        }
    }

    /// Evaluate the growth ratio on a grid and flag failure of `|ratio|`
    /// to decrease toward zero.
    pub fn check_h1(&self, t_grid: &[f64]) -> Result<H1Report> {
        if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.iter().any(|&t| t <= 0.0) {
            return Err(Error::invalid_parameter(
                "growth-ratio grid must be positive and increasing",
            ));
        }
        let mut ratios = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            ratios.push(self.h1_ratio(t)?);
        }
        let decays = ratios.windows(2).all(|w| w[1].abs() <= w[0].abs() + 1e-15);
        Ok(H1Report {
            t: t_grid.to_vec(),
            ratio: ratios,
            decays,
        })
    }
}

/// Growth-ratio diagnostic across a grid.
#[derive(Debug, Clone)]
pub struct H1Report {
    pub t: Vec<f64>,
    pub ratio: Vec<f64>,
    /// True when `|ratio|` is nonincreasing along the grid.
    pub decays: bool,
}

/// Reject blends that dip to zero or below anywhere on `[0, 1]`.
fn check_blend_positive<F: Fn(f64) -> f64>(blend: F) -> Result<()> {
    for i in 0..=1000 {
        let x = i as f64 / 1000.0;
        let v = blend(x);
        if !(v > 0.0) {
            return Err(Error::invalid_parameter(format!(
                "smooth cap is nonpositive at x = {x}: {v}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(p: f64) -> NonlinearitySpec {
        NonlinearitySpec::new(p, Variant::UnitH).unwrap()
    }

    fn h4(p: f64, tau0: f64) -> NonlinearitySpec {
        NonlinearitySpec::new(p, Variant::H4 { tau0 }).unwrap()
    }

    #[test]
    fn log_f_matches_hand_values() {
        // f = e^{t^p}: log f(0) = 0.
        assert_eq!(unit(1.0).eval_log_f(0.0).unwrap().to_f64(), 1.0);
        // t^{1-2p} family at p=3, tau0=1, t=2: log(8/9) - 5 log 2 + 8.
        let lf = h4(3.0, 1.0).eval_log_f(2.0).unwrap();
        assert!((lf.log_abs - 4.416_481_061_543_890).abs() < 1e-12);
        assert_eq!(lf.sign, 1);
        // h = t at p=2, t=3: log 3 + 9.
        let spec = NonlinearitySpec::new(
            2.0,
            Variant::PowerExp {
                m: 1.0,
                alpha: 0.0,
                q: 1.0,
            },
        )
        .unwrap();
        let lf = spec.eval_log_f(3.0).unwrap();
        assert!((lf.log_abs - (3.0_f64.ln() + 9.0)).abs() < 1e-12);
    }

    #[test]
    fn log_f_survives_huge_exponents() {
        // t^p = 10^8: far beyond f64, fine in log space.
        let spec = unit(4.0);
        let lf = spec.eval_log_f(100.0).unwrap();
        assert!((lf.log_abs - 1e8).abs() < 1.0);
    }

    #[test]
    fn log_f_prime_matches_hand_values() {
        // f = e^t: f'(1) = e.
        let lf = unit(1.0).eval_log_f_prime(1.0).unwrap();
        assert!((lf.log_abs - 1.0).abs() < 1e-14 && lf.sign == 1);
        // f = e^{t^2}: f'(2) = 4 e^4.
        let lf = unit(2.0).eval_log_f_prime(2.0).unwrap();
        assert!((lf.log_abs - (4.0_f64.ln() + 4.0)).abs() < 1e-13);
    }

    #[test]
    fn log_f_prime_agrees_with_finite_differences() {
        // The cubic cap is only C^1, so keep stencils off its join point;
        // the quintic (C^2) and smooth variants are checked across theirs.
        let cases: [(NonlinearitySpec, &[f64]); 3] = [
            (h4(3.0, 1.0), &[0.3, 0.9, 1.0, 2.0, 3.5]),
            (unit(2.0), &[0.3, 1.0, 2.0, 3.5]),
            (
                NonlinearitySpec::new(
                    3.0,
                    Variant::PowerExp {
                        m: -2.0,
                        alpha: 0.5,
                        q: 1.0,
                    },
                )
                .unwrap(),
                &[0.3, 0.9, 2.0, 3.5],
            ),
        ];
        for (spec, ts) in &cases {
            for &t in *ts {
                let h = 1e-6 * t;
                let up = spec.eval_log_f(t + h).unwrap();
                let dn = spec.eval_log_f(t - h).unwrap();
                let fd = up.sub(dn).div(LogValue::from_f64(2.0 * h));
                let an = spec.eval_log_f_prime(t).unwrap();
                let rel = an.sub(fd).div(an.abs()).to_f64().abs();
                assert!(rel < 1e-6, "t = {t}: analytic/fd mismatch {rel:.3e}");
            }
        }
    }

    #[test]
    fn dlogf_dt_matches_f_prime_over_f() {
        let specs = [h4(3.0, 1.0), unit(1.0)];
        for spec in &specs {
            for &t in &[0.4, 1.0, 1.7, 4.0] {
                let direct = spec.dlogf_dt(t).unwrap();
                let ratio = spec
                    .eval_log_f_prime(t)
                    .unwrap()
                    .div(spec.eval_log_f(t).unwrap())
                    .to_f64();
                assert!(
                    (direct - ratio).abs() <= 1e-9 * (1.0 + direct.abs()),
                    "t = {t}: {direct} vs {ratio}"
                );
            }
        }
    }

    #[test]
    fn h4_blend_joins_smoothly_and_stays_positive() {
        let spec = h4(3.0, 1.0);
        // Value and slope continuity across tau0.
        let eps = 1e-7;
        let below = spec.eval_log_f(1.0 - eps).unwrap().log_abs;
        let above = spec.eval_log_f(1.0 + eps).unwrap().log_abs;
        assert!((below - above).abs() < 1e-6);
        let d_below = spec.dlogf_dt(1.0 - eps).unwrap();
        let d_above = spec.dlogf_dt(1.0 + eps).unwrap();
        assert!((d_below - d_above).abs() < 1e-5);
        // Quintic blend value at 0: half the join value of f.
        let f0 = spec.eval_log_f(0.0).unwrap().to_f64();
        let fj = spec.eval_log_f(1.0).unwrap().to_f64();
        assert!((f0 - 1.208_125_257_092_908_9).abs() < 1e-13);
        assert!((2.0 * f0 - fj).abs() < 1e-13);
        // Positivity across the blend.
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            assert!(spec.eval_log_f(t).unwrap().to_f64() > 0.0);
        }
    }

    #[test]
    fn h4_second_derivative_is_continuous_at_the_join() {
        let spec = h4(3.0, 1.0);
        let eps = 1e-4;
        // Central second difference of f on each side of tau0 = 1.
        let f = |t: f64| spec.eval_log_f(t).unwrap().to_f64();
        let below = (f(1.0 - 3.0 * eps) - 2.0 * f(1.0 - 2.0 * eps) + f(1.0 - eps)) / (eps * eps);
        let above = (f(1.0 + eps) - 2.0 * f(1.0 + 2.0 * eps) + f(1.0 + 3.0 * eps)) / (eps * eps);
        assert!(
            (below - above).abs() < 1e-2 * (1.0 + below.abs()),
            "f'' jumps across the join: {below} vs {above}"
        );
    }

    #[test]
    fn primitive_matches_closed_forms() {
        // f = e^t: F(1) = e - 1.
        let v = unit(1.0).primitive(1.0, 1e-12).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        // F(0) = 0 for any spec.
        assert_eq!(h4(3.0, 1.0).primitive(0.0, 1e-10).unwrap(), 0.0);
        // f = e^{t^2}: F(1) from an independent 30-digit evaluation.
        let v = unit(2.0).primitive(1.0, 1e-12).unwrap();
        assert!((v - 1.462_651_745_907_181_6).abs() < 1e-12);
    }

    #[test]
    fn primitive_is_increasing_and_range_gated() {
        let spec = h4(3.0, 1.0);
        let mut prev = 0.0;
        for i in 1..=20 {
            let t = i as f64 * 0.2;
            let v = spec.primitive(t, 1e-10).unwrap();
            assert!(v > prev);
            prev = v;
        }
        // t^p > 700 must be rejected, not silently overflowed.
        let err = spec.primitive(10.0, 1e-10).unwrap_err();
        assert_eq!(err.code, crate::error::ErrorCode::RangeOverflow);
    }

    #[test]
    fn growth_ratio_matches_closed_forms() {
        // h == 1: ratio identically zero.
        assert_eq!(unit(2.0).h1_ratio(5.0).unwrap(), 0.0);
        // h = t, p = 2: ratio = 1/t^2 = 1e-4 at t = 100.
        let spec = NonlinearitySpec::new(
            2.0,
            Variant::PowerExp {
                m: 1.0,
                alpha: 0.0,
                q: 1.0,
            },
        )
        .unwrap();
        assert!((spec.h1_ratio(100.0).unwrap() - 1e-4).abs() < 1e-18);
        // h = c t^{1-2p}, p = 3: ratio = (1-2p)/t^p = -5/1000 at t = 10.
        assert!((h4(3.0, 1.0).h1_ratio(10.0).unwrap() + 0.005).abs() < 1e-15);
    }

    #[test]
    fn growth_ratio_decays_on_the_standard_grid() {
        for spec in [
            h4(3.0, 1.0),
            NonlinearitySpec::new(
                3.0,
                Variant::PowerExp {
                    m: 2.0,
                    alpha: 1.0,
                    q: 1.5,
                },
            )
            .unwrap(),
        ] {
            let report = spec.check_h1(&[10.0, 20.0, 50.0]).unwrap();
            assert!(report.decays, "{:?}", report.ratio);
            assert!(report.ratio.last().unwrap().abs() < report.ratio[0].abs());
        }
    }

    #[test]
    fn log_derivative_approaches_leading_exponent() {
        // (log f)' - p t^{p-1} -> 0 relative to p t^{p-1} as t grows.
        let spec = h4(3.0, 1.0);
        let gap = |t: f64| {
            let lead = 3.0 * t * t;
            (spec.dlogf_dt(t).unwrap() - lead).abs() / lead
        };
        assert!(gap(50.0) < gap(10.0));
        assert!(gap(50.0) < 1e-4);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(NonlinearitySpec::new(0.0, Variant::UnitH).is_err());
        assert!(NonlinearitySpec::new(-1.0, Variant::UnitH).is_err());
        assert!(NonlinearitySpec::new(1.0, Variant::H4 { tau0: 1.0 }).is_err());
        assert!(NonlinearitySpec::new(3.0, Variant::H4 { tau0: 0.0 }).is_err());
        // Inner exponent must stay below p when active.
        assert!(NonlinearitySpec::new(
            2.0,
            Variant::PowerExp {
                m: 1.0,
                alpha: 0.5,
                q: 2.5
            }
        )
        .is_err());
        // ... but is ignored when alpha = 0.
        assert!(NonlinearitySpec::new(
            2.0,
            Variant::PowerExp {
                m: 1.0,
                alpha: 0.0,
                q: 7.0
            }
        )
        .is_ok());
        assert!(unit(1.0).eval_log_f(-0.5).is_err());
        assert!(unit(1.0).eval_log_f_prime(0.0).is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let specs = [
            unit(1.0),
            h4(3.0, 1.0),
            NonlinearitySpec::new(
                3.0,
                Variant::PowerExp {
                    m: -2.0,
                    alpha: 0.0,
                    q: 1.0,
                },
            )
            .unwrap(),
        ];
        for spec in &specs {
            let json = serde_json::to_string(&spec.to_params()).unwrap();
            let parsed: SpecParams = serde_json::from_str(&json).unwrap();
            let back = NonlinearitySpec::from_params(&parsed).unwrap();
            assert_eq!(*spec, back);
        }
        // Unknown keys are rejected.
        assert!(
            serde_json::from_str::<SpecParams>(r#"{"p":3.0,"variant":"h4","bogus":1}"#).is_err()
        );
    }
}
