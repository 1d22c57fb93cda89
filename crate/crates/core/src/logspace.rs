//! Signed log-space scalars.
//!
//! Quantities like `f(u) = h(u) exp(u^p)` overflow `f64` long before the
//! interesting parameter range is exhausted (`u^p` up to 300 means magnitudes
//! near `e^300 ~ 1.9e130` times a polynomial). All nonlinearity evaluation
//! therefore happens on the representation `x = sign * exp(log_abs)`, and
//! only final, provably moderate quantities are materialised as plain `f64`.

/// A real number stored as `sign * exp(log_abs)`.
///
/// `sign` is `-1`, `0`, or `1`; for `sign == 0` the `log_abs` field is
/// irrelevant and normalised to `f64::NEG_INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub log_abs: f64,
    pub sign: i8,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_abs: f64::NEG_INFINITY,
        sign: 0,
    };
    pub const ONE: LogValue = LogValue {
        log_abs: 0.0,
        sign: 1,
    };

    /// Build from an ordinary float.
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            LogValue::ZERO
        } else {
            LogValue {
                log_abs: x.abs().ln(),
                sign: if x > 0.0 { 1 } else { -1 },
            }
        }
    }

    /// Build a positive value directly from its natural log.
    pub fn from_log(log_abs: f64) -> Self {
        LogValue { log_abs, sign: 1 }
    }

    /// Materialise as `f64`. Overflows to `+-inf` and underflows to `0`
    /// exactly as `exp` would.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        LogValue {
            log_abs: self.log_abs,
            sign: self.sign.abs(),
        }
    }

    pub fn neg(self) -> Self {
        LogValue {
            log_abs: self.log_abs,
            sign: -self.sign,
        }
    }

    pub fn mul(self, other: LogValue) -> Self {
        let sign = self.sign * other.sign;
        if sign == 0 {
            LogValue::ZERO
        } else {
            LogValue {
                log_abs: self.log_abs + other.log_abs,
                sign,
            }
        }
    }

    pub fn div(self, other: LogValue) -> Self {
        debug_assert!(other.sign != 0, "log-space division by zero");
        let sign = self.sign * other.sign;
        if sign == 0 {
            LogValue::ZERO
        } else {
            LogValue {
                log_abs: self.log_abs - other.log_abs,
                sign,
            }
        }
    }

    /// Raise to a real power. Requires a nonnegative base for non-integer
    /// exponents; here the base is always a magnitude so we only support
    /// `sign >= 0`.
    pub fn powf(self, e: f64) -> Self {
        debug_assert!(self.sign >= 0, "powf of a negative log-space value");
        if self.sign == 0 {
            if e == 0.0 {
                LogValue::ONE
            } else {
                LogValue::ZERO
            }
        } else {
            LogValue {
                log_abs: self.log_abs * e,
                sign: 1,
            }
        }
    }

    /// Exact sum in log space via the usual `log-sum-exp` factoring.
    pub fn add(self, other: LogValue) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        // Factor out the larger magnitude: a + b = a * (1 + b/a).
        let (big, small) = if self.log_abs >= other.log_abs {
            (self, other)
        } else {
            (other, self)
        };
        let ratio =
            f64::from(small.sign) * f64::from(big.sign) * (small.log_abs - big.log_abs).exp();
        let inner = 1.0 + ratio;
        if inner == 0.0 {
            return LogValue::ZERO;
        }
        let sign = if inner > 0.0 { big.sign } else { -big.sign };
        LogValue {
            log_abs: big.log_abs + inner.abs().ln(),
            sign,
        }
    }

    pub fn sub(self, other: LogValue) -> Self {
        self.add(other.neg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn round_trips_ordinary_floats() {
        for &x in &[0.0, 1.0, -1.0, 3.5e-20, -2.75e17, f64::MIN_POSITIVE] {
            assert!(close(LogValue::from_f64(x).to_f64(), x, 1e-15), "x = {x}");
        }
    }

    #[test]
    fn arithmetic_matches_f64_in_range() {
        let a = LogValue::from_f64(3.25);
        let b = LogValue::from_f64(-0.5);
        assert!(close(a.mul(b).to_f64(), -1.625, 1e-15));
        assert!(close(a.div(b).to_f64(), -6.5, 1e-15));
        assert!(close(a.add(b).to_f64(), 2.75, 1e-15));
        assert!(close(a.sub(b).to_f64(), 3.75, 1e-15));
        assert!(close(a.powf(2.0).to_f64(), 10.5625, 1e-15));
    }

    #[test]
    fn handles_magnitudes_beyond_f64() {
        // e^800 * e^-790 = e^10; neither factor fits in f64.
        let big = LogValue::from_log(800.0);
        let tiny = LogValue::from_log(-790.0);
        assert!(close(big.mul(tiny).to_f64(), 10.0_f64.exp(), 1e-14));
        // Adding a negligible value leaves the log untouched.
        let sum = big.add(LogValue::from_f64(1.0));
        assert!(close(sum.log_abs, 800.0, 1e-15));
    }

    #[test]
    fn cancellation_produces_zero() {
        let a = LogValue::from_f64(7.0);
        assert!(a.sub(a).is_zero());
        assert_eq!(a.sub(a).to_f64(), 0.0);
    }

    #[test]
    fn zero_behaves_as_identity_and_annihilator() {
        let a = LogValue::from_f64(-4.0);
        assert_eq!(LogValue::ZERO.add(a).to_f64(), -4.0);
        assert!(LogValue::ZERO.mul(a).is_zero());
        assert!(LogValue::ZERO.powf(2.5).is_zero());
        assert_eq!(LogValue::ZERO.powf(0.0).to_f64(), 1.0);
    }
}
