//! Nonnegative reals stored by their natural logarithm.
//!
//! Moments on the Wiegerinck domains grow like `e^{4k+4}`, so every moment in
//! this crate travels as a [`LogValue`]. Zero is represented by a log of `-inf`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Stable `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Stable `log(sum(exp(values)))`; `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    log: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log: f64::NEG_INFINITY,
    };
    pub const ONE: LogValue = LogValue { log: 0.0 };

    /// Wraps a logarithm. NaN and `+inf` are rejected.
    pub fn from_log(log: f64) -> Self {
        assert!(
            !log.is_nan() && log != f64::INFINITY,
            "LogValue requires a log in [-inf, +inf), got {log}"
        );
        LogValue { log }
    }

    pub fn from_value(value: f64) -> Self {
        assert!(value >= 0.0, "LogValue requires a nonnegative value, got {value}");
        LogValue::from_log(value.ln())
    }

    pub fn ln(self) -> f64 {
        self.log
    }

    /// The plain value; overflows to `+inf` past `log ≈ 709.78`.
    pub fn value(self) -> f64 {
        self.log.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log == f64::NEG_INFINITY
    }

    /// `self / other` as a plain real, computed as one exponential of a log difference.
    pub fn ratio(self, other: LogValue) -> f64 {
        assert!(!other.is_zero(), "ratio by a zero LogValue");
        if self.is_zero() {
            return 0.0;
        }
        (self.log - other.log).exp()
    }

    /// `self - other`, or `None` when the difference would be negative.
    pub fn checked_sub(self, other: LogValue) -> Option<LogValue> {
        match self.log.partial_cmp(&other.log)? {
            Ordering::Less => None,
            Ordering::Equal => Some(LogValue::ZERO),
            Ordering::Greater if other.is_zero() => Some(self),
            Ordering::Greater => {
                let d = other.log - self.log;
                Some(LogValue::from_log(self.log + (-d.exp_m1()).ln()))
            }
        }
    }

    pub fn powi(self, n: i32) -> LogValue {
        if n == 0 {
            return LogValue::ONE;
        }
        LogValue::from_log(self.log * n as f64)
    }

    pub fn scale(self, factor: f64) -> LogValue {
        self * LogValue::from_value(factor)
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        LogValue::from_log(log_add_exp(self.log, rhs.log))
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            return LogValue::ZERO;
        }
        LogValue::from_log(self.log + rhs.log)
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        assert!(!rhs.is_zero(), "division by a zero LogValue");
        if self.is_zero() {
            return LogValue::ZERO;
        }
        LogValue::from_log(self.log - rhs.log)
    }
}

impl Sum for LogValue {
    fn sum<I: Iterator<Item = LogValue>>(iter: I) -> LogValue {
        let logs: Vec<f64> = iter.map(LogValue::ln).collect();
        LogValue::from_log(log_sum_exp(&logs))
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.log.partial_cmp(&other.log)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.log)
    }
}

// Zero serializes as `null` so reports stay valid JSON.
impl Serialize for LogValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_zero() {
            s.serialize_none()
        } else {
            s.serialize_some(&self.log)
        }
    }
}

impl<'de> Deserialize<'de> for LogValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let log: Option<f64> = Option::deserialize(d)?;
        Ok(log.map_or(LogValue::ZERO, LogValue::from_log))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn add_does_not_overflow_at_large_logs() {
        let a = LogValue::from_log(1.0e6);
        let b = LogValue::from_log(1.0e6 - 1.0);
        let s = a + b;
        assert!((s.ln() - (1.0e6 + (1.0 + (-1.0f64).exp()).ln())).abs() < 1e-9);
    }

    #[test]
    fn zero_is_additive_identity() {
        let a = LogValue::from_value(3.5);
        assert_eq!(a + LogValue::ZERO, a);
        assert_eq!(LogValue::ZERO + a, a);
        assert!((LogValue::ZERO * a).is_zero());
    }

    #[test]
    fn checked_sub_rejects_negative() {
        let a = LogValue::from_value(2.0);
        let b = LogValue::from_value(5.0);
        assert!(a.checked_sub(b).is_none());
        let d = b.checked_sub(a).unwrap();
        assert!((d.value() - 3.0).abs() < 1e-14);
        assert!(a.checked_sub(a).unwrap().is_zero());
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [0.1f64, 2.0, 3.5];
        let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        assert!((log_sum_exp(&logs).exp() - 5.6).abs() < 1e-13);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn add_matches_plain_arithmetic(a in 0.0f64..1e6, b in 0.0f64..1e6) {
            let s = LogValue::from_value(a) + LogValue::from_value(b);
            prop_assert!((s.value() - (a + b)).abs() <= 1e-12 * (a + b).max(1e-300));
        }

        #[test]
        fn mul_div_are_exact_log_shifts(la in -700.0f64..700.0, lb in -700.0f64..700.0) {
            let a = LogValue::from_log(la);
            let b = LogValue::from_log(lb);
            prop_assert_eq!((a * b).ln(), la + lb);
            prop_assert_eq!((a / b).ln(), la - lb);
        }
    }
}
