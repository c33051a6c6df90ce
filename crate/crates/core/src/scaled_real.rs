//! Signed log-magnitude reals.
//!
//! A [`ScaledReal`] stores `sign * exp(ln_mag)`. Weights such as `(1 - x)^alpha`
//! with `alpha = 1e5` and orthonormal polynomial values of reciprocal size can
//! be multiplied and added without leaving the native range.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Relative residual below which a subtraction is rounded to exact zero.
pub const CANCELLATION_EPS: f64 = 1e-15;

/// Largest `ln_mag` that still converts to a finite `f64`.
pub const LN_F64_MAX: f64 = 709.782_712_893_384;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledReal {
    sign: i8,
    ln_mag: f64,
}

impl ScaledReal {
    pub const ZERO: ScaledReal = ScaledReal { sign: 0, ln_mag: 0.0 };
    pub const ONE: ScaledReal = ScaledReal { sign: 1, ln_mag: 0.0 };

    /// Builds a value from its parts. `sign` is clamped to {-1, 0, +1}; a
    /// `ln_mag` of `-inf` is the same as zero.
    pub fn new(sign: i8, ln_mag: f64) -> Self {
        if sign == 0 || ln_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign: sign.signum(), ln_mag }
        }
    }

    pub fn from_ln(ln_mag: f64) -> Self {
        Self::new(1, ln_mag)
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self::new(if v < 0.0 { -1 } else { 1 }, v.abs().ln())
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.ln_mag
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        Self::new(self.sign.abs(), self.ln_mag)
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero ScaledReal");
        Self::new(self.sign, -self.ln_mag)
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        let sign = if n % 2 == 0 { 1 } else { self.sign };
        Self::new(sign, self.ln_mag * n as f64)
    }

    /// Multiplies by `exp(ln_factor)`.
    pub fn scale_ln(self, ln_factor: f64) -> Self {
        Self::new(self.sign, self.ln_mag + ln_factor)
    }

    /// Converts to a native float, or reports overflow.
    pub fn to_f64(&self) -> Result<f64> {
        if self.sign == 0 {
            return Ok(0.0);
        }
        if self.ln_mag > LN_F64_MAX {
            return Err(Error::Overflow { ln_mag: self.ln_mag });
        }
        Ok(self.sign as f64 * self.ln_mag.exp())
    }

    /// Like [`to_f64`](Self::to_f64) but saturates to `±inf` (and silently
    /// underflows to zero).
    pub fn to_f64_saturating(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.ln_mag.exp()
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            Self::ZERO
        } else {
            Self::new(self.sign * other.sign, self.ln_mag + other.ln_mag)
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_mag >= other.ln_mag {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.ln_mag - big.ln_mag).exp();
        if big.sign == small.sign {
            Self::new(big.sign, big.ln_mag + ratio.ln_1p())
        } else {
            let residual = 1.0 - ratio;
            if residual <= CANCELLATION_EPS {
                Self::ZERO
            } else {
                Self::new(big.sign, big.ln_mag + (-ratio).ln_1p())
            }
        }
    }

    /// Sum of many terms, factoring the largest magnitude out once.
    pub fn sum<I: IntoIterator<Item = ScaledReal>>(terms: I) -> Self {
        let terms: Vec<ScaledReal> = terms.into_iter().filter(|t| t.sign != 0).collect();
        let Some(max_ln) = terms.iter().map(|t| t.ln_mag).reduce(f64::max) else {
            return Self::ZERO;
        };
        let mut acc = 0.0;
        let mut scale = 0.0;
        for t in &terms {
            let v = t.sign as f64 * (t.ln_mag - max_ln).exp();
            acc += v;
            scale += v.abs();
        }
        if acc.abs() <= CANCELLATION_EPS * scale {
            Self::ZERO
        } else {
            Self::from_f64(acc).scale_ln(max_ln)
        }
    }

    /// Relative difference of the magnitudes' logs, for approximate comparisons.
    pub fn ln_rel_diff(&self, other: &Self) -> f64 {
        if self.sign != other.sign {
            return f64::INFINITY;
        }
        if self.sign == 0 {
            return 0.0;
        }
        let d = (self.ln_mag - other.ln_mag).abs();
        d / self.ln_mag.abs().max(other.ln_mag.abs()).max(1.0)
    }
}

impl Default for ScaledReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for ScaledReal {
    fn from(v: f64) -> Self {
        Self::from_f64(v)
    }
}

impl Neg for ScaledReal {
    type Output = ScaledReal;
    fn neg(self) -> ScaledReal {
        Self::new(-self.sign, self.ln_mag)
    }
}

impl Mul for ScaledReal {
    type Output = ScaledReal;
    fn mul(self, rhs: ScaledReal) -> ScaledReal {
        ScaledReal::mul(self, rhs)
    }
}

impl Mul<f64> for ScaledReal {
    type Output = ScaledReal;
    fn mul(self, rhs: f64) -> ScaledReal {
        ScaledReal::mul(self, ScaledReal::from_f64(rhs))
    }
}

impl Div for ScaledReal {
    type Output = ScaledReal;
    fn div(self, rhs: ScaledReal) -> ScaledReal {
        ScaledReal::mul(self, rhs.recip())
    }
}

impl Add for ScaledReal {
    type Output = ScaledReal;
    fn add(self, rhs: ScaledReal) -> ScaledReal {
        ScaledReal::add(self, rhs)
    }
}

impl Sub for ScaledReal {
    type Output = ScaledReal;
    fn sub(self, rhs: ScaledReal) -> ScaledReal {
        ScaledReal::add(self, -rhs)
    }
}

impl PartialOrd for ScaledReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let key = |v: &ScaledReal| -> (i8, f64) {
            match v.sign {
                0 => (0, 0.0),
                1 => (1, v.ln_mag),
                _ => (-1, -v.ln_mag),
            }
        };
        let (sa, la) = key(self);
        let (sb, lb) = key(other);
        match sa.cmp(&sb) {
            Ordering::Equal => la.partial_cmp(&lb),
            o => Some(o),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn mul_examples() {
        let p = ScaledReal::from_ln(2f64.ln()) * ScaledReal::from_ln(3f64.ln());
        assert_eq!(p.sign(), 1);
        assert_relative_eq!(p.ln_abs(), 6f64.ln(), max_relative = 1e-15);

        let m = ScaledReal::new(-1, 0.0) * ScaledReal::new(1, 0.0);
        assert_eq!(m.to_f64().unwrap(), -1.0);

        assert!((ScaledReal::ZERO * ScaledReal::from_ln(100.0)).is_zero());
    }

    #[test]
    fn add_examples() {
        let s = ScaledReal::from_ln(3f64.ln()) + ScaledReal::from_ln(0.0);
        assert_relative_eq!(s.ln_abs(), 4f64.ln(), max_relative = 1e-15);

        let c = ScaledReal::new(1, 500.0) + ScaledReal::new(-1, 500.0);
        assert!(c.is_zero());

        let d = ScaledReal::new(1, 500.0) + ScaledReal::new(1, 0.0);
        assert_eq!(d.sign(), 1);
        assert_eq!(d.ln_abs(), 500.0);
    }

    #[test]
    fn to_f64_examples() {
        assert_eq!(ScaledReal::new(1, 0.0).to_f64().unwrap(), 1.0);
        assert_relative_eq!(ScaledReal::new(-1, 2f64.ln()).to_f64().unwrap(), -2.0, max_relative = 1e-15);
        assert!(matches!(ScaledReal::new(1, 10_000.0).to_f64(), Err(Error::Overflow { .. })));
        assert_eq!(ScaledReal::new(1, 10_000.0).to_f64_saturating(), f64::INFINITY);
    }

    #[test]
    fn near_cancellation_rounds_to_zero() {
        let a = ScaledReal::from_f64(1.0);
        let b = ScaledReal::from_f64(-(1.0 - 1e-16));
        assert!((a + b).is_zero());
        let c = ScaledReal::from_f64(-(1.0 - 1e-12));
        assert_relative_eq!((a + c).to_f64().unwrap(), 1e-12, max_relative = 1e-3);
    }

    #[test]
    fn sum_matches_pairwise() {
        let terms = [3.5, -1.25, 1e-3, 7.0].map(ScaledReal::from_f64);
        let s = ScaledReal::sum(terms);
        assert_relative_eq!(s.to_f64().unwrap(), 9.251, max_relative = 1e-14);
        assert!(ScaledReal::sum([2.0, -2.0].map(ScaledReal::from_f64)).is_zero());
    }

    #[test]
    fn ordering() {
        let a = ScaledReal::from_f64(-3.0);
        let b = ScaledReal::ZERO;
        let c = ScaledReal::new(1, 800.0);
        assert!(a < b && b < c);
        assert!(ScaledReal::from_f64(-5.0) < a);
    }

    fn arb_scaled() -> impl Strategy<Value = ScaledReal> {
        (prop_oneof![Just(-1i8), Just(1i8)], -700.0f64..700.0).prop_map(|(s, l)| ScaledReal::new(s, l))
    }

    fn close(a: ScaledReal, b: ScaledReal, tol: f64) -> bool {
        if a.is_zero() || b.is_zero() {
            return a.is_zero() && b.is_zero();
        }
        a.sign() == b.sign() && a.ln_rel_diff(&b) <= tol
    }

    proptest! {
        #[test]
        fn add_is_associative(
            a in (-700.0f64..700.0), b in (-700.0f64..700.0), c in (-700.0f64..700.0)
        ) {
            // same-sign operands; mixed signs may cancel to zero
            let (a, b, c) = (ScaledReal::from_ln(a), ScaledReal::from_ln(b), ScaledReal::from_ln(c));
            prop_assert!(close((a + b) + c, a + (b + c), 1e-12));
        }

        #[test]
        fn mul_distributes(a in arb_scaled(), b in (-700.0f64..700.0), c in (-700.0f64..700.0)) {
            let (b, c) = (ScaledReal::from_ln(b), ScaledReal::from_ln(c));
            prop_assert!(close(a * (b + c), a * b + a * c, 1e-12));
        }

        // exp(ln|v|) carries about |ln v| ulps of error, so keep |ln v| modest
        #[test]
        fn matches_native(
            x in prop_oneof![-1e10f64..-1e-10, 1e-10f64..1e10],
            y in prop_oneof![-1e10f64..-1e-10, 1e-10f64..1e10],
        ) {
            let (sx, sy) = (ScaledReal::from_f64(x), ScaledReal::from_f64(y));
            let prod = (sx * sy).to_f64().unwrap();
            prop_assert!((prod - x * y).abs() <= 1e-14 * (x * y).abs());
            if x.signum() == y.signum() {
                let sum = (sx + sy).to_f64().unwrap();
                prop_assert!((sum - (x + y)).abs() <= 1e-14 * (x + y).abs());
            }
        }

        #[test]
        fn round_trip(l in -700.0f64..700.0, s in prop_oneof![Just(-1i8), Just(1i8)]) {
            let v = ScaledReal::new(s, l);
            let back = ScaledReal::from_f64(v.to_f64().unwrap());
            prop_assert!((back.ln_abs() - l).abs() <= 1e-14 * l.abs().max(1.0));
        }
    }
}
