//! Numeric abstraction shared by the instrumentation and analysis code.
//!
//! Every quantity the detectors compute is a finite sum of ratios of small
//! counts, so the same code runs over `f64` for speed and over
//! [`BigRational`] when an assertion has to be exact.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Num, Signed, ToPrimitive};

/// A signed field element usable by the detectors and the error recurrence.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Converts a binary float. Exact types take the exact binary value.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn from_count(k: usize) -> Self {
        Self::from_ratio(k as i64, 1)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite threshold")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Small-denominator rationals. Panics on overflow, so only suitable for
/// short sums over small palettes.
impl Scalar for Rational64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational64::new(num, den)
    }
    fn from_f64(x: f64) -> Self {
        Rational64::approximate_float(x).expect("representable threshold")
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// An unreduced ratio of two counts, the raw form of every conditional
/// probability recorded in a trace (`q_i`, `p_i(S)`). Equality and order
/// compare values, so `0/5 == 0/1`.
#[derive(Clone, Copy, Debug)]
pub struct Fraction {
    pub num: u32,
    pub den: u32,
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    /// `num / den`, with the convention that an empty denominator yields 0.
    pub fn new(num: usize, den: usize) -> Self {
        if den == 0 {
            Self::ZERO
        } else {
            Fraction {
                num: num as u32,
                den: den as u32,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_scalar<T: Scalar>(self) -> T {
        T::from_ratio(self.num as i64, self.den as i64)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        self.num as u64 * other.den as u64 == other.num as u64 * self.den as u64
    }
}

impl Eq for Fraction {}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        let lhs = self.num as u64 * other.den as u64;
        let rhs = other.num as u64 * self.den as u64;
        Some(lhs.cmp(&rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_conventions() {
        assert_eq!(Fraction::new(3, 0), Fraction::ZERO);
        assert_eq!(Fraction::new(1, 3).to_scalar::<BigRational>(), BigRational::from_ratio(1, 3));
        assert!(Fraction::new(1, 2) == Fraction::new(1, 2));
        assert!(Fraction::new(1, 3) < Fraction::new(1, 2));
        assert_eq!(
            Fraction::new(2, 4).partial_cmp(&Fraction::new(1, 2)),
            Some(std::cmp::Ordering::Equal)
        );
    }

    #[test]
    fn scalar_roundtrips() {
        assert_eq!(<f64 as Scalar>::from_ratio(1, 4), 0.25);
        assert_eq!(<BigRational as Scalar>::from_f64(0.25), BigRational::from_ratio(1, 4));
        assert_eq!(Scalar::to_f64(&Rational64::new(3, 4)), 0.75);
        assert_eq!(5.0f64.max_of(7.0), 7.0);
        assert_eq!(5.0f64.min_of(7.0), 5.0);
    }
}
