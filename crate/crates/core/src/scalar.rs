//! Exact rational coefficient types.
//!
//! Amplitude arithmetic is generic over a rational field implementing
//! [`Rational`]. The default instantiation is arbitrary precision ([`num_rational::BigRational`]);
//! fixed-width ratios are available for callers that know their inputs stay small.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, Zero};

/// An exact ordered field of rational numbers.
pub trait Rational:
    Clone + Debug + Display + Ord + Hash + Signed + Send + Sync + 'static
{
    /// `num / den`. Panics when `den == 0`.
    fn ratio(num: i64, den: i64) -> Self;

    /// Parses a decimal integer literal (no sign, no fraction).
    fn from_decimal(digits: &str) -> Option<Self>;

    fn numer_is_one(&self) -> bool;

    /// True when the value is an integer.
    fn is_integral(&self) -> bool;

    fn denominator_is_even(&self) -> bool;

    /// `self / 2` as an exact value.
    fn halve(&self) -> Self {
        self.clone() / Self::ratio(2, 1)
    }
}

impl Rational for BigRational {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_decimal(digits: &str) -> Option<Self> {
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse::<BigInt>().ok().map(BigRational::from_integer)
    }

    fn numer_is_one(&self) -> bool {
        self.numer() == &BigInt::from(1)
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }

    fn denominator_is_even(&self) -> bool {
        (self.denom() % BigInt::from(2)).is_zero()
    }
}

macro_rules! impl_small_ratio {
    ($int:ty) => {
        impl Rational for Ratio<$int> {
            fn ratio(num: i64, den: i64) -> Self {
                Ratio::new(num as $int, den as $int)
            }

            fn from_decimal(digits: &str) -> Option<Self> {
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                digits.parse::<$int>().ok().map(Ratio::from_integer)
            }

            fn numer_is_one(&self) -> bool {
                *self.numer() == 1
            }

            fn is_integral(&self) -> bool {
                self.is_integer()
            }

            fn denominator_is_even(&self) -> bool {
                self.denom() % 2 == 0
            }
        }
    };
}

impl_small_ratio!(i64);
impl_small_ratio!(i128);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_reduced() {
        let r = BigRational::ratio(4, -8);
        assert_eq!(r, BigRational::ratio(-1, 2));
        assert!(r.denominator_is_even());
        assert!(!BigRational::ratio(1, 3).denominator_is_even());
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(
            BigRational::from_decimal("123456789012345678901234567890")
                .unwrap()
                .to_string(),
            "123456789012345678901234567890"
        );
        assert!(BigRational::from_decimal("12a").is_none());
        assert_eq!(Ratio::<i64>::from_decimal("42"), Some(Ratio::from_integer(42)));
    }
}
