//! Exact amplitudes in the cyclotomic field Q(ζ) with ζ = e^{iπ/4}.
//!
//! Q(ζ) is the smallest cyclotomic field containing both `i = ζ²` and
//! `√2 = ζ − ζ³`, which is enough for every amplitude the language needs
//! (Hadamard-style `1/√2` coefficients, phases `±1, ±i`). Elements are stored
//! as four rational coordinates over the power basis `{1, ζ, ζ², ζ³}`; the
//! relation `ζ⁴ = −1` is applied eagerly in multiplication, so the
//! representation is unique and equality is coordinate-wise.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmplitudeError {
    #[error("division by a zero amplitude")]
    DivisionByZero,
}

/// An element `c0 + c1 ζ + c2 ζ² + c3 ζ³` of Q(ζ₈).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cyclo8<Q> {
    coeffs: [Q; 4],
}

impl<Q: Rational> Cyclo8<Q> {
    pub fn new(c0: Q, c1: Q, c2: Q, c3: Q) -> Self {
        Cyclo8 {
            coeffs: [c0, c1, c2, c3],
        }
    }

    pub fn from_rational(r: Q) -> Self {
        Self::new(r, Q::zero(), Q::zero(), Q::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(Q::ratio(num, den))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// Builds `re + im·i + rs·√2 + is·i√2`.
    pub fn from_parts(re: Q, im: Q, rs: Q, is: Q) -> Self {
        // √2 = ζ − ζ³ and i√2 = ζ + ζ³
        let c1 = rs.clone() + is.clone();
        let c3 = is - rs;
        Self::new(re, c1, im, c3)
    }

    /// The primitive eighth root of unity ζ = (1 + i)/√2.
    pub fn zeta() -> Self {
        Self::new(Q::zero(), Q::one(), Q::zero(), Q::zero())
    }

    pub fn i() -> Self {
        Self::new(Q::zero(), Q::zero(), Q::one(), Q::zero())
    }

    pub fn sqrt2() -> Self {
        Self::new(Q::zero(), Q::one(), Q::zero(), -Q::one())
    }

    pub fn inv_sqrt2() -> Self {
        let half = Q::ratio(1, 2);
        Self::new(Q::zero(), half.clone(), Q::zero(), -half)
    }

    pub fn coeffs(&self) -> &[Q; 4] {
        &self.coeffs
    }

    /// Coordinates over `{1, i, √2, i√2}`: `(re, im, rs, is)`.
    pub fn parts(&self) -> (Q, Q, Q, Q) {
        let [c0, c1, c2, c3] = &self.coeffs;
        let rs = (c1.clone() - c3.clone()).halve();
        let is = (c1.clone() + c3.clone()).halve();
        (c0.clone(), c2.clone(), rs, is)
    }

    pub fn conj(&self) -> Self {
        // conj(ζ^k) = ζ^{8-k}: ζ ↦ −ζ³, ζ² ↦ −ζ², ζ³ ↦ −ζ
        let [c0, c1, c2, c3] = &self.coeffs;
        Self::new(c0.clone(), -c3.clone(), -c2.clone(), -c1.clone())
    }

    pub fn norm_sq(&self) -> Self {
        self.clone() * self.conj()
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    /// True when the amplitude is a rational number.
    pub fn as_rational(&self) -> Option<&Q> {
        let [c0, c1, c2, c3] = &self.coeffs;
        (c1.is_zero() && c2.is_zero() && c3.is_zero()).then_some(c0)
    }

    /// Image of `self` under the Galois automorphism `ζ ↦ ζ^k`, `k` odd.
    fn galois(&self, k: u8) -> Self {
        let [c0, c1, c2, c3] = &self.coeffs;
        match k % 8 {
            1 => self.clone(),
            3 => Self::new(c0.clone(), c3.clone(), -c2.clone(), c1.clone()),
            5 => Self::new(c0.clone(), -c1.clone(), c2.clone(), -c3.clone()),
            7 => self.conj(),
            _ => unreachable!("galois automorphisms of Q(ζ8) are indexed by odd k"),
        }
    }

    /// Field norm down to Q: the product of all four Galois conjugates.
    pub fn field_norm(&self) -> Q {
        let n = self.clone() * self.galois(3) * self.galois(5) * self.galois(7);
        n.as_rational()
            .cloned()
            .expect("field norm of a Q(ζ8) element is rational")
    }

    pub fn inverse(&self) -> Result<Self, AmplitudeError> {
        if self.is_zero() {
            return Err(AmplitudeError::DivisionByZero);
        }
        let cofactor = self.galois(3) * self.galois(5) * self.galois(7);
        let norm = self.field_norm();
        Ok(cofactor.scale(&(Q::one() / norm)))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, AmplitudeError> {
        Ok(self.clone() * rhs.inverse()?)
    }

    pub fn scale(&self, r: &Q) -> Self {
        let [c0, c1, c2, c3] = &self.coeffs;
        Self::new(
            c0.clone() * r.clone(),
            c1.clone() * r.clone(),
            c2.clone() * r.clone(),
            c3.clone() * r.clone(),
        )
    }
}

impl<Q: Rational> Zero for Cyclo8<Q> {
    fn zero() -> Self {
        Self::new(Q::zero(), Q::zero(), Q::zero(), Q::zero())
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

impl<Q: Rational> One for Cyclo8<Q> {
    fn one() -> Self {
        Self::from_rational(Q::one())
    }
}

impl<Q: Rational> Add for Cyclo8<Q> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let [a0, a1, a2, a3] = self.coeffs;
        let [b0, b1, b2, b3] = rhs.coeffs;
        Self::new(a0 + b0, a1 + b1, a2 + b2, a3 + b3)
    }
}

impl<Q: Rational> Sub for Cyclo8<Q> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<Q: Rational> Neg for Cyclo8<Q> {
    type Output = Self;

    fn neg(self) -> Self {
        let [a0, a1, a2, a3] = self.coeffs;
        Self::new(-a0, -a1, -a2, -a3)
    }
}

impl<Q: Rational> Mul for Cyclo8<Q> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut out: [Q; 4] = [Q::zero(), Q::zero(), Q::zero(), Q::zero()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let prod = a.clone() * b.clone();
                let k = i + j;
                // ζ⁴ = −1
                if k < 4 {
                    out[k] = out[k].clone() + prod;
                } else {
                    out[k - 4] = out[k - 4].clone() - prod;
                }
            }
        }
        let [c0, c1, c2, c3] = out;
        Self::new(c0, c1, c2, c3)
    }
}

impl<Q: Rational> AddAssign for Cyclo8<Q> {
    fn add_assign(&mut self, rhs: Self) {
        *self = self.clone() + rhs;
    }
}

impl<Q: Rational> SubAssign for Cyclo8<Q> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = self.clone() - rhs;
    }
}

impl<Q: Rational> MulAssign for Cyclo8<Q> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = self.clone() * rhs;
    }
}

impl<Q: Rational> std::iter::Sum for Cyclo8<Q> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

impl<Q: Rational> std::iter::Product for Cyclo8<Q> {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::one(), |acc, x| acc * x)
    }
}

/// Renders one `{1, i, √2, i√2}` coordinate. Output re-parses with the
/// amplitude literal grammar.
fn render_part<Q: Rational>(coef: &Q, unit: Unit) -> String {
    let negative = coef.is_negative();
    let mag = coef.abs();
    let sign = if negative { "-" } else { "" };
    match unit {
        Unit::One => format!("{sign}{mag}"),
        Unit::I => {
            if mag.is_one() {
                format!("{sign}i")
            } else {
                format!("{sign}{mag}*i")
            }
        }
        Unit::Sqrt2 | Unit::ISqrt2 => {
            let prefix = if matches!(unit, Unit::ISqrt2) { "i" } else { "" };
            if mag.denominator_is_even() {
                // (p/q)·√2 = p / ((q/2)·√2)
                // mag·√2 = 1/(k·√2) with k = 1/(2·mag)
                let k = (Q::one() / mag.clone()).halve();
                let head = if prefix.is_empty() { "1".to_string() } else { "i".to_string() };
                if k.is_one() {
                    format!("{sign}{head}/sqrt2")
                } else if k.is_integral() {
                    format!("{sign}{head}/({k}*sqrt2)")
                } else {
                    format!("{sign}{mag}*{}sqrt2", if prefix.is_empty() { "" } else { "i*" })
                }
            } else if mag.is_one() {
                format!("{sign}{}sqrt2", if prefix.is_empty() { "" } else { "i*" })
            } else {
                format!("{sign}{mag}*{}sqrt2", if prefix.is_empty() { "" } else { "i*" })
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Unit {
    One,
    I,
    Sqrt2,
    ISqrt2,
}

impl<Q: Rational> fmt::Display for Cyclo8<Q> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let (re, im, rs, is) = self.parts();
        let mut out = String::new();
        for (coef, unit) in [
            (re, Unit::One),
            (im, Unit::I),
            (rs, Unit::Sqrt2),
            (is, Unit::ISqrt2),
        ] {
            if coef.is_zero() {
                continue;
            }
            let part = render_part(&coef, unit);
            if out.is_empty() {
                out = part;
            } else if let Some(rest) = part.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&part);
            }
        }
        write!(f, "{out}")
    }
}

impl<Q: Rational> fmt::Debug for Cyclo8<Q> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Amp({self})")
    }
}

impl<Q: Rational> serde::Serialize for Cyclo8<Q> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Amplitude;

    fn a(c: [i64; 4]) -> Amplitude {
        Amplitude::new(
            Rational::ratio(c[0], 1),
            Rational::ratio(c[1], 1),
            Rational::ratio(c[2], 1),
            Rational::ratio(c[3], 1),
        )
    }

    #[test]
    fn inv_sqrt2_squared_is_half() {
        let h = Amplitude::inv_sqrt2();
        assert_eq!(h.clone() * h, Amplitude::from_ratio(1, 2));
    }

    #[test]
    fn plus_state_is_normalized() {
        let h = Amplitude::inv_sqrt2();
        let minus_h = -h.clone();
        assert_eq!(h.norm_sq() + minus_h.norm_sq(), Amplitude::one());
    }

    #[test]
    fn conj_of_i() {
        assert_eq!(Amplitude::i().conj(), -Amplitude::i());
        assert_eq!(Amplitude::zeta() * Amplitude::zeta(), Amplitude::i());
    }

    #[test]
    fn zeta_to_the_fourth_is_minus_one() {
        let z = Amplitude::zeta();
        let z4 = z.clone() * z.clone() * z.clone() * z;
        assert_eq!(z4, -Amplitude::one());
        assert_eq!(Amplitude::sqrt2() * Amplitude::sqrt2(), Amplitude::from_int(2));
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert_eq!(Amplitude::zero().inverse(), Err(AmplitudeError::DivisionByZero));
    }

    #[test]
    fn inverse_round_trip() {
        for c in [[1, 2, 0, -1], [0, 1, 0, 0], [3, 0, 0, 5], [1, 1, 1, 1]] {
            let x = a(c);
            assert_eq!(x.clone() * x.inverse().unwrap(), Amplitude::one());
        }
    }

    #[test]
    fn norm_sq_is_real() {
        let x = a([1, 2, -3, 4]);
        assert!(x.norm_sq().is_real());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Amplitude::inv_sqrt2().to_string(), "1/sqrt2");
        assert_eq!((-Amplitude::inv_sqrt2()).to_string(), "-1/sqrt2");
        assert_eq!(Amplitude::i().to_string(), "i");
        assert_eq!(Amplitude::from_ratio(1, 2).to_string(), "1/2");
        assert_eq!(
            (Amplitude::one() + Amplitude::i()).to_string(),
            "1 + i"
        );
        assert_eq!(Amplitude::zeta().to_string(), "1/sqrt2 + i/sqrt2");
    }
}
