//! Exact complex-rational scalars.
//!
//! All matrix entries in this crate are elements of ℚ(i): a pair of
//! arbitrary-precision rationals (real and imaginary part). Arithmetic is
//! exact; there is no floating-point anywhere in the scalar layer. The
//! "float" evaluation mode of an algebra only changes *zero tests* (they
//! compare an exactly computed norm against a tolerance), never the
//! arithmetic itself.
//!
//! Rationals are rendered canonically as `"n/d"` with the sign on the
//! numerator and a positive denominator, e.g. `"-3/4"`, `"0/1"`, `"2/1"`.
//! Parsing additionally accepts plain integers (`"7"`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Convenience constructor for a rational from machine integers.
pub fn rat(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Convenience constructor for an integer rational.
pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses a canonical rational string (`"n/d"` or `"n"`).
///
/// The sign may sit on either component; the result is normalized with a
/// positive denominator. A zero denominator is rejected.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let numer: BigInt = num_str
        .parse()
        .map_err(|_| Error::Parse(format!("invalid rational numerator in {s:?}")))?;
    let denom: BigInt = den_str
        .parse()
        .map_err(|_| Error::Parse(format!("invalid rational denominator in {s:?}")))?;
    if denom.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(numer, denom))
}

/// Renders a rational canonically as `"n/d"` (denominator always present).
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Renders a rational as a decimal string with at most `max_digits`
/// fractional digits (round half away from zero, trailing zeros trimmed).
///
/// This is a display aid only; exact values always travel as `"n/d"`.
pub fn decimal_string(r: &BigRational, max_digits: u32) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let abs = r.abs();
    let scale = BigInt::from(10u32).pow(max_digits);
    // round(|r| * 10^digits) with ties away from zero
    let scaled = abs * BigRational::from_integer(scale.clone());
    let twice = scaled.numer() * BigInt::from(2) + scaled.denom();
    let rounded = twice / (scaled.denom() * BigInt::from(2));
    let digits = rounded.to_string();
    let digits = if digits.len() <= max_digits as usize {
        format!("{}{}", "0".repeat(max_digits as usize + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = digits.split_at(digits.len() - max_digits as usize);
    let frac_part = frac_part.trim_end_matches('0');
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// An exact element of ℚ(i).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    /// Real part.
    pub re: BigRational,
    /// Imaginary part.
    pub im: BigRational,
}

impl Scalar {
    /// The additive identity.
    pub fn zero() -> Self {
        Scalar { re: BigRational::zero(), im: BigRational::zero() }
    }

    /// The multiplicative identity.
    pub fn one() -> Self {
        Scalar { re: BigRational::one(), im: BigRational::zero() }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Scalar { re: BigRational::zero(), im: BigRational::one() }
    }

    /// Builds a real scalar.
    pub fn from_re(re: BigRational) -> Self {
        Scalar { re, im: BigRational::zero() }
    }

    /// Builds a scalar from both parts.
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Scalar { re, im }
    }

    /// Builds a scalar from machine-integer fractions `a/b + (c/d)i`.
    pub fn from_parts(a: i64, b: i64, c: i64, d: i64) -> Self {
        Scalar { re: rat(a, b), im: rat(c, d) }
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        Scalar { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Squared modulus `re² + im²` (a nonnegative rational).
    pub fn abs_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// True iff both parts are exactly zero.
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.abs_sq();
        Some(Scalar { re: &self.re / &n, im: -(&self.im / &n) })
    }

    /// Parses an entry given as a `["re", "im"]` pair of rational strings.
    pub fn parse_pair(re: &str, im: &str) -> Result<Self> {
        Ok(Scalar { re: parse_rational(re)?, im: parse_rational(im)? })
    }

    /// Canonical `("n/d", "n/d")` rendering of the two parts.
    pub fn format_pair(&self) -> (String, String) {
        (format_rational(&self.re), format_rational(&self.im))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        let inv = rhs.inv().expect("division by zero scalar");
        self * &inv
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { re: -self.re.clone(), im: -self.im.clone() }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);
forward_owned_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rational_strings_are_canonical() {
        assert_eq!(format_rational(&rat(1, 2)), "1/2");
        assert_eq!(format_rational(&rat(-3, 4)), "-3/4");
        assert_eq!(format_rational(&rat(3, -4)), "-3/4");
        assert_eq!(format_rational(&rat(0, 5)), "0/1");
        assert_eq!(format_rational(&rat(2, 1)), "2/1");
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
    }

    #[test]
    fn parse_accepts_integers_and_fractions() {
        assert_eq!(parse_rational("7").unwrap(), rat_int(7));
        assert_eq!(parse_rational("-7").unwrap(), rat_int(-7));
        assert_eq!(parse_rational(" 1/2 ").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("1/-2").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
    }

    #[test]
    fn decimal_rendering_rounds_and_trims() {
        assert_eq!(decimal_string(&rat(1, 4), 12), "0.25");
        assert_eq!(decimal_string(&rat(-1, 4), 12), "-0.25");
        assert_eq!(decimal_string(&rat(1, 3), 6), "0.333333");
        assert_eq!(decimal_string(&rat(2, 3), 6), "0.666667");
        assert_eq!(decimal_string(&rat_int(3), 12), "3");
        assert_eq!(decimal_string(&rat_int(0), 12), "0");
    }

    #[test]
    fn complex_arithmetic_matches_hand_values() {
        let a = Scalar::from_parts(1, 1, 1, 1); // 1 + i
        let b = Scalar::from_parts(1, 1, -1, 1); // 1 - i
        assert_eq!(&a * &b, Scalar::from_re(rat_int(2)));
        assert_eq!(&a + &b, Scalar::from_re(rat_int(2)));
        assert_eq!(a.abs_sq(), rat_int(2));
        assert_eq!(a.conj(), b);
        let i = Scalar::i();
        assert_eq!(&i * &i, -Scalar::one());
    }

    #[test]
    fn inverse_is_exact() {
        let a = Scalar::from_parts(3, 5, -2, 7);
        let inv = a.inv().unwrap();
        assert_eq!(&a * &inv, Scalar::one());
        assert!(Scalar::zero().inv().is_none());
    }

    proptest! {
        #[test]
        fn parse_format_roundtrip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = rat(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }

        #[test]
        fn field_axioms_on_samples(
            a in -20i64..20, b in 1i64..8, c in -20i64..20, d in 1i64..8,
            e in -20i64..20, f in 1i64..8, g in -20i64..20, h in 1i64..8,
        ) {
            let x = Scalar::from_parts(a, b, c, d);
            let y = Scalar::from_parts(e, f, g, h);
            // commutativity and conjugate multiplicativity
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!((&x * &y).conj(), &x.conj() * &y.conj());
            prop_assert_eq!((&x + &y).conj(), &x.conj() + &y.conj());
            // |xy|² = |x|²|y|²
            prop_assert_eq!((&x * &y).abs_sq(), x.abs_sq() * y.abs_sq());
        }
    }
}
