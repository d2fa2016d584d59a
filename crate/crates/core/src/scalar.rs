//! Numeric abstraction shared by every algorithm in the crate.
//!
//! All game data is parsed into an exact [`BigRational`] first and then
//! converted into the working scalar type. The exact instantiation is the
//! reference one; `f64`/`f32` instantiations exist for quick exploratory runs
//! and use a small tolerance wherever a sign decision is taken.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Scalar types the crate is generic over.
pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Converts an exact rational into this scalar type.
    fn from_rational(r: &BigRational) -> Self;

    /// Lossy conversion used for sampling and reporting.
    fn to_f64(&self) -> f64;

    /// Threshold below which a value counts as zero. Zero for exact types.
    fn tolerance() -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Canonical textual form used in JSON output.
    fn render(&self) -> String {
        self.to_string()
    }

    fn half(&self) -> Self {
        self.clone() / (Self::one() + Self::one())
    }

    /// Strictly positive beyond the tolerance.
    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }

    /// Strictly negative beyond the tolerance.
    fn is_neg(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn is_negligible(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }

    /// Parses `"p/q"`, an integer, or a decimal literal exactly.
    fn parse_literal(s: &str) -> Result<Self, Error> {
        parse_rational(s).map(|r| Self::from_rational(&r))
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn is_pos(&self) -> bool {
        self.is_positive()
    }

    fn is_neg(&self) -> bool {
        self.is_negative()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f32(r).unwrap_or(f32::NAN)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn tolerance() -> Self {
        1e-5
    }
}

/// Parses a numeric literal into an exact rational.
///
/// Accepted forms: `"3"`, `"-3"`, `"1/3"`, `"-2/6"`, `"0.25"`, `"-.5"`, `"1e-3"`.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let bad = || Error::Parse(format!("invalid numeric literal {s:?}"));
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = t.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], exp)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str_radix(&all_digits, 10).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Renders an exact rational as `"p/q"` in lowest terms, or `"p"` for integers.
pub fn render_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
