//! Numeric scalars that samples, slopes and breakpoints are expressed in.
//!
//! Two implementations exist: `f64`, where equality of slopes and residuals is
//! decided with a relative tolerance, and [`BigRational`], where every
//! comparison is exact.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::Neg;

use num::{BigInt, BigRational, FromPrimitive, Num, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default relative tolerance used to declare two floating values equal.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

pub trait Scalar:
    Num + Neg<Output = Self> + Clone + PartialOrd + Debug + Send + Sync + ToPrimitive + FromPrimitive + 'static
{
    /// True when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn total_cmp(&self, other: &Self) -> Ordering;

    /// Equality up to `rel_tol` for floats; exact equality otherwise.
    fn coincides(&self, other: &Self, rel_tol: f64) -> bool;

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn midpoint(&self, other: &Self) -> Self {
        (self.clone() + other.clone()) / (Self::one() + Self::one())
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    /// Parse a decimal literal such as `-1.25`, `3e-2` or `7`.
    fn parse_decimal(text: &str) -> Result<Self>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn coincides(&self, other: &Self, rel_tol: f64) -> bool {
        if self == other {
            return true;
        }
        let scale = self.abs().max(other.abs());
        (self - other).abs() <= rel_tol * scale
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn parse_decimal(text: &str) -> Result<Self> {
        let v: f64 = text.trim().parse().map_err(|_| Error::Parse(format!("not a number: {text:?}")))?;
        if !v.is_finite() {
            return Err(Error::Parse(format!("not a finite number: {text:?}")));
        }
        Ok(v)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn coincides(&self, other: &Self, _rel_tol: f64) -> bool {
        self == other
    }

    fn parse_decimal(text: &str) -> Result<Self> {
        parse_decimal_rational(text)
    }
}

/// Exact conversion of a decimal literal into a rational number.
pub fn parse_decimal_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a decimal number: {text:?}"));
    let s = text.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str_radix(&all_digits, 10).map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Render a rational as a terminating decimal when possible, else as `p/q`.
pub fn format_rational(value: &BigRational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    let mut den = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den != BigInt::from(1) {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let digits = twos.max(fives);
    let scaled = value * BigRational::from_integer(num::pow(BigInt::from(10), digits));
    let int = scaled.to_integer();
    let negative = int < BigInt::zero();
    let mut text = num::abs(int).to_string();
    if text.len() <= digits {
        text = format!("{}{}", "0".repeat(digits + 1 - text.len()), text);
    }
    let split = text.len() - digits;
    format!("{}{}.{}", if negative { "-" } else { "" }, &text[..split], &text[split..])
}
