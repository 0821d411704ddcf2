//! Exact rational numbers and their textual form.
//!
//! Every quantity in the scheduler (times, energies, powers, capacities and
//! flow values) is a [`Q`]. Text input accepts plain decimals (`"2"`,
//! `"-0.75"`, `"1.5"`) and fraction literals (`"4/3"`); exponents, `NaN` and
//! friends are rejected. Output uses the shortest exact form: a decimal when
//! the expansion terminates, `num/den` otherwise.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used for every numeric quantity.
pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRationalError {
    pub literal: String,
    pub reason: &'static str,
}

fn parse_err(literal: &str, reason: &'static str) -> ParseRationalError {
    ParseRationalError {
        literal: literal.to_string(),
        reason,
    }
}

fn parse_digits(s: &str, literal: &str) -> Result<BigInt, ParseRationalError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_err(literal, "expected decimal digits"));
    }
    s.parse::<BigInt>()
        .map_err(|_| parse_err(literal, "expected decimal digits"))
}

/// Parses a decimal (`"12.5"`) or fraction (`"25/2"`) literal exactly.
pub fn parse_rational(literal: &str) -> Result<Q, ParseRationalError> {
    let s = literal.trim();
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return Err(parse_err(literal, "empty literal"));
    }

    let value = if let Some((num, den)) = body.split_once('/') {
        let num = parse_digits(num.trim(), literal)?;
        let den = parse_digits(den.trim(), literal)?;
        if den.is_zero() {
            return Err(parse_err(literal, "zero denominator"));
        }
        Q::new(num, den)
    } else if let Some((int_part, frac_part)) = body.split_once('.') {
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(parse_err(literal, "expected decimal digits"));
        }
        let int_value = if int_part.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(int_part, literal)?
        };
        if frac_part.is_empty() {
            Q::from_integer(int_value)
        } else {
            let frac = parse_digits(frac_part, literal)?;
            let scale = num_traits::pow(BigInt::from(10u8), frac_part.len());
            Q::from_integer(int_value) + Q::new(frac, scale)
        }
    } else {
        Q::from_integer(parse_digits(body, literal)?)
    };

    Ok(if negative { -value } else { value })
}

/// Exact textual form: terminating decimal when possible, `num/den` otherwise.
pub fn format_rational(value: &Q) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    let den = value.denom().clone();
    let mut rest = den.clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    while rest.is_even() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{}/{}", value.numer(), value.denom());
    }

    let digits = twos.max(fives);
    let scaled = value.abs() * Q::from_integer(num_traits::pow(BigInt::from(10u8), digits));
    debug_assert!(scaled.is_integer());
    let text = scaled.numer().to_string();
    let text = if text.len() <= digits {
        format!("{}{}", "0".repeat(digits - text.len() + 1), text)
    } else {
        text
    };
    let (int_part, frac_part) = text.split_at(text.len() - digits);
    let sign = if value.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

/// `Display` adapter for [`format_rational`].
pub struct Exact<'a>(pub &'a Q);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}

pub fn q(value: i64) -> Q {
    Q::from_integer(BigInt::from(value))
}

pub fn ratio(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Exact conversion of a finite `f64` (every finite double is a dyadic rational).
pub fn from_f64(value: f64) -> Option<Q> {
    Q::from_float(value)
}

pub fn to_f64(value: &Q) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn pow(base: &Q, exponent: u32) -> Q {
    num_traits::pow(base.clone(), exponent as usize)
}
