//! Exact rational scalars and their `"num/den"` text form.
//!
//! Every quantity that a verifiability verdict depends on is kept as an
//! arbitrary-precision rational. Floating point never enters the decision
//! path; it only appears in Monte Carlo summaries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Rational from a signed integer pair, reduced to lowest terms.
///
/// Panics if `denom` is zero.
pub fn rat(numer: i64, denom: i64) -> Rat {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Rational from an integer.
pub fn int(value: i64) -> Rat {
    BigRational::from_integer(BigInt::from(value))
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid rational literal {input:?}: {reason}")]
pub struct ParseRatError {
    pub input: String,
    pub reason: &'static str,
}

fn bad(input: &str, reason: &'static str) -> ParseRatError {
    ParseRatError {
        input: input.to_owned(),
        reason,
    }
}

/// Parses `"num/den"`, a plain integer, or a decimal literal into an exact
/// rational. Decimals are converted exactly (`"0.25"` becomes `1/4`).
pub fn parse_rat(text: &str) -> Result<Rat, ParseRatError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(bad(text, "empty string"));
    }
    if let Some((num, den)) = trimmed.split_once('/') {
        let numer: BigInt = num
            .trim()
            .parse()
            .map_err(|_| bad(text, "numerator is not an integer"))?;
        let denom: BigInt = den
            .trim()
            .parse()
            .map_err(|_| bad(text, "denominator is not an integer"))?;
        if denom.is_zero() {
            return Err(bad(text, "zero denominator"));
        }
        return Ok(BigRational::new(numer, denom));
    }
    if let Some((whole, frac)) = trimmed.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole_digits = whole.trim_start_matches(['+', '-']);
        if !whole_digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || (whole_digits.is_empty() && frac.is_empty())
        {
            return Err(bad(text, "malformed decimal"));
        }
        let whole_part: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits.parse().map_err(|_| bad(text, "malformed decimal"))?
        };
        let frac_part: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().map_err(|_| bad(text, "malformed decimal"))?
        };
        let mut scale = BigInt::one();
        for _ in 0..frac.len() {
            scale *= 10;
        }
        let mut value = BigRational::new(whole_part * &scale + frac_part, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let numer: BigInt = trimmed.parse().map_err(|_| bad(text, "not an integer"))?;
    Ok(BigRational::from_integer(numer))
}

/// Formats a rational as a canonical `"num/den"` string. The denominator is
/// always present and positive, so output is unambiguous and byte-stable.
pub fn format_rat(value: &Rat) -> String {
    format!("{}/{}", value.numer(), value.denom())
}
