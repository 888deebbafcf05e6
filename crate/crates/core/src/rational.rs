//! Exact rational helpers.
//!
//! Scales, contractions and translations are kept as arbitrary precision
//! rationals so half-open depth inequalities never flip under rounding.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `base^(-exponent)`.
pub fn inv_pow(base: u32, exponent: u32) -> Rational {
    Rational::new(
        BigInt::one(),
        num::pow(BigInt::from(base), exponent as usize),
    )
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Natural log of a positive rational, robust for values far below `f64::MIN_POSITIVE`.
pub fn ln(value: &Rational) -> f64 {
    let direct = to_f64(value);
    if direct.is_finite() && direct > 0.0 {
        return direct.ln();
    }
    let numer = value.numer().to_f64().map(f64::ln);
    let denom = value.denom().to_f64().map(f64::ln);
    match (numer, denom) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n - d,
        _ => {
            // bit-length based fallback for gigantic numerators/denominators
            let n_bits = value.numer().bits() as f64;
            let d_bits = value.denom().bits() as f64;
            (n_bits - d_bits) * std::f64::consts::LN_2
        }
    }
}

/// Parses `p/q`, integer, decimal (`0.25`, `-1.5e-3`) or power (`3^-4`) literals exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let malformed = || ParseRationalError::Malformed(text.to_string());
    if let Some((base, exp)) = text.split_once('^') {
        let base: BigInt = base.trim().parse().map_err(|_| malformed())?;
        let exp: i64 = exp.trim().parse().map_err(|_| malformed())?;
        if base.is_zero() && exp < 0 {
            return Err(ParseRationalError::ZeroDenominator(text.to_string()));
        }
        let power = num::pow(base, exp.unsigned_abs() as usize);
        return Ok(if exp < 0 {
            Rational::new(BigInt::one(), power)
        } else {
            Rational::from_integer(power)
        });
    }
    if let Some((numer, denom)) = text.split_once('/') {
        let numer = parse_decimal(numer.trim()).ok_or_else(malformed)?;
        let denom = parse_decimal(denom.trim()).ok_or_else(malformed)?;
        if denom.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(text.to_string()));
        }
        return Ok(numer / denom);
    }
    parse_decimal(text).ok_or_else(malformed)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    if text.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(joined.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    if scale >= 0 {
        value *= Rational::from_integer(num::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num::pow(ten, scale.unsigned_abs() as usize));
    }
    Some(if negative { -value } else { value })
}

/// `p/q` (or `p` for integers).
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Largest `k >= 0` with `r <= base^(-k)`, i.e. `base^(-(k+1)) < r <= base^(-k)`.
///
/// Requires `0 < r <= 1`.
pub fn grid_depth(base: u32, r: &Rational) -> usize {
    debug_assert!(r.is_positive() && *r <= Rational::one());
    let base = Rational::from_integer(BigInt::from(base));
    let mut scaled = r.clone();
    let mut depth = 0;
    loop {
        let next = &scaled * &base;
        if next > Rational::one() {
            return depth;
        }
        scaled = next;
        depth += 1;
    }
}

/// Serde adapter that writes rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        format_rational(value).serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("3").unwrap(), integer(3));
        assert_eq!(parse_rational("-1.5e-1").unwrap(), ratio(-3, 20));
        assert_eq!(parse_rational("3^-4").unwrap(), ratio(1, 81));
        assert_eq!(parse_rational(" 2/6 ").unwrap(), ratio(1, 3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn grid_depth_boundaries() {
        assert_eq!(grid_depth(3, &ratio(1, 9)), 2);
        assert_eq!(grid_depth(3, &ratio(1, 10)), 2);
        assert_eq!(grid_depth(3, &ratio(1, 27)), 3);
        assert_eq!(grid_depth(2, &ratio(1, 3)), 1);
        assert_eq!(grid_depth(2, &integer(1)), 0);
    }

    #[test]
    fn ln_handles_tiny_values() {
        let tiny = inv_pow(2, 2000);
        assert!((ln(&tiny) + 2000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln(&ratio(1, 4)) - 0.25f64.ln()).abs() < 1e-15);
    }
}
