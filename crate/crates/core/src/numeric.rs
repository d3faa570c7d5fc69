//! Parsing, formatting and log helpers shared by the other modules.

use std::f64::consts::LN_2;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{CfError, Result};

/// Parses `p/q`, plain integers, decimals (`2.5`) and scientific notation
/// (`1e-40`, `3.2E+5`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(CfError::Parse("empty number".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| CfError::Parse(format!("bad numerator in {s:?}")))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| CfError::Parse(format!("bad denominator in {s:?}")))?;
        if den.is_zero() {
            return Err(CfError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..]
                .parse()
                .map_err(|_| CfError::Parse(format!("bad exponent in {s:?}")))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(CfError::Parse(format!("no digits in {s:?}")));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(CfError::Parse(format!("not a number: {s:?}")));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = all_digits.parse().unwrap_or_else(|_| BigInt::zero());
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

pub fn parse_positive_rational(text: &str) -> Result<BigRational> {
    let value = parse_rational(text)?;
    if !value.is_positive() {
        return Err(CfError::InvalidValue(format!("{text} must be positive")));
    }
    Ok(value)
}

pub fn parse_biguint(text: &str) -> Result<BigUint> {
    text.trim()
        .parse()
        .map_err(|_| CfError::Parse(format!("not a non-negative integer: {text:?}")))
}

/// Natural log of a big integer from its bit length and top 64 bits.
///
/// Relative error is below `2^-50` for every input; `ln(0)` is `-inf`.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return (n.to_u64().unwrap_or(u64::MAX) as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).ln() + shift as f64 * LN_2
}

pub fn ln_rational(x: &BigRational) -> f64 {
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    ln_biguint(num) - ln_biguint(den)
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        let sign = if x.is_negative() { -1.0 } else { 1.0 };
        sign * ln_rational(&x.abs()).exp()
    })
}

/// Converts a finite decimal `f64` to the rational it prints as.
pub fn f64_to_rational(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(CfError::InvalidValue(format!("{x} is not finite")));
    }
    parse_rational(&format!("{x:e}"))
}

pub fn is_integer(x: &BigRational) -> bool {
    x.denom().is_one()
}

pub fn to_biguint(x: &BigInt) -> Option<BigUint> {
    match x.sign() {
        Sign::Minus => None,
        _ => Some(x.magnitude().clone()),
    }
}

/// Positional decimal expansion truncated (towards negative infinity) to
/// `places` digits after the point.
pub fn to_decimal(x: &BigRational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), places);
    let scaled = (x.numer() * &scale).div_floor(x.denom());
    let negative = scaled.is_negative();
    let digits = scaled.magnitude().to_string();
    let digits = if digits.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Number of decimal places needed to resolve a width (at least 1).
pub fn decimal_places_for(width: &BigRational) -> usize {
    if !width.is_positive() {
        return 1;
    }
    let digits = -ln_rational(width) / std::f64::consts::LN_10;
    digits.ceil().max(1.0) as usize
}

/// Serde adapters that carry big integers as decimal strings.
pub mod serde_big {
    use std::str::FromStr;

    use num_bigint::{BigInt, BigUint};
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub mod biguint {
        use super::*;

        pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&v.to_string())
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
            let text = String::deserialize(d)?;
            BigUint::from_str(&text).map_err(D::Error::custom)
        }
    }

    pub mod biguint_vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
            let strings: Vec<String> = v.iter().map(ToString::to_string).collect();
            strings.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
            let strings = Vec::<String>::deserialize(d)?;
            strings
                .iter()
                .map(|t| BigUint::from_str(t).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod bigint {
        use super::*;

        pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&v.to_string())
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
            let text = String::deserialize(d)?;
            BigInt::from_str(&text).map_err(D::Error::custom)
        }
    }

    #[derive(Serialize, Deserialize)]
    struct Fraction {
        num: String,
        den: String,
    }

    pub mod rational {
        use super::*;

        pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
            Fraction {
                num: v.numer().to_string(),
                den: v.denom().to_string(),
            }
            .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
            let f = Fraction::deserialize(d)?;
            let num = BigInt::from_str(&f.num).map_err(D::Error::custom)?;
            let den = BigInt::from_str(&f.den).map_err(D::Error::custom)?;
            if den == BigInt::from(0) {
                return Err(D::Error::custom("zero denominator"));
            }
            Ok(BigRational::new(num, den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_rational("3/7").unwrap(), q(3, 7));
        assert_eq!(parse_rational("2.5").unwrap(), q(5, 2));
        assert_eq!(parse_rational("-0.125").unwrap(), q(-1, 8));
        assert_eq!(parse_rational("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_rational("1.5E+2").unwrap(), q(150, 1));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn ln_of_large_integers() {
        let big = BigUint::one() << 1000u32;
        let expected = 1000.0 * LN_2;
        assert!((ln_biguint(&big) - expected).abs() / expected < 1e-15);
        let three = BigUint::from(3u32) * (BigUint::one() << 200u32);
        let expected = 3f64.ln() + 200.0 * LN_2;
        assert!((ln_biguint(&three) - expected).abs() / expected < 1e-15);
    }

    #[test]
    fn decimal_expansion_truncates() {
        assert_eq!(to_decimal(&q(1, 3), 5), "0.33333");
        assert_eq!(to_decimal(&q(22, 7), 3), "3.142");
        assert_eq!(to_decimal(&q(-1, 3), 2), "-0.34");
        assert_eq!(to_decimal(&q(5, 1), 0), "5");
        assert_eq!(to_decimal(&q(1, 1000), 4), "0.0010");
        assert_eq!(decimal_places_for(&parse_rational("1e-40").unwrap()), 40);
    }
}
