//! Numeric input values that remember whether they were given exactly.
//!
//! Config files may write parameters as JSON numbers (binary floating point)
//! or as strings such as `"2/5"`, `"-1/3"` or `"0.125"`, which are parsed as
//! exact rationals. A system whose parameters are all exact can run the
//! rational overlap checks.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct Number {
    value: f64,
    exact: Option<BigRational>,
    text: Option<String>,
}

impl Number {
    pub fn from_f64(value: f64) -> Self {
        let exact = if value.is_finite() && value.fract() == 0.0 && value.abs() < 9.0e15 {
            Some(BigRational::from_integer(BigInt::from(value as i64)))
        } else {
            None
        };
        Number { value, exact, text: None }
    }

    pub fn from_rational(r: BigRational) -> Self {
        let value = ratio_to_f64(&r);
        Number { value, exact: Some(r), text: None }
    }

    /// Parse `"p/q"`, an integer, or a decimal with optional exponent.
    pub fn parse(s: &str) -> Result<Self, String> {
        let t = s.trim();
        let exact = if let Some((p, q)) = t.split_once('/') {
            let p = parse_decimal(p.trim()).ok_or_else(|| format!("bad numerator in {s:?}"))?;
            let q = parse_decimal(q.trim()).ok_or_else(|| format!("bad denominator in {s:?}"))?;
            if q.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            p / q
        } else {
            parse_decimal(t).ok_or_else(|| format!("not a number: {s:?}"))?
        };
        Ok(Number { value: ratio_to_f64(&exact), exact: Some(exact), text: Some(t.to_string()) })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn text(&self) -> Option<&str> {
        self.text.as_deref()
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::from_f64(v)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.text {
            Some(t) => f.write_str(t),
            None => write!(f, "{}", self.value),
        }
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if neg {
        numer = -numer;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Some(if scale >= 0 {
        BigRational::from_integer(numer * pow)
    } else {
        BigRational::new(numer, pow)
    })
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match &self.text {
            Some(t) => ser.serialize_str(t),
            None => ser.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct NumVisitor;
        impl Visitor<'_> for NumVisitor {
            type Value = Number;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a rational string like \"2/5\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Number, E> {
                Ok(Number::from_f64(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Number, E> {
                Ok(Number::from_rational(BigRational::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Number, E> {
                Ok(Number::from_rational(BigRational::from_integer(v.into())))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Number, E> {
                Number::parse(v).map_err(E::custom)
            }
        }
        de.deserialize_any(NumVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        let n = Number::parse("2/5").unwrap();
        assert_eq!(n.exact().unwrap(), &BigRational::new(2.into(), 5.into()));
        assert!((n.value() - 0.4).abs() < 1e-16);

        let n = Number::parse("-0.125").unwrap();
        assert_eq!(n.exact().unwrap(), &BigRational::new((-1).into(), 8.into()));

        let n = Number::parse("1.5e-2").unwrap();
        assert_eq!(n.exact().unwrap(), &BigRational::new(3.into(), 200.into()));

        assert!(Number::parse("1/0").is_err());
        assert!(Number::parse("abc").is_err());
        assert!(Number::parse(".").is_err());
    }

    #[test]
    fn json_floats_are_inexact_unless_integral() {
        let v: Vec<Number> = serde_json::from_str(r#"[0.3, 2, "1/3"]"#).unwrap();
        assert!(v[0].exact().is_none());
        assert!(v[1].exact().is_some());
        assert_eq!(v[2].to_string(), "1/3");
    }
}
