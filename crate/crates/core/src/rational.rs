//! Exact rational helpers on top of `BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Exact conversion; every finite double is a dyadic rational.
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// `base^n` for any integer exponent; panics on `0^n` with `n < 0`.
pub fn powi(base: &Q, n: i64) -> Q {
    let p = num_traits::pow(base.clone(), n.unsigned_abs() as usize);
    if n < 0 {
        p.recip()
    } else {
        p
    }
}

pub fn floor_int(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_int(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

pub fn min_q<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_q<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a >= b {
        a
    } else {
        b
    }
}

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"-0.125"` or `"1e-3"` exactly.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Q> {
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
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
    let all = format!("{int_part}{frac_part}");
    let n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exp - frac_part.len() as i64;
    let mut v = Q::from_integer(n) * powi(&int(10), scale);
    if neg {
        v = -v;
    }
    Ok(v)
}

/// `"p/q"` or `"p"` for integers.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serde adapters writing rationals as strings.
pub mod serde_q {
    use super::{fmt_q, Q};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        super::value_to_q(&v).map_err(de::Error::custom)
    }
}

pub mod serde_vec_q {
    use super::{fmt_q, Q};
    use serde::{de, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&fmt_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter().map(|x| super::value_to_q(x).map_err(de::Error::custom)).collect()
    }
}

/// Accepts a JSON string (`"p/q"` or decimal) or a JSON number, read from its decimal text.
pub fn value_to_q(v: &serde_json::Value) -> Result<Q> {
    match v {
        serde_json::Value::String(s) => parse_q(s),
        serde_json::Value::Number(n) => parse_q(&n.to_string()),
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_q("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_q("-0.125").unwrap(), q(-1, 8));
        assert_eq!(parse_q("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_q("2.5E2").unwrap(), int(250));
        assert_eq!(parse_q(".5").unwrap(), q(1, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
        assert!(parse_q("").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for x in [q(7, 3), int(-4), q(0, 1), q(-22, 7)] {
            assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
        }
        assert_eq!(fmt_q(&q(6, 3)), "2");
    }

    #[test]
    fn powers() {
        assert_eq!(powi(&q(3, 2), 3), q(27, 8));
        assert_eq!(powi(&q(3, 2), -2), q(4, 9));
        assert_eq!(powi(&q(3, 2), 0), int(1));
    }

    #[test]
    fn float_conversion_is_exact() {
        assert_eq!(from_f64(0.375).unwrap(), q(3, 8));
        assert_eq!(to_f64(&q(1, 4)), 0.25);
    }
}
