//! Exact rational helpers shared by every module.
//!
//! All quantities are [`Q`], an arbitrary precision rational. Machine output
//! writes a rational as the pair `[numerator, denominator]`; each entry is a
//! JSON integer when it fits in an `i64` and a decimal string otherwise.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Q = BigRational;

/// `n / d` as an exact rational. Panics on `d == 0`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `base^exp` as a big integer.
pub fn big_pow(base: u64, exp: u64) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

/// `base^exp` as a rational.
pub fn q_pow(base: u64, exp: u64) -> Q {
    Q::from_integer(big_pow(base, exp))
}

/// `base^exp` for a possibly negative exponent.
pub fn q_pow_signed(base: u64, exp: i64) -> Q {
    let v = q_pow(base, exp.unsigned_abs());
    if exp < 0 {
        v.recip()
    } else {
        v
    }
}

/// Minimum of two rationals by value.
pub fn q_min(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Parses `"3"`, `"-2/5"` or `"7/48"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let v = Q::from_str(t).map_err(|_| Error::Parse(format!("not a rational: {t:?}")))?;
    Ok(v)
}

/// `n/d` in lowest terms, or `n` when the denominator is one.
pub fn fmt_q(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Decimal approximation rounded half away from zero to `digits` places.
///
/// Computed from the exact value with integer arithmetic only.
pub fn fmt_decimal(v: &Q, digits: u32) -> String {
    let scale = big_pow(10, digits as u64);
    let scaled = v * Q::from_integer(scale.clone());
    let neg = scaled.is_negative();
    let abs = scaled.abs();
    let (quo, rem) = abs.numer().div_rem(abs.denom());
    let twice = rem * 2u32;
    let rounded = if &twice >= abs.denom() { quo + 1u32 } else { quo };
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let mut out = String::new();
    if neg && !rounded.is_zero() {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 {
        let frac = frac_part.to_string();
        out.push('.');
        for _ in frac.len()..digits as usize {
            out.push('0');
        }
        out.push_str(&frac);
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum IntRepr {
    Small(i64),
    Big(String),
}

impl IntRepr {
    pub(crate) fn from_big(v: &BigInt) -> Self {
        match v.to_i64() {
            Some(x) => IntRepr::Small(x),
            None => IntRepr::Big(v.to_string()),
        }
    }

    pub(crate) fn into_big<E: serde::de::Error>(self) -> std::result::Result<BigInt, E> {
        match self {
            IntRepr::Small(x) => Ok(BigInt::from(x)),
            IntRepr::Big(s) => BigInt::from_str(&s).map_err(E::custom),
        }
    }
}

/// Serde adapter writing a [`Q`] as `[numerator, denominator]`.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        (IntRepr::from_big(v.numer()), IntRepr::from_big(v.denom())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let (n, m): (IntRepr, IntRepr) = Deserialize::deserialize(d)?;
        let n = n.into_big::<D::Error>()?;
        let m = m.into_big::<D::Error>()?;
        if m.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Q::new(n, m))
    }
}

/// Serde adapter for `Vec<Q>`.
pub mod serde_qvec {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "serde_q")] Q);

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let w: Vec<W> = v.iter().cloned().map(W).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let w: Vec<W> = Deserialize::deserialize(d)?;
        Ok(w.into_iter().map(|x| x.0).collect())
    }
}

/// Serde adapter for `Option<Q>`.
pub mod serde_qopt {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "serde_q")] Q);

    pub fn serialize<S: Serializer>(v: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.clone().map(W).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Q>, D::Error> {
        let w: Option<W> = Deserialize::deserialize(d)?;
        Ok(w.map(|x| x.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rounding() {
        assert_eq!(fmt_decimal(&q(1, 3), 4), "0.3333");
        assert_eq!(fmt_decimal(&q(2, 3), 2), "0.67");
        assert_eq!(fmt_decimal(&q(-1, 8), 2), "-0.13");
        assert_eq!(fmt_decimal(&qi(5), 0), "5");
        assert_eq!(fmt_decimal(&q(1, 200), 2), "0.01");
        assert_eq!(fmt_decimal(&q(-1, 1000), 2), "0.00");
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("7/48").unwrap(), q(7, 48));
        assert_eq!(parse_q(" 14/96 ").unwrap(), q(7, 48));
        assert_eq!(fmt_q(&q(6, 3)), "2");
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn json_pair_roundtrip() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct T(#[serde(with = "serde_q")] Q);
        let big = Q::new(big_pow(97, 30), BigInt::from(7));
        for v in [q(7, 48), qi(-3), big] {
            let s = serde_json::to_string(&T(v.clone())).unwrap();
            let back: T = serde_json::from_str(&s).unwrap();
            assert_eq!(back.0, v);
        }
        assert_eq!(serde_json::to_string(&T(q(7, 48))).unwrap(), "[7,48]");
    }
}
