//! Parsing, formatting, and serde support for exact rational fields.
//!
//! Profile files carry probabilities as JSON strings `"num/den"`, as
//! integers, or as decimals. Decimals are snapped to the nearest simple
//! rational (`0.25` → `1/4`, a 16-digit third → `1/3`) so that exact
//! normalization arithmetic still applies to hand-written files; inputs
//! that are not close to any small rational keep their literal value and
//! are judged by the 1e-12 normalization tolerance downstream.

use num_rational::Rational64;
use num_traits::Signed;

/// Parses `"num/den"`, `"num"`, or a decimal literal into a rational.
pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num.trim().parse().ok()?;
        let d: i64 = den.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational64::new(n, d));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Some(Rational64::from_integer(n));
    }
    s.parse::<f64>().ok().and_then(rational_from_f64)
}

/// Converts a finite float to a rational via continued-fraction
/// approximation; `None` for NaN/infinite values.
pub fn rational_from_f64(x: f64) -> Option<Rational64> {
    if !x.is_finite() {
        return None;
    }
    Rational64::approximate_float(x)
}

/// Renders `3` rather than `3/1` for integral values.
pub fn format_rational(r: Rational64) -> String {
    if r.denom().abs() == 1 {
        format!("{}", r.numer() * r.denom().signum())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// serde adapter for `Rational64` fields: `#[serde(with = "crate::rational::serde_impl")]`.
///
/// Serializes integral values as JSON numbers and everything else as
/// `"num/den"` strings; accepts numbers, decimals, and strings on input.
pub mod serde_impl {
    use super::*;
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(r: &Rational64, ser: S) -> Result<S::Ok, S::Error> {
        if r.denom().abs() == 1 {
            ser.serialize_i64(r.numer() * r.denom().signum())
        } else {
            ser.serialize_str(&format_rational(*r))
        }
    }

    struct RationalVisitor;

    impl<'de> Visitor<'de> for RationalVisitor {
        type Value = Rational64;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a rational as \"num/den\", integer, or decimal")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
            Ok(Rational64::from_integer(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
            i64::try_from(v)
                .map(Rational64::from_integer)
                .map_err(|_| E::custom("integer out of range for rational"))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
            rational_from_f64(v).ok_or_else(|| E::custom("non-finite decimal"))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
            parse_rational(v).ok_or_else(|| E::custom(format!("unparseable rational {v:?}")))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational64, D::Error> {
        de.deserialize_any(RationalVisitor)
    }
}
