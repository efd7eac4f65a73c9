//! Serde helpers: reals as decimal text.
//!
//! JSON documents emitted by this crate carry floating-point values as
//! decimal strings (shortest round-tripping form), so re-parsing a report
//! reproduces the original bits exactly.

use serde::{Deserialize, Deserializer, Serializer};

pub fn to_dec(v: f64) -> String {
    format!("{v}")
}

pub fn from_dec(s: &str) -> Result<f64, std::num::ParseFloatError> {
    s.parse::<f64>()
}

/// Fixed 17-significant-digit decimal text used by CSV exports.
pub fn to_dec17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serialize an `f64` as a decimal string.
pub mod dec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_dec(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        from_dec(&s).map_err(serde::de::Error::custom)
    }
}

/// Serialize a `Vec<f64>` as decimal strings.
pub mod dec_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| to_dec(*x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        items
            .iter()
            .map(|s| from_dec(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serialize an `Option<Vec<f64>>` as decimal strings (serialize-only).
pub mod dec_vec_opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(vec) => s.collect_seq(vec.iter().map(|x| to_dec(*x))),
            None => s.serialize_none(),
        }
    }
}

/// Serialize a `Vec<Vec<f64>>` as nested decimal strings.
pub mod dec_mat {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            v.iter()
                .map(|row| row.iter().map(|x| to_dec(*x)).collect::<Vec<_>>()),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        rows.iter()
            .map(|row| {
                row.iter()
                    .map(|s| from_dec(s).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_text_round_trips_exactly() {
        for &v in &[0.1, 1.0 / 3.0, 2.0_f64.sqrt(), 1e-300, 12345.6789, 0.0] {
            let s = to_dec(v);
            assert_eq!(from_dec(&s).unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn dec17_has_17_significant_digits() {
        assert_eq!(to_dec17(1.0), "1.0000000000000000e0");
        assert_eq!(to_dec17(0.5), "5.0000000000000000e-1");
    }
}
