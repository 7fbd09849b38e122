//! Deterministic JSON for reports.
//!
//! Non-finite floats are written as the strings `"inf"`, `"-inf"` and `"nan"`
//! (fields opt in with `#[serde(with = "crate::json::float")]`), and every
//! finite number in a report is rounded to 12 significant digits.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// JSON value of a float, non-finite values as strings.
pub fn encode(v: f64) -> Value {
    if v.is_nan() {
        Value::String("nan".into())
    } else if v == f64::INFINITY {
        Value::String("inf".into())
    } else if v == f64::NEG_INFINITY {
        Value::String("-inf".into())
    } else {
        serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
    }
}

fn decode<E: serde::de::Error>(v: &Value) -> std::result::Result<f64, E> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| E::custom("number out of range")),
        Value::String(s) => match s.as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => other.parse().map_err(|_| E::custom(format!("not a float: {other:?}"))),
        },
        _ => Err(E::custom("expected a number or one of \"inf\", \"-inf\", \"nan\"")),
    }
}

/// `f64` that may be non-finite.
pub mod float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        super::encode(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        super::decode(&Value::deserialize(d)?)
    }
}

/// `Vec<f64>` whose entries may be non-finite.
pub mod float_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| super::encode(*x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Value>::deserialize(d)?.iter().map(super::decode).collect()
    }
}

/// `(f64, f64)` whose entries may be non-finite.
pub mod float_pair {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    pub fn serialize<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (super::encode(v.0), super::encode(v.1)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (a, b) = <(Value, Value)>::deserialize(d)?;
        Ok((super::decode(&a)?, super::decode(&b)?))
    }
}

/// Rounds `v` to 12 significant decimal digits; negative zero becomes zero.
pub fn round12(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    if !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    *v = encode(round12(x));
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes `value` as a report: pretty-printed, rounded, keys sorted.
pub fn to_report_value<T: Serialize>(value: &T) -> Result<Value> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Format {
        location: "report".into(),
        message: e.to_string(),
    })?;
    round_value(&mut v);
    Ok(v)
}

pub fn to_report_string<T: Serialize>(value: &T) -> Result<String> {
    let v = to_report_value(value)?;
    serde_json::to_string_pretty(&v).map_err(|e| Error::Format {
        location: "report".into(),
        message: e.to_string(),
    })
}
