//! Attribute values and their kinds.

use std::cmp::Ordering;
use std::fmt;

use chrono::NaiveDate;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Text,
    Integer,
    Real,
    Boolean,
    Date,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ValueKind::Text => "text",
            ValueKind::Integer => "integer",
            ValueKind::Real => "real",
            ValueKind::Boolean => "boolean",
            ValueKind::Date => "date",
        };
        f.write_str(name)
    }
}

/// A single attribute value. JSON encoding is the plain scalar (dates as
/// `YYYY-MM-DD` strings); `coerce` restores the declared kind after decoding.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Value {
    #[default]
    Null,
    Text(String),
    Integer(i64),
    Real(f64),
    Boolean(bool),
    Date(NaiveDate),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn kind(&self) -> Option<ValueKind> {
        match self {
            Value::Null => None,
            Value::Text(_) => Some(ValueKind::Text),
            Value::Integer(_) => Some(ValueKind::Integer),
            Value::Real(_) => Some(ValueKind::Real),
            Value::Boolean(_) => Some(ValueKind::Boolean),
            Value::Date(_) => Some(ValueKind::Date),
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Parses a raw CSV cell. Empty cells are null.
    pub fn parse(kind: ValueKind, raw: &str) -> Result<Value> {
        if raw.is_empty() {
            return Ok(Value::Null);
        }
        let bad = || Error::Coercion(format!("cannot read {raw:?} as {kind}"));
        let value = match kind {
            ValueKind::Text => Value::Text(raw.to_string()),
            ValueKind::Integer => Value::Integer(raw.trim().parse().map_err(|_| bad())?),
            ValueKind::Real => Value::Real(raw.trim().parse().map_err(|_| bad())?),
            ValueKind::Boolean => match raw.trim().to_ascii_lowercase().as_str() {
                "true" | "t" | "1" | "yes" => Value::Boolean(true),
                "false" | "f" | "0" | "no" => Value::Boolean(false),
                _ => return Err(bad()),
            },
            ValueKind::Date => Value::Date(NaiveDate::parse_from_str(raw.trim(), DATE_FORMAT).map_err(|_| bad())?),
        };
        Ok(value)
    }

    /// Converts a loosely typed value into `kind`. Integers widen to reals,
    /// text parses into the other kinds, and null passes through.
    pub fn coerce(self, kind: ValueKind) -> Result<Value> {
        match (self, kind) {
            (Value::Null, _) => Ok(Value::Null),
            (v @ Value::Text(_), ValueKind::Text)
            | (v @ Value::Integer(_), ValueKind::Integer)
            | (v @ Value::Real(_), ValueKind::Real)
            | (v @ Value::Boolean(_), ValueKind::Boolean)
            | (v @ Value::Date(_), ValueKind::Date) => Ok(v),
            (Value::Integer(i), ValueKind::Real) => Ok(Value::Real(i as f64)),
            (Value::Real(r), ValueKind::Integer) if r.fract() == 0.0 && r.is_finite() => Ok(Value::Integer(r as i64)),
            (Value::Text(s), kind) => Value::parse(kind, &s),
            (v, kind) => Err(Error::Coercion(format!("cannot convert {v} to {kind}"))),
        }
    }

    /// Compares two non-null values of compatible kinds. Integers and reals
    /// compare numerically; anything else across kinds is incomparable.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Integer(a), Value::Integer(b)) => Some(a.cmp(b)),
            (Value::Real(a), Value::Real(b)) => Some(a.total_cmp(b)),
            (Value::Integer(a), Value::Real(b)) => Some((*a as f64).total_cmp(b)),
            (Value::Real(a), Value::Integer(b)) => Some(a.total_cmp(&(*b as f64))),
            (Value::Boolean(a), Value::Boolean(b)) => Some(a.cmp(b)),
            (Value::Date(a), Value::Date(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    /// Total order used for sorting: nulls after everything, then by kind,
    /// then by value.
    pub fn sort_cmp(&self, other: &Value) -> Ordering {
        match (self.kind(), other.kind()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(a), Some(b)) => self.compare(other).unwrap_or_else(|| a.cmp(&b)),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Text(s) => f.write_str(s),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Date(d) => write!(f, "{}", d.format(DATE_FORMAT)),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Integer(i)
    }
}

impl From<f64> for Value {
    fn from(r: f64) -> Self {
        Value::Real(r)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Boolean(b)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Null => serializer.serialize_none(),
            Value::Text(s) => serializer.serialize_str(s),
            Value::Integer(i) => serializer.serialize_i64(*i),
            Value::Real(r) => serializer.serialize_f64(*r),
            Value::Boolean(b) => serializer.serialize_bool(*b),
            Value::Date(d) => serializer.collect_str(&d.format(DATE_FORMAT)),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ValueVisitor;

        impl<'de> Visitor<'de> for ValueVisitor {
            type Value = Value;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a scalar attribute value")
            }

            fn visit_unit<E: de::Error>(self) -> std::result::Result<Value, E> {
                Ok(Value::Null)
            }

            fn visit_none<E: de::Error>(self) -> std::result::Result<Value, E> {
                Ok(Value::Null)
            }

            fn visit_bool<E: de::Error>(self, v: bool) -> std::result::Result<Value, E> {
                Ok(Value::Boolean(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Value, E> {
                Ok(Value::Integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Value, E> {
                i64::try_from(v).map(Value::Integer).map_err(|_| E::custom("integer out of range"))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Value, E> {
                Ok(Value::Real(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Value, E> {
                Ok(Value::Text(v.to_string()))
            }

            fn visit_string<E: de::Error>(self, v: String) -> std::result::Result<Value, E> {
                Ok(Value::Text(v))
            }
        }

        deserializer.deserialize_any(ValueVisitor)
    }
}
