//! The universal value type used for states, inputs, outputs and results.
//!
//! Combinators build sums and products of spaces at runtime, so every space
//! is populated by [`Value`]s. Equality is structural: sequences and tuples
//! compare in order, sets and maps ignore insertion order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// A totally ordered `f64`. Negative zero is folded into positive zero so
/// that equal numbers have one representation.
#[derive(Clone, Copy, Debug)]
pub struct Real(f64);

impl Real {
    pub fn new(x: f64) -> Real {
        if x == 0.0 {
            Real(0.0)
        } else {
            Real(x)
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for Real {}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Hash for Real {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Real(Real),
    Atom(Arc<str>),
    Tuple(Vec<Value>),
    /// Injection into a sum; the tag names the summand.
    Tagged(Arc<str>, Box<Value>),
    Seq(Vec<Value>),
    Set(BTreeSet<Value>),
    Map(BTreeMap<Value, Value>),
}

impl Value {
    pub fn atom(name: &str) -> Value {
        Value::Atom(Arc::from(name))
    }

    pub fn real(x: f64) -> Value {
        Value::Real(Real::new(x))
    }

    pub fn int(x: i64) -> Value {
        Value::Int(x)
    }

    pub fn tuple(items: Vec<Value>) -> Value {
        Value::Tuple(items)
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Tuple(vec![a, b])
    }

    pub fn tagged(tag: &str, v: Value) -> Value {
        Value::Tagged(Arc::from(tag), Box::new(v))
    }

    pub fn set<I: IntoIterator<Item = Value>>(items: I) -> Value {
        Value::Set(items.into_iter().collect())
    }

    /// A tuple of reals, the shape used for payoff vectors.
    pub fn reals(xs: &[f64]) -> Value {
        Value::Tuple(xs.iter().map(|&x| Value::real(x)).collect())
    }

    pub fn atoms(names: &[&str]) -> Value {
        Value::Tuple(names.iter().map(|n| Value::atom(n)).collect())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Value::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(r) => Some(r.get()),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Value]> {
        match self {
            Value::Tuple(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_tagged(&self) -> Option<(&str, &Value)> {
        match self {
            Value::Tagged(tag, v) => Some((tag, v)),
            _ => None,
        }
    }

    /// Reads a tuple of numbers as a payoff vector.
    pub fn to_reals(&self) -> Option<Vec<f64>> {
        self.as_tuple()?.iter().map(Value::as_real).collect()
    }

    /// Canonical JSON rendering used by every serialized report.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::{json, Value as J};
        match self {
            Value::Unit => J::Null,
            Value::Bool(b) => J::Bool(*b),
            Value::Int(i) => json!(i),
            Value::Real(r) => serde_json::Number::from_f64(r.get())
                .map(J::Number)
                .unwrap_or(J::Null),
            Value::Atom(a) => J::String(a.to_string()),
            Value::Tuple(items) => J::Array(items.iter().map(Value::to_json).collect()),
            Value::Tagged(tag, v) => json!({ "tag": tag.as_ref(), "value": v.to_json() }),
            Value::Seq(items) => json!({ "seq": items.iter().map(Value::to_json).collect::<Vec<_>>() }),
            Value::Set(items) => json!({ "set": items.iter().map(Value::to_json).collect::<Vec<_>>() }),
            Value::Map(m) => json!({
                "map": m.iter().map(|(k, v)| json!([k.to_json(), v.to_json()])).collect::<Vec<_>>()
            }),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, open: &str, items: impl Iterator<Item = String>, close: &str) -> fmt::Result {
    f.write_str(open)?;
    for (i, item) in items.enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        f.write_str(&item)?;
    }
    f.write_str(close)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => f.write_str(&crate::json::format_g17(r.get())),
            Value::Atom(a) => f.write_str(a),
            Value::Tuple(items) => write_list(f, "(", items.iter().map(|v| v.to_string()), ")"),
            Value::Tagged(tag, v) => write!(f, "{tag}({v})"),
            Value::Seq(items) => write_list(f, "[", items.iter().map(|v| v.to_string()), "]"),
            Value::Set(items) => write_list(f, "{", items.iter().map(|v| v.to_string()), "}"),
            Value::Map(m) => write_list(f, "{", m.iter().map(|(k, v)| format!("{k}: {v}")), "}"),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Value {
        Value::atom(s)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Value {
        Value::real(x)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Value {
        Value::Int(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_is_zero() {
        assert_eq!(Value::real(-0.0), Value::real(0.0));
    }

    #[test]
    fn sets_ignore_insertion_order() {
        let a = Value::set([Value::atom("x"), Value::atom("y")]);
        let b = Value::set([Value::atom("y"), Value::atom("x"), Value::atom("x")]);
        assert_eq!(a, b);
        let s1 = Value::Seq(vec![Value::atom("x"), Value::atom("y")]);
        let s2 = Value::Seq(vec![Value::atom("y"), Value::atom("x")]);
        assert_ne!(s1, s2);
    }

    #[test]
    fn tags_distinguish_injections() {
        let l = Value::tagged("L", Value::Int(1));
        let r = Value::tagged("R", Value::Int(1));
        assert_ne!(l, r);
    }

    #[test]
    fn display_is_compact() {
        let v = Value::pair(Value::atom("c"), Value::reals(&[1.0, -1.5]));
        assert_eq!(v.to_string(), "(c, (1, -1.5))");
    }
}
