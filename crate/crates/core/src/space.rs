//! Space descriptors: named sets of [`Value`]s with optional membership
//! predicates and optional finite enumerations.
//!
//! Two descriptors denote the same space when their names agree. Sum and
//! product constructors derive their names from their components, so spaces
//! assembled the same way are recognised as identical.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::value::Value;

/// Cross products with more elements than this are left unenumerated.
pub const MAX_PRODUCT_ENUMERATION: usize = 1_000_000;

pub type Predicate = Arc<dyn Fn(&Value) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum Shape {
    Opaque,
    /// The one-point space `{()}`.
    Unit,
    Empty,
    Product(Vec<Space>),
    Sum(Vec<(String, Space)>),
}

#[derive(Clone)]
pub struct Space {
    inner: Arc<Inner>,
}

struct Inner {
    name: String,
    shape: Shape,
    elements: Option<Vec<Value>>,
    lookup: Option<BTreeSet<Value>>,
    predicate: Option<Predicate>,
}

impl Space {
    fn build(name: String, shape: Shape, elements: Option<Vec<Value>>, predicate: Option<Predicate>) -> Space {
        let lookup = elements.as_ref().map(|els| els.iter().cloned().collect());
        Space {
            inner: Arc::new(Inner {
                name,
                shape,
                elements,
                lookup,
                predicate,
            }),
        }
    }

    /// A finite space; duplicates are dropped, enumeration order is kept.
    pub fn finite(name: &str, elements: impl IntoIterator<Item = Value>) -> Space {
        let mut seen = BTreeSet::new();
        let elements: Vec<Value> = elements.into_iter().filter(|v| seen.insert(v.clone())).collect();
        Space::build(name.to_string(), Shape::Opaque, Some(elements), None)
    }

    pub fn atoms(name: &str, atoms: &[&str]) -> Space {
        Space::finite(name, atoms.iter().map(|a| Value::atom(a)))
    }

    /// An unenumerated space described by a membership test.
    pub fn predicate(name: &str, pred: impl Fn(&Value) -> bool + Send + Sync + 'static) -> Space {
        Space::build(name.to_string(), Shape::Opaque, None, Some(Arc::new(pred)))
    }

    /// A finite space that also carries a membership test (the enumeration
    /// must satisfy it).
    pub fn finite_with_predicate(
        name: &str,
        elements: impl IntoIterator<Item = Value>,
        pred: impl Fn(&Value) -> bool + Send + Sync + 'static,
    ) -> Space {
        let mut seen = BTreeSet::new();
        let elements: Vec<Value> = elements.into_iter().filter(|v| seen.insert(v.clone())).collect();
        Space::build(name.to_string(), Shape::Opaque, Some(elements), Some(Arc::new(pred)))
    }

    /// A space accepting every value.
    pub fn any(name: &str) -> Space {
        Space::build(name.to_string(), Shape::Opaque, None, None)
    }

    pub fn unit() -> Space {
        Space::build("1".to_string(), Shape::Unit, Some(vec![Value::Unit]), None)
    }

    pub fn empty() -> Space {
        Space::build("0".to_string(), Shape::Empty, Some(Vec::new()), None)
    }

    /// Tuples of `n` reals.
    pub fn reals(n: usize) -> Space {
        Space::predicate(&format!("R^{n}"), move |v| {
            v.as_tuple()
                .map(|items| items.len() == n && items.iter().all(|x| matches!(x, Value::Real(_))))
                .unwrap_or(false)
        })
    }

    pub fn product(components: Vec<Space>) -> Space {
        let name = format!(
            "({})",
            components.iter().map(|c| c.name().to_string()).collect::<Vec<_>>().join(" × ")
        );
        let elements = enumerate_product(&components);
        Space::build(name, Shape::Product(components), elements, None)
    }

    pub fn sum(summands: Vec<(&str, Space)>) -> Space {
        let summands: Vec<(String, Space)> = summands.into_iter().map(|(t, s)| (t.to_string(), s)).collect();
        let name = format!(
            "({})",
            summands
                .iter()
                .map(|(t, s)| format!("{t}:{}", s.name()))
                .collect::<Vec<_>>()
                .join(" + ")
        );
        let elements = summands
            .iter()
            .map(|(tag, s)| {
                s.elements()
                    .map(|els| els.iter().map(|v| Value::tagged(tag, v.clone())).collect::<Vec<_>>())
            })
            .collect::<Option<Vec<_>>>()
            .map(|parts| parts.concat());
        Space::build(name, Shape::Sum(summands), elements, None)
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn shape(&self) -> &Shape {
        &self.inner.shape
    }

    pub fn elements(&self) -> Option<&[Value]> {
        self.inner.elements.as_deref()
    }

    pub fn is_enumerated(&self) -> bool {
        self.inner.elements.is_some()
    }

    pub fn is_empty_space(&self) -> bool {
        matches!(self.inner.shape, Shape::Empty)
    }

    pub fn same_as(&self, other: &Space) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.name == other.inner.name
    }

    /// Components when this is a binary product.
    pub fn as_pair(&self) -> Option<(&Space, &Space)> {
        match &self.inner.shape {
            Shape::Product(c) if c.len() == 2 => Some((&c[0], &c[1])),
            _ => None,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        let inner = &self.inner;
        if let Some(pred) = &inner.predicate {
            return pred(v);
        }
        if let Some(lookup) = &inner.lookup {
            return lookup.contains(v);
        }
        match &inner.shape {
            Shape::Opaque => true,
            Shape::Unit => *v == Value::Unit,
            Shape::Empty => false,
            Shape::Product(components) => match v.as_tuple() {
                Some(items) if items.len() == components.len() => {
                    items.iter().zip(components).all(|(x, s)| s.contains(x))
                }
                _ => false,
            },
            Shape::Sum(summands) => match v.as_tagged() {
                Some((tag, x)) => summands.iter().any(|(t, s)| t == tag && s.contains(x)),
                None => false,
            },
        }
    }
}

fn enumerate_product(components: &[Space]) -> Option<Vec<Value>> {
    let mut size: usize = 1;
    for c in components {
        size = size.checked_mul(c.elements()?.len())?;
        if size > MAX_PRODUCT_ENUMERATION {
            return None;
        }
    }
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for c in components {
        let els = c.elements()?;
        let mut next = Vec::with_capacity(out.len() * els.len());
        for prefix in &out {
            for e in els {
                let mut t = prefix.clone();
                t.push(e.clone());
                next.push(t);
            }
        }
        out = next;
    }
    Some(out.into_iter().map(Value::Tuple).collect())
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Space")
            .field("name", &self.inner.name)
            .field("size", &self.inner.elements.as_ref().map(Vec::len))
            .finish()
    }
}
