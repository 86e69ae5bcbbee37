//! The three choice functors as value-level containers.
//!
//! A [`Choice`] is deterministic (one value), non-deterministic (a finite,
//! non-empty set) or probabilistic (a finite distribution). Besides the
//! functorial [`Choice::map`] this module provides the three natural
//! transformations the process combinators are built from:
//!
//! * [`flatten`] combines a choice of choices into one choice,
//! * [`distribute`] pushes a choice out of the right summand of `A + B × C(X)`,
//! * [`pair`] turns two independent choices into a choice of pairs.
//!
//! Mixing non-deterministic with probabilistic choice is not supported and
//! is reported as [`Error::MixedChoice`].

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::value::Real;

/// Tolerance on the total mass of a distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Per-entry tolerance when comparing two distributions.
pub const EQUALITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChoiceKind {
    Det,
    NDet,
    Prob,
}

impl ChoiceKind {
    /// The functor a choice of `self` followed by a choice of `other` lives
    /// in. `Det` is the identity; `NDet` with `Prob` is undefined.
    pub fn combine(self, other: ChoiceKind) -> Option<ChoiceKind> {
        use ChoiceKind::*;
        match (self, other) {
            (Det, k) | (k, Det) => Some(k),
            (NDet, NDet) => Some(NDet),
            (Prob, Prob) => Some(Prob),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChoiceKind::Det => "det",
            ChoiceKind::NDet => "ndet",
            ChoiceKind::Prob => "prob",
        }
    }
}

pub fn combined_kind(a: ChoiceKind, b: ChoiceKind) -> Result<ChoiceKind> {
    a.combine(b).ok_or(Error::MixedChoice(a, b))
}

#[derive(Clone, Debug)]
enum Repr<T> {
    Det(T),
    NDet(Vec<T>),
    Prob(Vec<(T, f64)>),
}

/// A borrowed view of a choice's payload.
#[derive(Debug)]
pub enum View<'a, T> {
    Det(&'a T),
    NDet(&'a [T]),
    Prob(&'a [(T, f64)]),
}

/// Immutable choice container. NDet payloads are kept sorted and
/// duplicate-free; Prob payloads are sorted by value with zero entries
/// removed, so structural equality is well defined.
#[derive(Clone, Debug)]
pub struct Choice<T> {
    repr: Repr<T>,
}

impl<T: Ord + Clone> Choice<T> {
    pub fn det(x: T) -> Self {
        Choice { repr: Repr::Det(x) }
    }

    pub fn ndet<I: IntoIterator<Item = T>>(items: I) -> Result<Self> {
        let c = Self::ndet_unchecked(items);
        c.validate()?;
        Ok(c)
    }

    /// Builds an NDet choice without rejecting the empty set.
    pub fn ndet_unchecked<I: IntoIterator<Item = T>>(items: I) -> Self {
        let mut v: Vec<T> = items.into_iter().collect();
        v.sort();
        v.dedup();
        Choice { repr: Repr::NDet(v) }
    }

    pub fn prob<I: IntoIterator<Item = (T, f64)>>(entries: I) -> Result<Self> {
        let c = Self::prob_unchecked(entries);
        c.validate()?;
        Ok(c)
    }

    /// Merges duplicate values and drops zero entries but does not check
    /// normalization; [`Choice::validate`] does.
    pub fn prob_unchecked<I: IntoIterator<Item = (T, f64)>>(entries: I) -> Self {
        let mut merged: BTreeMap<T, f64> = BTreeMap::new();
        for (x, p) in entries {
            *merged.entry(x).or_insert(0.0) += p;
        }
        Choice {
            repr: Repr::Prob(merged.into_iter().filter(|&(_, p)| p != 0.0).collect()),
        }
    }

    /// The unit of the functor: a choice with exactly one possibility.
    pub fn point(kind: ChoiceKind, x: T) -> Self {
        match kind {
            ChoiceKind::Det => Choice::det(x),
            ChoiceKind::NDet => Choice { repr: Repr::NDet(vec![x]) },
            ChoiceKind::Prob => Choice { repr: Repr::Prob(vec![(x, 1.0)]) },
        }
    }

    pub fn uniform<I: IntoIterator<Item = T>>(items: I) -> Result<Self> {
        let items: Vec<T> = items.into_iter().collect();
        let p = 1.0 / items.len() as f64;
        Self::prob(items.into_iter().map(|x| (x, p)))
    }

    pub fn kind(&self) -> ChoiceKind {
        match self.repr {
            Repr::Det(_) => ChoiceKind::Det,
            Repr::NDet(_) => ChoiceKind::NDet,
            Repr::Prob(_) => ChoiceKind::Prob,
        }
    }

    pub fn view(&self) -> View<'_, T> {
        match &self.repr {
            Repr::Det(x) => View::Det(x),
            Repr::NDet(v) => View::NDet(v),
            Repr::Prob(v) => View::Prob(v),
        }
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Det(_) => 1,
            Repr::NDet(v) => v.len(),
            Repr::Prob(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Possibilities with their weights: probabilities for Prob, 1 otherwise.
    pub fn weighted(&self) -> Vec<(&T, f64)> {
        match &self.repr {
            Repr::Det(x) => vec![(x, 1.0)],
            Repr::NDet(v) => v.iter().map(|x| (x, 1.0)).collect(),
            Repr::Prob(v) => v.iter().map(|(x, p)| (x, *p)).collect(),
        }
    }

    pub fn support(&self) -> Vec<&T> {
        self.weighted().into_iter().map(|(x, _)| x).collect()
    }

    pub fn contains(&self, x: &T) -> bool {
        match &self.repr {
            Repr::Det(y) => y == x,
            Repr::NDet(v) => v.binary_search(x).is_ok(),
            Repr::Prob(v) => v.binary_search_by(|(y, _)| y.cmp(x)).is_ok(),
        }
    }

    /// Probability of `x`; for Det and NDet choices this is an indicator.
    pub fn probability(&self, x: &T) -> f64 {
        match &self.repr {
            Repr::Prob(v) => v
                .binary_search_by(|(y, _)| y.cmp(x))
                .map(|i| v[i].1)
                .unwrap_or(0.0),
            _ => {
                if self.contains(x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn into_det(self) -> Option<T> {
        match self.repr {
            Repr::Det(x) => Some(x),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.repr {
            Repr::Det(_) => Ok(()),
            Repr::NDet(v) if v.is_empty() => Err(Error::Validation("empty non-deterministic choice".into())),
            Repr::NDet(_) => Ok(()),
            Repr::Prob(v) => {
                if v.is_empty() {
                    return Err(Error::Validation("empty distribution".into()));
                }
                let mut total = 0.0;
                for (_, p) in v {
                    if !p.is_finite() || *p <= 0.0 || *p > 1.0 + EQUALITY_TOLERANCE {
                        return Err(Error::Validation(format!("probability {p} outside (0, 1]")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
                    return Err(Error::Validation(format!("probabilities sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }

    /// Functorial action. NDet images are de-duplicated; Prob images are
    /// pushed forward, summing the mass of values sent to the same place.
    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> Choice<U> {
        match &self.repr {
            Repr::Det(x) => Choice::det(f(x)),
            Repr::NDet(v) => Choice::ndet_unchecked(v.iter().map(f)),
            Repr::Prob(v) => Choice::prob_unchecked(v.iter().map(|(x, p)| (f(x), *p))),
        }
    }

    pub fn try_map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> Result<U>) -> Result<Choice<U>> {
        Ok(match &self.repr {
            Repr::Det(x) => Choice::det(f(x)?),
            Repr::NDet(v) => Choice::ndet_unchecked(v.iter().map(f).collect::<Result<Vec<_>>>()?),
            Repr::Prob(v) => Choice::prob_unchecked(
                v.iter()
                    .map(|(x, p)| f(x).map(|y| (y, *p)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }

    /// Structural equality with a per-entry tolerance on probabilities.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match (&self.repr, &other.repr) {
            (Repr::Det(a), Repr::Det(b)) => a == b,
            (Repr::NDet(a), Repr::NDet(b)) => a == b,
            (Repr::Prob(a), Repr::Prob(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|((x, p), (y, q))| x == y && (p - q).abs() <= tol)
            }
            _ => false,
        }
    }

    /// Sum of the probabilities (1 for Det, the set size for NDet).
    pub fn total_mass(&self) -> f64 {
        self.weighted().iter().map(|(_, p)| p).sum()
    }
}

impl<T: Ord> PartialEq for Choice<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Ord> Eq for Choice<T> {}

impl<T: Ord> PartialOrd for Choice<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Ord> Ord for Choice<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank<T>(r: &Repr<T>) -> u8 {
            match r {
                Repr::Det(_) => 0,
                Repr::NDet(_) => 1,
                Repr::Prob(_) => 2,
            }
        }
        match (&self.repr, &other.repr) {
            (Repr::Det(a), Repr::Det(b)) => a.cmp(b),
            (Repr::NDet(a), Repr::NDet(b)) => a.cmp(b),
            (Repr::Prob(a), Repr::Prob(b)) => {
                let ka = a.iter().map(|(x, p)| (x, Real::new(*p)));
                let kb = b.iter().map(|(x, p)| (x, Real::new(*p)));
                ka.cmp(kb)
            }
            (a, b) => rank(a).cmp(&rank(b)),
        }
    }
}

/// Flattens a choice of choices. Det layers act as identities; NDet over
/// NDet is the union; Prob over Prob sums `d(d') · d'(x)` over the inner
/// distributions.
pub fn flatten<T: Ord + Clone>(outer: Choice<Choice<T>>) -> Result<Choice<T>> {
    let outer_kind = outer.kind();
    let inner_kind = outer
        .support()
        .iter()
        .try_fold(ChoiceKind::Det, |acc, c| combined_kind(acc, c.kind()))?;
    combined_kind(outer_kind, inner_kind)?;
    match outer.repr {
        Repr::Det(inner) => Ok(inner),
        Repr::NDet(inners) => Ok(Choice::ndet_unchecked(
            inners.into_iter().flat_map(|c| c.support().into_iter().cloned().collect::<Vec<_>>()),
        )),
        Repr::Prob(inners) => Ok(Choice::prob_unchecked(inners.into_iter().flat_map(|(c, p)| {
            c.weighted()
                .into_iter()
                .map(|(x, q)| (x.clone(), p * q))
                .collect::<Vec<_>>()
        }))),
    }
}

/// Binary sum used by [`distribute`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sum<A, B> {
    Left(A),
    Right(B),
}

/// The distributive law `A + B × C(X) → C(A + B × X)`. A left value becomes
/// the point choice of `kind`; `(b, c)` becomes `c` with every value paired
/// with `b`.
pub fn distribute<A, B, X>(kind: ChoiceKind, x: Sum<A, (B, Choice<X>)>) -> Choice<Sum<A, (B, X)>>
where
    A: Ord + Clone,
    B: Ord + Clone,
    X: Ord + Clone,
{
    match x {
        Sum::Left(a) => Choice::point(kind, Sum::Left(a)),
        Sum::Right((b, c)) => c.map(|x| Sum::Right((b.clone(), x.clone()))),
    }
}

/// Pairs two independent choices: Cartesian product for NDet, product
/// distribution for Prob, and the distributive law when either side is Det.
pub fn pair<T: Ord + Clone, U: Ord + Clone>(a: &Choice<T>, b: &Choice<U>) -> Result<Choice<(T, U)>> {
    combined_kind(a.kind(), b.kind())?;
    Ok(match (&a.repr, &b.repr) {
        (Repr::Det(x), _) => b.map(|y| (x.clone(), y.clone())),
        (_, Repr::Det(y)) => a.map(|x| (x.clone(), y.clone())),
        (Repr::NDet(xs), Repr::NDet(ys)) => {
            Choice::ndet_unchecked(xs.iter().flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone()))))
        }
        (Repr::Prob(xs), Repr::Prob(ys)) => Choice::prob_unchecked(
            xs.iter()
                .flat_map(|(x, p)| ys.iter().map(move |(y, q)| ((x.clone(), y.clone()), p * q))),
        ),
        _ => unreachable!("mixed kinds rejected above"),
    })
}
