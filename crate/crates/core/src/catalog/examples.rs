//! Small processes used to illustrate game trees and outcomes.

use crate::choice::{Choice, ChoiceKind};
use crate::error::{Error, Result};
use crate::outcome::OutcomeSpec;
use crate::process::{Process, Transition};
use crate::space::Space;
use crate::value::Value;

fn bits() -> Space {
    Space::finite("{0,1}", [Value::Int(0), Value::Int(1)])
}

fn ab() -> Space {
    Space::atoms("{a,b}", &["a", "b"])
}

/// From `s_x`, input `0` leads to `s_a` and `1` to `s_b`; the output is `x`.
pub fn two_state() -> Process {
    Process::new(
        Space::atoms("{sa,sb}", &["sa", "sb"]),
        bits(),
        ab(),
        Space::empty(),
        ChoiceKind::Det,
        |s, y| {
            let x = if s.as_atom() == Some("sa") { "a" } else { "b" };
            let next = if y.as_int() == Some(0) { "sa" } else { "sb" };
            Ok(Choice::det(Transition::cont(Value::atom(next), Value::atom(x))))
        },
    )
    .expect("valid example")
}

fn star() -> Space {
    Space::atoms("{*}", &["*"])
}

fn both_outputs() -> Vec<Transition> {
    ["a", "b"]
        .iter()
        .map(|o| Transition::cont(Value::atom("*"), Value::atom(o)))
        .collect()
}

/// One state; every input may be answered with `a` or with `b`.
pub fn ndet_ab() -> Process {
    Process::new(star(), bits(), ab(), Space::empty(), ChoiceKind::NDet, |_, _| {
        Choice::ndet(both_outputs())
    })
    .expect("valid example")
}

/// One state; every input is answered with `a` or `b`, each with
/// probability 1/2.
pub fn uniform_ab() -> Process {
    Process::new(star(), bits(), ab(), Space::empty(), ChoiceKind::Prob, |_, _| {
        Choice::uniform(both_outputs())
    })
    .expect("valid example")
}

fn pair_payoff(o: &Value) -> Result<Vec<f64>> {
    o.to_reals().ok_or_else(|| Error::Shape(format!("{o} is not a payoff pair")))
}

/// A closed process emitting the payoff pair `(x, y)` forever.
pub fn constant_stream(x: f64, y: f64) -> Process {
    Process::new(star(), Space::unit(), Space::reals(2), Space::empty(), ChoiceKind::Det, move |_, _| {
        Ok(Choice::det(Transition::cont(Value::atom("*"), Value::reals(&[x, y]))))
    })
    .expect("valid example")
}

/// A closed process tossing a fair coin each turn: heads pays `(1, 0)`,
/// tails `(0, 1)`. With probability `stop` the play ends instead, paying
/// `(2, 2)`.
pub fn coin_stream(stop: f64) -> Result<Process> {
    if !(0.0..1.0).contains(&stop) {
        return Err(Error::Param(format!("stop probability {stop} must lie in [0, 1)")));
    }
    Process::new(star(), Space::unit(), Space::reals(2), Space::reals(2), ChoiceKind::Prob, move |_, _| {
        let go = (1.0 - stop) / 2.0;
        Choice::prob([
            (Transition::cont(Value::atom("*"), Value::reals(&[1.0, 0.0])), go),
            (Transition::cont(Value::atom("*"), Value::reals(&[0.0, 1.0])), go),
            (Transition::Result(Value::reals(&[2.0, 2.0])), stop),
        ])
    })
}

/// Discounted outcome for two-player payoff streams.
pub fn pair_outcome(discount: f64, bound: f64) -> Result<OutcomeSpec> {
    OutcomeSpec::discounted(2, discount, bound, pair_payoff, pair_payoff)
}
