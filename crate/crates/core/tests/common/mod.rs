//! Random generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use koalg::choice::{Choice, ChoiceKind};
use koalg::process::{Process, Transition};
use koalg::space::Space;
use koalg::value::Value;
use rand::seq::IndexedRandom;
use rand::Rng;

pub const KINDS: [ChoiceKind; 3] = [ChoiceKind::Det, ChoiceKind::NDet, ChoiceKind::Prob];

/// Random positive weights normalised to sum to one.
pub fn random_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// A choice of `kind` over distinct draws from `pool`.
pub fn random_choice_from<T: Ord + Clone>(rng: &mut impl Rng, kind: ChoiceKind, pool: &[T]) -> Choice<T> {
    match kind {
        ChoiceKind::Det => Choice::det(pool.choose(rng).unwrap().clone()),
        _ => {
            let n = rng.random_range(1..=pool.len().min(4));
            let picked: Vec<T> = pool.choose_multiple(rng, n).cloned().collect();
            if kind == ChoiceKind::NDet {
                Choice::ndet(picked).unwrap()
            } else {
                let w = random_weights(rng, n);
                Choice::prob(picked.into_iter().zip(w)).unwrap()
            }
        }
    }
}

pub fn random_choice(rng: &mut impl Rng, kind: ChoiceKind) -> Choice<i64> {
    let pool: Vec<i64> = (-5..=5).collect();
    random_choice_from(rng, kind, &pool)
}

/// A process over enumerated spaces with at most 4 states and 3 inputs whose
/// step table is drawn once and then fixed.
pub fn random_process(rng: &mut impl Rng, kind: ChoiceKind) -> (Process, Value) {
    let n_states = rng.random_range(1..=4);
    let n_inputs = rng.random_range(1..=3);
    let states: Vec<Value> = (0..n_states).map(|i| Value::atom(&format!("s{i}"))).collect();
    let inputs: Vec<Value> = (0..n_inputs).map(Value::int).collect();
    let outputs = [Value::atom("x"), Value::atom("y")];
    let results = [Value::atom("r"), Value::atom("q")];
    let mut pool: Vec<Transition> = Vec::new();
    for s in &states {
        for o in &outputs {
            pool.push(Transition::cont(s.clone(), o.clone()));
        }
    }
    // results are kept rare so that most trees reach the depth bound
    if rng.random_bool(0.5) {
        pool.push(Transition::Result(results[rng.random_range(0..2)].clone()));
    }
    let mut table = BTreeMap::new();
    for s in &states {
        for c in &inputs {
            table.insert((s.clone(), c.clone()), random_choice_from(rng, kind, &pool));
        }
    }
    let process = Process::new(
        Space::finite("S", states.clone()),
        Space::finite("I", inputs),
        Space::finite("O", outputs),
        Space::finite("R", results),
        kind,
        move |s, c| Ok(table[&(s.clone(), c.clone())].clone()),
    )
    .expect("random process is well-formed");
    (process, states[0].clone())
}
