//! Processes and the combinators that build them from smaller ones.
//!
//! A process has states `S`, inputs `I`, outputs `O` and results `R`; one
//! step maps a state and an input to a [`Choice`] over [`Transition`]s,
//! either terminating with a result or continuing with a new state and an
//! output.
//!
//! Injection tags are fixed so composed values serialize the same way every
//! time: [`sum`] tags states, outputs and results with `L`/`R`; [`product`]
//! tags results `Both` (both sides ended), `L0` or `L1` (one side ended);
//! [`cascade`] tags results `L` (the first process ended) or `R` (the
//! second one did).

use std::fmt;
use std::sync::Arc;

use crate::choice::{combined_kind, flatten, pair, Choice, ChoiceKind};
use crate::error::{Error, Result};
use crate::space::Space;
use crate::value::Value;

/// Above this many state/input pairs, validation probes a strided sample.
pub const VALIDATION_LIMIT: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Transition {
    Result(Value),
    Continue { state: Value, output: Value },
}

impl Transition {
    pub fn cont(state: Value, output: Value) -> Transition {
        Transition::Continue { state, output }
    }
}

pub type StepFn = Arc<dyn Fn(&Value, &Value) -> Result<Choice<Transition>> + Send + Sync>;

#[derive(Clone)]
pub struct Process {
    states: Space,
    inputs: Space,
    outputs: Space,
    results: Space,
    kind: ChoiceKind,
    step: StepFn,
}

impl fmt::Debug for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Process")
            .field("states", &self.states)
            .field("inputs", &self.inputs)
            .field("outputs", &self.outputs)
            .field("results", &self.results)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Process {
    /// Builds a process and spot-validates it on its enumerated spaces.
    pub fn new(
        states: Space,
        inputs: Space,
        outputs: Space,
        results: Space,
        kind: ChoiceKind,
        step: impl Fn(&Value, &Value) -> Result<Choice<Transition>> + Send + Sync + 'static,
    ) -> Result<Process> {
        let p = Process::unchecked(states, inputs, outputs, results, kind, step);
        p.validate()?;
        Ok(p)
    }

    pub fn unchecked(
        states: Space,
        inputs: Space,
        outputs: Space,
        results: Space,
        kind: ChoiceKind,
        step: impl Fn(&Value, &Value) -> Result<Choice<Transition>> + Send + Sync + 'static,
    ) -> Process {
        Process {
            states,
            inputs,
            outputs,
            results,
            kind,
            step: Arc::new(step),
        }
    }

    pub fn states(&self) -> &Space {
        &self.states
    }

    pub fn inputs(&self) -> &Space {
        &self.inputs
    }

    pub fn outputs(&self) -> &Space {
        &self.outputs
    }

    pub fn results(&self) -> &Space {
        &self.results
    }

    pub fn kind(&self) -> ChoiceKind {
        self.kind
    }

    /// One step without membership checks.
    pub fn step(&self, state: &Value, input: &Value) -> Result<Choice<Transition>> {
        (self.step)(state, input)
    }

    /// One step, after checking that the arguments lie in their spaces.
    pub fn probe(&self, state: &Value, input: &Value) -> Result<Choice<Transition>> {
        for (space, v) in [(&self.states, state), (&self.inputs, input)] {
            if !space.contains(v) {
                return Err(Error::Membership {
                    space: space.name().to_string(),
                    value: v.to_string(),
                });
            }
        }
        self.step(state, input)
    }

    /// Checks one step result against the declared kind and spaces.
    pub fn check_step(&self, choice: &Choice<Transition>) -> Result<()> {
        if choice.kind() != self.kind {
            return Err(Error::Validation(format!(
                "step returned a {:?} choice, declared {:?}",
                choice.kind(),
                self.kind
            )));
        }
        choice.validate()?;
        for t in choice.support() {
            match t {
                Transition::Result(r) if !self.results.contains(r) => {
                    return Err(Error::Validation(format!("result {r} outside {}", self.results.name())))
                }
                Transition::Continue { state, .. } if !self.states.contains(state) => {
                    return Err(Error::Validation(format!("state {state} outside {}", self.states.name())))
                }
                Transition::Continue { output, .. } if !self.outputs.contains(output) => {
                    return Err(Error::Validation(format!("output {output} outside {}", self.outputs.name())))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Probes every enumerated state/input pair (a strided sample above
    /// [`VALIDATION_LIMIT`]) and checks each result with [`Self::check_step`].
    pub fn validate(&self) -> Result<()> {
        let (Some(states), Some(inputs)) = (self.states.elements(), self.inputs.elements()) else {
            return Ok(());
        };
        let total = states.len() * inputs.len();
        let stride = total.div_ceil(VALIDATION_LIMIT).max(1);
        for k in (0..total).step_by(stride) {
            let s = &states[k / inputs.len()];
            let i = &inputs[k % inputs.len()];
            let choice = self.step(s, i)?;
            self.check_step(&choice)
                .map_err(|e| Error::Validation(format!("at state {s}, input {i}: {e}")))?;
        }
        Ok(())
    }
}

fn tagged_parts<'a>(v: &'a Value, what: &str) -> Result<(&'a str, &'a Value)> {
    v.as_tagged()
        .ok_or_else(|| Error::Shape(format!("{what} {v} is not a tagged injection")))
}

fn pair_parts<'a>(v: &'a Value, what: &str) -> Result<(&'a Value, &'a Value)> {
    match v.as_tuple() {
        Some([a, b]) => Ok((a, b)),
        _ => Err(Error::Shape(format!("{what} {v} is not a pair"))),
    }
}

/// Either the first or the second process steps, depending on which
/// summand the state belongs to. Both must share the choice functor and the
/// input space.
pub fn sum(p0: &Process, p1: &Process) -> Result<Process> {
    if p0.kind != p1.kind {
        return Err(Error::KindMismatch(p0.kind, p1.kind));
    }
    if !p0.inputs.same_as(&p1.inputs) {
        return Err(Error::InputMismatch(p0.inputs.name().into(), p1.inputs.name().into()));
    }
    let (a, b) = (p0.clone(), p1.clone());
    Ok(Process::unchecked(
        Space::sum(vec![("L", p0.states.clone()), ("R", p1.states.clone())]),
        p0.inputs.clone(),
        Space::sum(vec![("L", p0.outputs.clone()), ("R", p1.outputs.clone())]),
        Space::sum(vec![("L", p0.results.clone()), ("R", p1.results.clone())]),
        p0.kind,
        move |s, i| {
            let (tag, inner) = tagged_parts(s, "sum state")?;
            let p = match tag {
                "L" => &a,
                "R" => &b,
                other => return Err(Error::Shape(format!("unknown sum tag {other}"))),
            };
            Ok(p.step(inner, i)?.map(|t| match t {
                Transition::Result(r) => Transition::Result(Value::tagged(tag, r.clone())),
                Transition::Continue { state, output } => {
                    Transition::cont(Value::tagged(tag, state.clone()), Value::tagged(tag, output.clone()))
                }
            }))
        },
    ))
}

fn joint(x0: &Transition, x1: &Transition) -> Transition {
    match (x0, x1) {
        (Transition::Result(r0), Transition::Result(r1)) => {
            Transition::Result(Value::tagged("Both", Value::pair(r0.clone(), r1.clone())))
        }
        (Transition::Result(r0), _) => Transition::Result(Value::tagged("L0", r0.clone())),
        (_, Transition::Result(r1)) => Transition::Result(Value::tagged("L1", r1.clone())),
        (
            Transition::Continue { state: s0, output: c0 },
            Transition::Continue { state: s1, output: c1 },
        ) => Transition::cont(Value::pair(s0.clone(), s1.clone()), Value::pair(c0.clone(), c1.clone())),
    }
}

/// Both processes step simultaneously on their halves of a pair input.
pub fn product(p0: &Process, p1: &Process) -> Result<Process> {
    let kind = combined_kind(p0.kind, p1.kind)?;
    let (a, b) = (p0.clone(), p1.clone());
    Ok(Process::unchecked(
        Space::product(vec![p0.states.clone(), p1.states.clone()]),
        Space::product(vec![p0.inputs.clone(), p1.inputs.clone()]),
        Space::product(vec![p0.outputs.clone(), p1.outputs.clone()]),
        Space::sum(vec![
            ("Both", Space::product(vec![p0.results.clone(), p1.results.clone()])),
            ("L0", p0.results.clone()),
            ("L1", p1.results.clone()),
        ]),
        kind,
        move |s, i| {
            let (s0, s1) = pair_parts(s, "product state")?;
            let (i0, i1) = pair_parts(i, "product input")?;
            let c0 = a.step(s0, i0)?;
            let c1 = b.step(s1, i1)?;
            Ok(pair(&c0, &c1)?.map(|(x0, x1)| joint(x0, x1)))
        },
    ))
}

/// The n-ary product over flat tuples. A joint step in which some component
/// terminates yields `Ended(t)`, where `t` holds the result of every
/// component that ended and `()` for the others.
pub fn product_all(components: &[Process]) -> Result<Process> {
    if components.is_empty() {
        return Err(Error::Shape("empty product".into()));
    }
    let kind = components
        .iter()
        .try_fold(ChoiceKind::Det, |k, p| combined_kind(k, p.kind))?;
    let parts: Vec<Process> = components.to_vec();
    let n = parts.len();
    let collect = |f: fn(&Process) -> &Space| Space::product(components.iter().map(|p| f(p).clone()).collect());
    let result_spaces: Vec<Space> = components.iter().map(|p| p.results.clone()).collect();
    let results = Space::predicate(
        &format!("Ended{}", collect(Process::results).name()),
        move |v| match v.as_tagged() {
            Some(("Ended", Value::Tuple(items))) if items.len() == result_spaces.len() => items
                .iter()
                .zip(&result_spaces)
                .all(|(x, r)| *x == Value::Unit || r.contains(x)),
            _ => false,
        },
    );
    Ok(Process::unchecked(
        collect(Process::states),
        collect(Process::inputs),
        collect(Process::outputs),
        results,
        kind,
        move |s, i| {
            let (ss, is) = match (s.as_tuple(), i.as_tuple()) {
                (Some(ss), Some(is)) if ss.len() == n && is.len() == n => (ss, is),
                _ => return Err(Error::Shape(format!("expected {n}-tuples, got state {s}, input {i}"))),
            };
            let mut acc: Choice<Vec<Transition>> = Choice::det(Vec::new());
            for ((p, s), i) in parts.iter().zip(ss).zip(is) {
                let c = p.step(s, i)?;
                acc = pair(&acc, &c)?.map(|(v, x)| {
                    let mut v = v.clone();
                    v.push(x.clone());
                    v
                });
            }
            Ok(acc.map(|xs| {
                if xs.iter().any(|x| matches!(x, Transition::Result(_))) {
                    Transition::Result(Value::tagged(
                        "Ended",
                        Value::Tuple(
                            xs.iter()
                                .map(|x| match x {
                                    Transition::Result(r) => r.clone(),
                                    Transition::Continue { .. } => Value::Unit,
                                })
                                .collect(),
                        ),
                    ))
                } else {
                    let (states, outputs) = xs
                        .iter()
                        .map(|x| match x {
                            Transition::Continue { state, output } => (state.clone(), output.clone()),
                            Transition::Result(_) => unreachable!(),
                        })
                        .unzip();
                    Transition::cont(Value::Tuple(states), Value::Tuple(outputs))
                }
            }))
        },
    ))
}

/// Applies `f` to every continuing state/output pair; results pass through.
pub fn map_output(
    p: &Process,
    outputs: Space,
    f: impl Fn(&Value, &Value) -> (Value, Value) + Send + Sync + 'static,
) -> Process {
    let inner = p.clone();
    Process::unchecked(
        p.states.clone(),
        p.inputs.clone(),
        outputs,
        p.results.clone(),
        p.kind,
        move |s, i| {
            Ok(inner.step(s, i)?.map(|t| match t {
                Transition::Result(r) => Transition::Result(r.clone()),
                Transition::Continue { state, output } => {
                    let (state, output) = f(state, output);
                    Transition::Continue { state, output }
                }
            }))
        },
    )
}

/// Applies `f` to each input before the step.
pub fn map_input(inputs: Space, f: impl Fn(&Value) -> Value + Send + Sync + 'static, p: &Process) -> Process {
    let inner = p.clone();
    Process::unchecked(
        p.states.clone(),
        inputs,
        p.outputs.clone(),
        p.results.clone(),
        p.kind,
        move |s, i| inner.step(s, &f(i)),
    )
}

/// Applies `f` to results; continuations pass through.
pub fn map_results(p: &Process, results: Space, f: impl Fn(&Value) -> Value + Send + Sync + 'static) -> Process {
    let inner = p.clone();
    Process::unchecked(
        p.states.clone(),
        p.inputs.clone(),
        p.outputs.clone(),
        results,
        p.kind,
        move |s, i| {
            Ok(inner.step(s, i)?.map(|t| match t {
                Transition::Result(r) => Transition::Result(f(r)),
                other => other.clone(),
            }))
        },
    )
}

/// Re-presents the state space through a bijection: `to_inner` maps the new
/// representation to the old one, `from_inner` maps back.
pub fn map_states(
    p: &Process,
    states: Space,
    to_inner: impl Fn(&Value) -> Result<Value> + Send + Sync + 'static,
    from_inner: impl Fn(&Value) -> Value + Send + Sync + 'static,
) -> Process {
    let inner = p.clone();
    Process::unchecked(
        states,
        p.inputs.clone(),
        p.outputs.clone(),
        p.results.clone(),
        p.kind,
        move |s, i| {
            Ok(inner.step(&to_inner(s)?, i)?.map(|t| match t {
                Transition::Continue { state, output } => Transition::cont(from_inner(state), output.clone()),
                other => other.clone(),
            }))
        },
    )
}

/// Feeds the previous output back as the second half of the input. The
/// process must take inputs `I × O` where `O` is its output space; the
/// result has states `S × O` and inputs `I`.
pub fn feedback(p: &Process) -> Result<Process> {
    let (own_inputs, fed) = p
        .inputs
        .as_pair()
        .ok_or_else(|| Error::Shape(format!("feedback needs inputs I × O, got {}", p.inputs.name())))?;
    if !fed.same_as(&p.outputs) {
        return Err(Error::Shape(format!(
            "feedback input {} does not match output space {}",
            fed.name(),
            p.outputs.name()
        )));
    }
    let inner = p.clone();
    Ok(Process::unchecked(
        Space::product(vec![p.states.clone(), p.outputs.clone()]),
        own_inputs.clone(),
        p.outputs.clone(),
        p.results.clone(),
        p.kind,
        move |sc, i| {
            let (s, c) = pair_parts(sc, "feedback state")?;
            Ok(inner.step(s, &Value::pair(i.clone(), c.clone()))?.map(|t| match t {
                Transition::Continue { state, output } => {
                    Transition::cont(Value::pair(state.clone(), output.clone()), output.clone())
                }
                other => other.clone(),
            }))
        },
    ))
}

/// Runs `p` and feeds each of its outputs to `q`. If `p` ends, its result
/// is returned tagged `L`; if `q` ends, its result is returned tagged `R`
/// and `p`'s successor state is dropped.
pub fn cascade(p: &Process, q: &Process) -> Result<Process> {
    if !p.outputs.same_as(&q.inputs) {
        return Err(Error::Shape(format!(
            "cascade: outputs {} do not match inputs {}",
            p.outputs.name(),
            q.inputs.name()
        )));
    }
    let kind = combined_kind(p.kind, q.kind)?;
    let (first, second) = (p.clone(), q.clone());
    Ok(Process::unchecked(
        Space::product(vec![p.states.clone(), q.states.clone()]),
        p.inputs.clone(),
        q.outputs.clone(),
        Space::sum(vec![("L", p.results.clone()), ("R", q.results.clone())]),
        kind,
        move |st, i| {
            let (s, t) = pair_parts(st, "cascade state")?;
            let staged = first.step(s, i)?.try_map(|x| match x {
                Transition::Result(r) => Ok(Choice::det(Transition::Result(Value::tagged("L", r.clone())))),
                Transition::Continue { state: s2, output: m } => Ok(second.step(t, m)?.map(|y| match y {
                    Transition::Result(r) => Transition::Result(Value::tagged("R", r.clone())),
                    Transition::Continue { state: t2, output: o } => {
                        Transition::cont(Value::pair(s2.clone(), t2.clone()), o.clone())
                    }
                })),
            })?;
            flatten(staged)
        },
    ))
}
