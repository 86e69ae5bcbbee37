//! Outcomes of game trees: a local fold over one layer, extended to whole
//! (possibly truncated) trees with a certified error radius.
//!
//! A truncated leaf stands for the unknown rest of the play. Its value is
//! taken as `0` with radius `M/(1−λ)`, and every layer above it contracts
//! the radius by `λ`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::choice::{ChoiceKind, View};
use crate::error::{Error, Result};
use crate::exec::{par_map, Parallelism};
use crate::game::{rollout_with_rng, NDetPolicy, TraceStep};
use crate::json::number;
use crate::process::{Process, Transition};
use crate::tree::{unfold, GameTree, Label, Node};
use crate::value::{Real, Value};

/// Largest number of distinct states kept per layer by the forward pass.
pub const LAYER_BUDGET: usize = 1_000_000;

/// Largest number of resolutions [`evaluate_ndet`] will enumerate.
pub const RESOLUTION_CAP: usize = 10_000;

pub type PayoffFn = Arc<dyn Fn(&Value) -> Result<Vec<f64>> + Send + Sync>;
pub type TauStepFn = Arc<dyn Fn(&[f64], &Value) -> Result<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
enum Tau {
    /// `τ(u, o) = λ·u + payoff(o)`.
    Discounted(PayoffFn),
    Custom(TauStepFn),
}

#[derive(Clone)]
pub struct OutcomeSpec {
    players: usize,
    tau_result: PayoffFn,
    tau: Tau,
    discount: f64,
    output_bound: f64,
}

impl fmt::Debug for OutcomeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OutcomeSpec")
            .field("players", &self.players)
            .field("discounted", &matches!(self.tau, Tau::Discounted(_)))
            .field("discount", &self.discount)
            .field("output_bound", &self.output_bound)
            .finish()
    }
}

fn check_discount(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("discount {lambda} must lie strictly between 0 and 1")))
    }
}

impl OutcomeSpec {
    /// The discounted sum: results count as `tau_result(r)`, each output
    /// contributes `payoff(o)` and everything after it is scaled by `λ`.
    pub fn discounted(
        players: usize,
        discount: f64,
        output_bound: f64,
        payoff: impl Fn(&Value) -> Result<Vec<f64>> + Send + Sync + 'static,
        tau_result: impl Fn(&Value) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Result<OutcomeSpec> {
        let spec = OutcomeSpec {
            players,
            tau_result: Arc::new(tau_result),
            tau: Tau::Discounted(Arc::new(payoff)),
            discount,
            output_bound,
        };
        spec.check_basic()?;
        Ok(spec)
    }

    /// An arbitrary `tau_step`, which must contract by `discount` in its
    /// first argument. `sample_outputs` feed the contraction probe.
    pub fn custom(
        players: usize,
        discount: f64,
        output_bound: f64,
        tau_step: impl Fn(&[f64], &Value) -> Result<Vec<f64>> + Send + Sync + 'static,
        tau_result: impl Fn(&Value) -> Result<Vec<f64>> + Send + Sync + 'static,
        sample_outputs: &[Value],
    ) -> Result<OutcomeSpec> {
        let spec = OutcomeSpec {
            players,
            tau_result: Arc::new(tau_result),
            tau: Tau::Custom(Arc::new(tau_step)),
            discount,
            output_bound,
        };
        spec.check_basic()?;
        spec.check_contraction(sample_outputs, 0)?;
        Ok(spec)
    }

    fn check_basic(&self) -> Result<()> {
        check_discount(self.discount)?;
        if !(self.output_bound >= 0.0 && self.output_bound.is_finite()) {
            return Err(Error::Validation(format!("output bound {} must be finite and ≥ 0", self.output_bound)));
        }
        if self.players == 0 {
            return Err(Error::Validation("outcome needs at least one player".into()));
        }
        Ok(())
    }

    /// Same spec with another discount. Discounted specs only.
    pub fn with_discount(&self, discount: f64) -> Result<OutcomeSpec> {
        check_discount(discount)?;
        if !self.is_discounted() {
            return Err(Error::Validation("only discounted outcome specs can be re-discounted".into()));
        }
        Ok(OutcomeSpec {
            discount,
            ..self.clone()
        })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn output_bound(&self) -> f64 {
        self.output_bound
    }

    pub fn is_discounted(&self) -> bool {
        matches!(self.tau, Tau::Discounted(_))
    }

    /// Radius of a truncated leaf, `M/(1−λ)`.
    pub fn tail_radius(&self) -> f64 {
        self.output_bound / (1.0 - self.discount)
    }

    fn arity(&self, v: Vec<f64>) -> Result<Vec<f64>> {
        if v.len() == self.players {
            Ok(v)
        } else {
            Err(Error::Shape(format!("outcome vector of length {}, expected {}", v.len(), self.players)))
        }
    }

    pub fn tau_result(&self, r: &Value) -> Result<Vec<f64>> {
        self.arity((self.tau_result)(r)?)
    }

    pub fn tau_step(&self, u: &[f64], o: &Value) -> Result<Vec<f64>> {
        match &self.tau {
            Tau::Discounted(payoff) => {
                let pay = self.arity(payoff(o)?)?;
                Ok(u.iter().zip(pay).map(|(x, y)| self.discount * x + y).collect())
            }
            Tau::Custom(f) => self.arity(f(u, o)?),
        }
    }

    /// Checks `‖τ(u,o) − τ(v,o)‖∞ ≤ λ‖u − v‖∞` on random `u`, `v` for each
    /// sample output.
    pub fn check_contraction(&self, outputs: &[Value], seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = self.tail_radius().max(1.0);
        for o in outputs {
            for _ in 0..32 {
                let u: Vec<f64> = (0..self.players).map(|_| rng.random_range(-scale..scale)).collect();
                let v: Vec<f64> = (0..self.players).map(|_| rng.random_range(-scale..scale)).collect();
                let (tu, tv) = (self.tau_step(&u, o)?, self.tau_step(&v, o)?);
                if sup_dist(&tu, &tv) > self.discount * sup_dist(&u, &v) + 1e-9 {
                    return Err(Error::Validation(format!("tau_step does not contract by {} at output {o}", self.discount)));
                }
            }
        }
        Ok(())
    }

    /// Checks that a transition respects the declared bound: outputs
    /// contribute at most `M`, results at most `M/(1−λ)`.
    pub fn check_bound(&self, t: &Transition) -> Result<()> {
        let slack = 1e-9 * (1.0 + self.output_bound);
        let (what, v, limit) = match t {
            Transition::Result(r) => ("result", self.tau_result(r)?, self.tail_radius()),
            Transition::Continue { output, .. } => ("output", self.tau_step(&vec![0.0; self.players], output)?, self.output_bound),
        };
        if sup_norm(&v) > limit + slack {
            return Err(Error::Validation(format!(
                "{what} contributes {:?}, beyond the declared bound {limit}",
                v
            )));
        }
        Ok(())
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeResult {
    pub value: Vec<f64>,
    pub error_bound: f64,
    pub exact: bool,
}

impl OutcomeResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "value": self.value.iter().map(|&x| number(x)).collect::<Vec<_>>(),
            "error_bound": number(self.error_bound),
            "exact": self.exact,
        })
    }

    fn key(&self) -> (Vec<Real>, Real, bool) {
        (self.value.iter().map(|&x| Real::new(x)).collect(), Real::new(self.error_bound), self.exact)
    }
}

struct Partial {
    value: Vec<f64>,
    error: f64,
    exact: bool,
}

/// Folds a Det or Prob tree whose nodes each see a single input.
pub fn evaluate(t: &GameTree, spec: &OutcomeSpec) -> Result<OutcomeResult> {
    if t.kind == ChoiceKind::NDet {
        return Err(Error::NDetOutcome);
    }
    let p = eval_node(&t.root, spec)?;
    Ok(finish(p))
}

fn finish(p: Partial) -> OutcomeResult {
    OutcomeResult {
        value: p.value,
        error_bound: if p.exact { 0.0 } else { p.error },
        exact: p.exact,
    }
}

fn single_input(node: &Node) -> Result<()> {
    if let Some(first) = node.edges.first() {
        if node.edges.iter().any(|e| e.input != first.input) {
            return Err(Error::Shape("outcome needs one input per node (close the game first)".into()));
        }
    }
    Ok(())
}

fn eval_node(node: &Node, spec: &OutcomeSpec) -> Result<Partial> {
    let n = spec.players;
    match &node.label {
        Label::Result(r) => {
            return Ok(Partial {
                value: spec.tau_result(r)?,
                error: 0.0,
                exact: true,
            })
        }
        Label::Truncated => {
            return Ok(Partial {
                value: vec![0.0; n],
                error: spec.tail_radius(),
                exact: false,
            })
        }
        Label::Root | Label::Output(_) => {}
    }
    single_input(node)?;
    if node.edges.is_empty() {
        return Err(Error::Shape("inner node without successors".into()));
    }
    let mut value = vec![0.0; n];
    let mut error = 0.0;
    let mut exact = true;
    for e in &node.edges {
        let w = e.probability.unwrap_or(1.0);
        let child = eval_node(&e.target, spec)?;
        for (acc, x) in value.iter_mut().zip(&child.value) {
            *acc += w * x;
        }
        error += w * child.error;
        exact &= child.exact;
    }
    Ok(match &node.label {
        Label::Output(o) => Partial {
            value: spec.tau_step(&value, o)?,
            error: spec.discount * error,
            exact,
        },
        _ => Partial { value, error, exact },
    })
}

/// All outcomes obtainable by resolving the non-determinism of `t`.
pub fn evaluate_ndet(t: &GameTree, spec: &OutcomeSpec) -> Result<Vec<OutcomeResult>> {
    if t.kind == ChoiceKind::Prob {
        return Err(Error::KindMismatch(ChoiceKind::NDet, ChoiceKind::Prob));
    }
    let set = ndet_node(&t.root, spec)?;
    Ok(set.into_values().collect())
}

type OutcomeSet = BTreeMap<(Vec<Real>, Real, bool), OutcomeResult>;

fn ndet_node(node: &Node, spec: &OutcomeSpec) -> Result<OutcomeSet> {
    let mut out = OutcomeSet::new();
    match &node.label {
        Label::Result(_) | Label::Truncated => {
            let r = finish(eval_node(node, spec)?);
            out.insert(r.key(), r);
            return Ok(out);
        }
        Label::Root | Label::Output(_) => {}
    }
    single_input(node)?;
    for e in &node.edges {
        for (_, child) in ndet_node(&e.target, spec)? {
            let r = match &node.label {
                Label::Output(o) => OutcomeResult {
                    value: spec.tau_step(&child.value, o)?,
                    error_bound: spec.discount * child.error_bound,
                    exact: child.exact,
                },
                _ => child,
            };
            out.insert(r.key(), r);
            if out.len() > RESOLUTION_CAP {
                return Err(Error::ResolutionExplosion { limit: RESOLUTION_CAP });
            }
        }
    }
    Ok(out)
}

/// Smallest depth whose truncation radius `λ^d·M/(1−λ)` is at most `eps`.
pub fn depth_for_tolerance(spec: &OutcomeSpec, eps: f64) -> Result<usize> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Validation(format!("tolerance {eps} must be positive")));
    }
    let radius = spec.tail_radius();
    if eps >= radius {
        return Ok(0);
    }
    let d = ((eps / radius).ln() / spec.discount.ln()).ceil();
    let mut d = d.max(0.0) as usize;
    // guard against rounding in the logarithms
    while spec.discount.powi(d as i32) * radius > eps {
        d += 1;
    }
    Ok(d)
}

/// Evaluates a closed process to within `eps`.
///
/// Discounted specs use a forward pass that merges equal states layer by
/// layer, so repeated games with small state spaces stay cheap. Custom specs
/// unfold the tree and fold it.
pub fn evaluate_to_tolerance(closed: &Process, initial: &Value, spec: &OutcomeSpec, eps: f64) -> Result<OutcomeResult> {
    let depth = depth_for_tolerance(spec, eps)?;
    if spec.is_discounted() {
        forward(closed, initial, spec, depth)
    } else {
        evaluate(&unfold(closed, initial, depth)?, spec)
    }
}

/// Expected discounted sum over `depth` turns, with states aggregated per
/// layer.
pub fn forward(closed: &Process, initial: &Value, spec: &OutcomeSpec, depth: usize) -> Result<OutcomeResult> {
    if closed.kind() == ChoiceKind::NDet {
        return Err(Error::NDetOutcome);
    }
    let unit = unit_input(closed)?;
    let n = spec.players;
    let mut value = vec![0.0; n];
    let mut layer: BTreeMap<Value, f64> = BTreeMap::from([(initial.clone(), 1.0)]);
    let mut scale = 1.0;
    for _ in 0..depth {
        if layer.is_empty() {
            break;
        }
        let mut next: BTreeMap<Value, f64> = BTreeMap::new();
        for (state, mass) in &layer {
            let choice = closed.step(state, &unit)?;
            let entries: Vec<(&Transition, f64)> = match choice.view() {
                View::Det(t) => vec![(t, 1.0)],
                View::Prob(ts) => ts.iter().map(|(t, p)| (t, *p)).collect(),
                View::NDet(_) => return Err(Error::NDetOutcome),
            };
            for (t, p) in entries {
                let w = mass * p;
                let contribution = match t {
                    Transition::Result(r) => spec.tau_result(r)?,
                    Transition::Continue { state, output } => {
                        *next.entry(state.clone()).or_insert(0.0) += w;
                        spec.tau_step(&vec![0.0; n], output)?
                    }
                };
                for (acc, x) in value.iter_mut().zip(contribution) {
                    *acc += scale * w * x;
                }
            }
        }
        if next.len() > LAYER_BUDGET {
            return Err(Error::Explosion(format!("more than {LAYER_BUDGET} distinct states in one layer")));
        }
        layer = next;
        scale *= spec.discount;
    }
    let remaining: f64 = layer.values().sum();
    let exact = layer.is_empty();
    Ok(OutcomeResult {
        value,
        error_bound: if exact { 0.0 } else { remaining * scale * spec.tail_radius() },
        exact,
    })
}

fn unit_input(closed: &Process) -> Result<Value> {
    match closed.inputs().elements() {
        Some([only]) => Ok(only.clone()),
        _ => Err(Error::Shape(format!("expected a closed process, inputs are {}", closed.inputs().name()))),
    }
}

/// The outcome of one finite play, folding `τ` from the end. A play that
/// stops without a result is valued `0` beyond its last output.
pub fn trace_outcome(trace: &[TraceStep], spec: &OutcomeSpec) -> Result<Vec<f64>> {
    let mut v = vec![0.0; spec.players];
    for step in trace.iter().rev() {
        v = match &step.transition {
            Transition::Result(r) => spec.tau_result(r)?,
            Transition::Continue { output, .. } => spec.tau_step(&v, output)?,
        };
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarlo {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub samples: usize,
}

/// Seeded Monte Carlo estimate of the outcome over `turns`-step plays.
/// Sample `i` draws from its own ChaCha stream, so the estimate does not
/// depend on how samples are scheduled.
pub fn monte_carlo(
    closed: &Process,
    initial: &Value,
    spec: &OutcomeSpec,
    turns: usize,
    samples: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<MonteCarlo> {
    if samples == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    let ids: Vec<u64> = (0..samples as u64).collect();
    let values = par_map(mode, &ids, |&i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let trace = rollout_with_rng(closed, initial, turns, &mut rng, NDetPolicy::Error)?;
        trace_outcome(&trace, spec)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let n = spec.players;
    let count = samples as f64;
    let mut mean = vec![0.0; n];
    for v in &values {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x / count;
        }
    }
    let mut var = vec![0.0; n];
    for v in &values {
        for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
            *s += (x - m).powi(2);
        }
    }
    let std_error = var
        .iter()
        .map(|s| if samples > 1 { (s / (count - 1.0) / count).sqrt() } else { f64::INFINITY })
        .collect();
    Ok(MonteCarlo { mean, std_error, samples })
}

/// Distinct outcomes, for callers that want set semantics.
pub fn outcome_set(results: &[OutcomeResult]) -> BTreeSet<Vec<Real>> {
    results.iter().map(|r| r.value.iter().map(|&x| Real::new(x)).collect()).collect()
}
