//! Games, strategies, and closing a game by fixing every player's strategy.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::choice::{combined_kind, Choice, ChoiceKind, View};
use crate::error::{Error, Result};
use crate::outcome::OutcomeSpec;
use crate::process::{cascade, VALIDATION_LIMIT, feedback, map_input, map_results, map_states, product_all, Process, Transition};
use crate::space::Space;
use crate::value::Value;

pub type ObserveFn = Arc<dyn Fn(&Value, &Value) -> Value + Send + Sync>;

/// One participant: the actions they may take, what they can observe, and
/// the observation function `β(previous output, previous profile)`.
#[derive(Clone)]
pub struct Player {
    pub id: String,
    pub actions: Space,
    pub observations: Space,
    pub observe: ObserveFn,
}

impl Player {
    pub fn new(
        id: &str,
        actions: Space,
        observations: Space,
        observe: impl Fn(&Value, &Value) -> Value + Send + Sync + 'static,
    ) -> Player {
        Player {
            id: id.to_string(),
            actions,
            observations,
            observe: Arc::new(observe),
        }
    }
}

impl fmt::Debug for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Player")
            .field("id", &self.id)
            .field("actions", &self.actions)
            .field("observations", &self.observations)
            .finish()
    }
}

/// How observations are laid out, so catalog strategies know where to look.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservationSchema {
    /// `(previous profile, own payoff)`.
    FullProfile,
    /// `(own previous action, own payoff)`.
    OwnPayoff,
    /// `(own payoff, public signal, own previous action)`.
    PublicSignal,
    /// The information cell of the drawn type, or `*` before the draw.
    TypeSignal,
    /// The current friendship graph.
    Network,
    Custom,
}

/// The data a game is built from.
#[derive(Clone, Debug)]
pub struct GameDef {
    pub name: String,
    pub players: Vec<Player>,
    pub core: Process,
    pub outcome: OutcomeSpec,
    pub initial_state: Value,
    /// The imaginary output of the turn before the first one.
    pub seed_output: Value,
    /// The imaginary action profile of the turn before the first one.
    pub seed_actions: Value,
    pub schema: ObservationSchema,
}

/// A validated game. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Game {
    def: Arc<GameDef>,
}

impl Deref for Game {
    type Target = GameDef;

    fn deref(&self) -> &GameDef {
        &self.def
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

impl Game {
    pub fn new(def: GameDef) -> Result<Game> {
        if def.players.is_empty() {
            return Err(invalid("a game needs at least one player"));
        }
        for (i, p) in def.players.iter().enumerate() {
            if def.players[..i].iter().any(|q| q.id == p.id) {
                return Err(invalid(format!("player id {} appears twice", p.id)));
            }
            match p.actions.elements() {
                Some([]) => return Err(invalid(format!("player {} has no actions", p.id))),
                None => {
                    return Err(invalid(format!(
                        "actions of player {} must be an enumerated set, got {}",
                        p.id,
                        p.actions.name()
                    )))
                }
                Some(_) => {}
            }
        }
        let profiles = action_profiles(&def.players);
        if !def.core.inputs().same_as(&profiles) {
            return Err(invalid(format!(
                "core inputs {} are not the action profiles {}",
                def.core.inputs().name(),
                profiles.name()
            )));
        }
        if !def.core.states().contains(&def.initial_state) {
            return Err(invalid(format!("initial state {} is not a game state", def.initial_state)));
        }
        if !def.core.outputs().contains(&def.seed_output) {
            return Err(invalid(format!("seed output {} is not an output", def.seed_output)));
        }
        if !profiles.contains(&def.seed_actions) {
            return Err(invalid(format!("seed actions {} are not an action profile", def.seed_actions)));
        }
        for p in &def.players {
            let b = (p.observe)(&def.seed_output, &def.seed_actions);
            if !p.observations.contains(&b) {
                return Err(invalid(format!(
                    "first observation {b} of player {} lies outside {}",
                    p.id,
                    p.observations.name()
                )));
            }
        }
        if def.outcome.players() != def.players.len() {
            return Err(invalid(format!(
                "outcome has {} components for {} players",
                def.outcome.players(),
                def.players.len()
            )));
        }
        check_outcome_bound(&def)?;
        Ok(Game { def: Arc::new(def) })
    }

    pub fn def(&self) -> &GameDef {
        &self.def
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    /// Index of a player, by id or by 1-based position.
    pub fn player_index(&self, key: &str) -> Result<usize> {
        if let Some(i) = self.players.iter().position(|p| p.id == key) {
            return Ok(i);
        }
        match key.parse::<usize>() {
            Ok(k) if (1..=self.players.len()).contains(&k) => Ok(k - 1),
            _ => Err(Error::Validation(format!("no player {key}"))),
        }
    }

    pub fn profiles(&self) -> Space {
        action_profiles(&self.players)
    }

    /// A copy with a different outcome specification.
    pub fn with_outcome(&self, outcome: OutcomeSpec) -> Result<Game> {
        let mut def = (*self.def).clone();
        def.outcome = outcome;
        Game::new(def)
    }

    pub fn observe(&self, p: usize, output: &Value, profile: &Value) -> Value {
        (self.players[p].observe)(output, profile)
    }

    /// Each player's observation of an (output, profile) pair.
    pub fn observe_all(&self, output: &Value, profile: &Value) -> Value {
        Value::Tuple((0..self.players.len()).map(|p| self.observe(p, output, profile)).collect())
    }
}

fn action_profiles(players: &[Player]) -> Space {
    Space::product(players.iter().map(|p| p.actions.clone()).collect())
}

/// Probes the core on enumerated state/profile pairs and checks every
/// transition against the outcome's declared bound.
fn check_outcome_bound(def: &GameDef) -> Result<()> {
    let profiles = action_profiles(&def.players);
    let states: Vec<Value> = match def.core.states().elements() {
        Some(els) => els.to_vec(),
        None => vec![def.initial_state.clone()],
    };
    let inputs = profiles.elements().unwrap_or(&[]);
    let total = states.len() * inputs.len();
    let stride = total.div_ceil(VALIDATION_LIMIT).max(1);
    for k in (0..total).step_by(stride) {
        let (s, a) = (&states[k / inputs.len()], &inputs[k % inputs.len()]);
        for t in def.core.step(s, a)?.support() {
            def.outcome.check_bound(t)?;
        }
    }
    Ok(())
}

pub type StrategyStepFn = Arc<dyn Fn(&Value, &Value) -> Result<Choice<(Value, Value)>> + Send + Sync>;

/// A strategy together with its initial epistemic state. The step maps an
/// epistemic state and an observation to a choice of (next epistemic state,
/// action).
#[derive(Clone)]
pub struct Strategy {
    name: String,
    epistemic: Space,
    kind: ChoiceKind,
    initial: Value,
    step: StrategyStepFn,
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Strategy")
            .field("name", &self.name)
            .field("epistemic", &self.epistemic)
            .field("kind", &self.kind)
            .field("initial", &self.initial)
            .finish()
    }
}

impl Strategy {
    pub fn new(
        name: &str,
        epistemic: Space,
        kind: ChoiceKind,
        initial: Value,
        step: impl Fn(&Value, &Value) -> Result<Choice<(Value, Value)>> + Send + Sync + 'static,
    ) -> Result<Strategy> {
        if !epistemic.contains(&initial) {
            return Err(invalid(format!("initial epistemic state {initial} of {name} lies outside {}", epistemic.name())));
        }
        Ok(Strategy {
            name: name.to_string(),
            epistemic,
            kind,
            initial,
            step: Arc::new(step),
        })
    }

    /// A stateless deterministic strategy.
    pub fn memoryless(name: &str, choose: impl Fn(&Value) -> Result<Value> + Send + Sync + 'static) -> Strategy {
        Strategy::new(name, Space::unit(), ChoiceKind::Det, Value::Unit, move |_, b| {
            Ok(Choice::det((Value::Unit, choose(b)?)))
        })
        .expect("unit is a valid epistemic state")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn epistemic(&self) -> &Space {
        &self.epistemic
    }

    pub fn kind(&self) -> ChoiceKind {
        self.kind
    }

    pub fn initial(&self) -> &Value {
        &self.initial
    }

    pub fn step(&self, e: &Value, b: &Value) -> Result<Choice<(Value, Value)>> {
        (self.step)(e, b)
    }

    /// Same strategy started from another epistemic state.
    pub fn with_initial(&self, initial: Value) -> Result<Strategy> {
        if !self.epistemic.contains(&initial) {
            return Err(invalid(format!("{initial} is not an epistemic state of {}", self.name)));
        }
        Ok(Strategy {
            initial,
            ..self.clone()
        })
    }

    pub fn renamed(&self, name: &str) -> Strategy {
        Strategy {
            name: name.to_string(),
            ..self.clone()
        }
    }

    /// The strategy as a process from observations to actions that never
    /// terminates.
    pub fn as_process(&self, observations: &Space, actions: &Space) -> Process {
        let s = self.clone();
        let acts = actions.clone();
        Process::unchecked(
            self.epistemic.clone(),
            observations.clone(),
            actions.clone(),
            Space::empty(),
            self.kind,
            move |e, b| {
                let choice = s.step(e, b)?;
                for (_, a) in choice.support() {
                    if !acts.contains(a) {
                        return Err(Error::Membership {
                            space: acts.name().to_string(),
                            value: a.to_string(),
                        });
                    }
                }
                Ok(choice.map(|(e2, a)| Transition::cont(e2.clone(), a.clone())))
            },
        )
    }
}

/// The strategy that may play any action whatever it observes.
pub fn dummy_strategy(game: &Game, p: usize) -> Strategy {
    let actions: Vec<Value> = game.players[p].actions.elements().unwrap_or(&[]).to_vec();
    Strategy::new("dummy", Space::unit(), ChoiceKind::NDet, Value::Unit, move |_, _| {
        Choice::ndet(actions.iter().map(|a| (Value::Unit, a.clone())))
    })
    .expect("unit is a valid epistemic state")
}

/// Per-player strategies; empty slots are filled with the dummy.
#[derive(Clone, Debug, Default)]
pub struct StrategyProfile {
    pub slots: Vec<Option<Strategy>>,
}

impl StrategyProfile {
    pub fn empty(players: usize) -> StrategyProfile {
        StrategyProfile {
            slots: vec![None; players],
        }
    }

    pub fn full(strategies: Vec<Strategy>) -> StrategyProfile {
        StrategyProfile {
            slots: strategies.into_iter().map(Some).collect(),
        }
    }

    pub fn set(&mut self, p: usize, s: Strategy) {
        self.slots[p] = Some(s);
    }

    pub fn names(&self) -> Vec<String> {
        self.slots
            .iter()
            .map(|s| s.as_ref().map_or("dummy".to_string(), |s| s.name().to_string()))
            .collect()
    }
}

/// A game with every strategy fixed: a process with unit input and its
/// initial state `(s₀, ē, ĉ, â)`.
#[derive(Clone, Debug)]
pub struct ClosedGame {
    pub process: Process,
    pub initial: Value,
}

/// Splits a closed-game state into `(s, ē, c, ā)`.
pub fn decompose_closed_state(v: &Value) -> Result<(&Value, &[Value], &Value, &[Value])> {
    match v.as_tuple() {
        Some([s, Value::Tuple(es), c, Value::Tuple(acts)]) => Ok((s, es, c, acts)),
        _ => Err(Error::Shape(format!("{v} is not a closed-game state (s, ē, c, ā)"))),
    }
}

/// Closes the game: the strategies step on the observations of the previous
/// output and profile, their actions feed the game, and the game's output is
/// fed back for the next turn.
pub fn fix_strategies(game: &Game, profile: &StrategyProfile) -> Result<ClosedGame> {
    let n = game.players.len();
    if profile.slots.len() != n {
        return Err(Error::Shape(format!("profile has {} slots for {n} players", profile.slots.len())));
    }
    let strategies: Vec<Strategy> = profile
        .slots
        .iter()
        .enumerate()
        .map(|(p, s)| s.clone().unwrap_or_else(|| dummy_strategy(game, p)))
        .collect();
    let mut kind = game.core.kind();
    for s in &strategies {
        kind = combined_kind(kind, s.kind())?;
    }

    let components: Vec<Process> = strategies
        .iter()
        .zip(&game.players)
        .map(|(s, p)| s.as_process(&p.observations, &p.actions))
        .collect();
    let joint = product_all(&components)?;
    let outputs = game.core.outputs().clone();
    let profiles = game.profiles();

    let observer = game.clone();
    let observed = map_input(
        Space::product(vec![outputs.clone(), profiles]),
        move |ca| match ca.as_tuple() {
            Some([c, a]) => observer.observe_all(c, a),
            _ => Value::Unit,
        },
        &joint,
    );
    let players = feedback(&observed)?;
    let staged = cascade(&players, &game.core)?;
    let fed = map_input(
        Space::product(vec![Space::unit(), outputs.clone()]),
        |uc| match uc.as_tuple() {
            Some([_, c]) => c.clone(),
            _ => Value::Unit,
        },
        &staged,
    );
    let looped = feedback(&fed)?;

    let results = map_results(&looped, game.core.results().clone(), |r| match r.as_tagged() {
        Some(("R", inner)) => inner.clone(),
        _ => r.clone(),
    });
    let epistemic = Space::product(strategies.iter().map(|s| s.epistemic().clone()).collect());
    let canonical = Space::product(vec![
        game.core.states().clone(),
        epistemic,
        outputs,
        game.profiles(),
    ]);
    // nested layout (((ē, ā), s), c) <-> canonical (s, ē, c, ā)
    let process = map_states(
        &results,
        canonical,
        |v| {
            let (s, es, c, acts) = decompose_closed_state(v)?;
            Ok(Value::pair(
                Value::pair(Value::pair(Value::Tuple(es.to_vec()), Value::Tuple(acts.to_vec())), s.clone()),
                c.clone(),
            ))
        },
        |v| nested_to_canonical(v).unwrap_or_else(|| v.clone()),
    );
    debug_assert_eq!(process.kind(), kind);
    let initial = Value::Tuple(vec![
        game.initial_state.clone(),
        Value::Tuple(strategies.iter().map(|s| s.initial().clone()).collect()),
        game.seed_output.clone(),
        game.seed_actions.clone(),
    ]);
    Ok(ClosedGame { process, initial })
}

fn nested_to_canonical(v: &Value) -> Option<Value> {
    let [inner, c] = v.as_tuple()? else { return None };
    let [ea, s] = inner.as_tuple()? else { return None };
    let [es, acts] = ea.as_tuple()? else { return None };
    Some(Value::Tuple(vec![s.clone(), es.clone(), c.clone(), acts.clone()]))
}

/// How a rollout resolves non-deterministic steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NDetPolicy {
    /// Take the least element.
    First,
    /// Pick uniformly with the rollout's generator.
    SeededRandom,
    /// Refuse to guess.
    #[default]
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub turn: usize,
    pub transition: Transition,
}

impl TraceStep {
    pub fn to_json(&self) -> serde_json::Value {
        match &self.transition {
            Transition::Result(r) => json!({ "turn": self.turn, "result": r.to_json() }),
            Transition::Continue { state, output } => {
                json!({ "turn": self.turn, "state": state.to_json(), "output": output.to_json() })
            }
        }
    }
}

/// Simulates a closed process for at most `turns` steps.
pub fn rollout(closed: &Process, initial: &Value, turns: usize, seed: u64, policy: NDetPolicy) -> Result<Vec<TraceStep>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rollout_with_rng(closed, initial, turns, &mut rng, policy)
}

pub fn rollout_with_rng(
    closed: &Process,
    initial: &Value,
    turns: usize,
    rng: &mut impl Rng,
    policy: NDetPolicy,
) -> Result<Vec<TraceStep>> {
    let unit = match closed.inputs().elements() {
        Some([only]) => only.clone(),
        _ => return Err(Error::Shape(format!("rollout needs a closed process, inputs are {}", closed.inputs().name()))),
    };
    let mut trace = Vec::with_capacity(turns);
    let mut state = initial.clone();
    for turn in 1..=turns {
        let choice = closed.step(&state, &unit)?;
        let t = match choice.view() {
            View::Det(t) => t.clone(),
            View::Prob(entries) => sample(entries, rng),
            View::NDet(options) => match policy {
                NDetPolicy::First => options[0].clone(),
                NDetPolicy::SeededRandom => options[rng.random_range(0..options.len())].clone(),
                NDetPolicy::Error => return Err(Error::NDetUnresolved { turn }),
            },
        };
        let done = matches!(t, Transition::Result(_));
        if let Transition::Continue { state: next, .. } = &t {
            state = next.clone();
        }
        trace.push(TraceStep { turn, transition: t });
        if done {
            break;
        }
    }
    Ok(trace)
}

fn sample<T: Clone>(entries: &[(T, f64)], rng: &mut impl Rng) -> T {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (x, p) in entries {
        acc += p;
        if u < acc {
            return x.clone();
        }
    }
    entries.last().expect("validated choices are non-empty").0.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Repeated coordination on {a, b}: outputs (1, 1) on agreement.
    fn coordination(repeated: bool) -> Game {
        let acts = Space::atoms("A", &["a", "b"]);
        let profiles = Space::product(vec![acts.clone(), acts.clone()]);
        let star = Space::atoms("S", &["*"]);
        let outputs = if repeated { Space::reals(2) } else { Space::unit() };
        let results = if repeated { Space::empty() } else { Space::reals(2) };
        let core = Process::new(star, profiles.clone(), outputs, results, ChoiceKind::Det, move |_, a| {
            let t = a.as_tuple().unwrap();
            let x = if t[0] == t[1] { 1.0 } else { 0.0 };
            Ok(Choice::det(if repeated {
                Transition::cont(Value::atom("*"), Value::reals(&[x, x]))
            } else {
                Transition::Result(Value::reals(&[x, x]))
            }))
        })
        .unwrap();
        let obs = |p: usize| {
            Player::new(&(p + 1).to_string(), acts.clone(), profiles.clone(), |_, a| a.clone())
        };
        Game::new(GameDef {
            name: "coordination".into(),
            players: vec![obs(0), obs(1)],
            core,
            outcome: OutcomeSpec::discounted(
                2,
                0.5,
                1.0,
                |o| Ok(o.to_reals().unwrap_or_else(|| vec![0.0, 0.0])),
                |r| Ok(r.to_reals().unwrap()),
            )
            .unwrap(),
            initial_state: Value::atom("*"),
            seed_output: if repeated { Value::reals(&[0.0, 0.0]) } else { Value::Unit },
            seed_actions: Value::atoms(&["a", "a"]),
            schema: ObservationSchema::FullProfile,
        })
        .unwrap()
    }

    fn constant(a: &'static str) -> Strategy {
        Strategy::memoryless(a, move |_| Ok(Value::atom(a)))
    }

    #[test]
    fn closed_rollout_repeats() {
        let g = coordination(true);
        let closed = fix_strategies(&g, &StrategyProfile::full(vec![constant("b"), constant("b")])).unwrap();
        assert_eq!(closed.process.kind(), ChoiceKind::Det);
        let trace = rollout(&closed.process, &closed.initial, 3, 0, NDetPolicy::Error).unwrap();
        assert_eq!(trace.len(), 3);
        for step in &trace {
            let Transition::Continue { state, output } = &step.transition else { panic!() };
            assert_eq!(*output, Value::reals(&[1.0, 1.0]));
            let (s, es, c, acts) = decompose_closed_state(state).unwrap();
            assert_eq!((s, es.len(), c), (&Value::atom("*"), 2, output));
            assert_eq!(acts, Value::atoms(&["b", "b"]).as_tuple().unwrap());
        }
    }

    #[test]
    fn dummies_make_the_closed_game_nondeterministic() {
        let g = coordination(false);
        let closed = fix_strategies(&g, &StrategyProfile::empty(2)).unwrap();
        assert_eq!(closed.process.kind(), ChoiceKind::NDet);
        let c = closed.process.step(&closed.initial, &Value::Unit).unwrap();
        assert_eq!(c.len(), 2);
        assert!(matches!(
            rollout(&closed.process, &closed.initial, 1, 0, NDetPolicy::Error),
            Err(Error::NDetUnresolved { turn: 1 })
        ));
    }

    #[test]
    fn turns_zero_gives_an_empty_trace() {
        let g = coordination(true);
        let closed = fix_strategies(&g, &StrategyProfile::full(vec![constant("a"), constant("b")])).unwrap();
        assert!(rollout(&closed.process, &closed.initial, 0, 0, NDetPolicy::Error).unwrap().is_empty());
    }

    #[test]
    fn validation_checks_the_first_observation() {
        let g = coordination(true);
        let mut def = g.def().clone();
        def.seed_actions = Value::atoms(&["a", "z"]);
        assert!(matches!(Game::new(def), Err(Error::Validation(_))));
    }
}
