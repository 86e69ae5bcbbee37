//! Matrix games described in JSON, played once or repeated forever.
//!
//! ```json
//! {
//!   "schema": "koalg-matrix/1",
//!   "players": ["1", "2"],
//!   "actions": [["c", "d"], ["c", "d"]],
//!   "payoffs": [{"profile": ["c", "c"], "payoff": [1, 1]}, ...],
//!   "mode": "repeated",
//!   "discount": 0.9
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::choice::{Choice, ChoiceKind};
use crate::error::{Error, Result};
use crate::game::{Game, GameDef, ObservationSchema, Player};
use crate::outcome::OutcomeSpec;
use crate::process::{Process, Transition};
use crate::space::Space;
use crate::value::Value;

pub const SCHEMA: &str = "koalg-matrix/1";

/// Discount used when a one-shot spec does not name one; it never matters
/// there because results arrive on the first turn.
pub const DEFAULT_DISCOUNT: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    OneShot,
    Repeated,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Visibility {
    /// Everyone sees the whole previous profile and their own payoff.
    #[default]
    FullProfile,
    /// Everyone sees only their own previous action and payoff.
    OwnPayoff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffEntry {
    pub profile: Vec<String>,
    pub payoff: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixGameSpec {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub players: Vec<String>,
    pub actions: Vec<Vec<String>>,
    pub payoffs: Vec<PayoffEntry>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_actions: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_output: Option<Vec<f64>>,
    #[serde(default)]
    pub visibility: Visibility,
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn at(pointer: &str, msg: impl std::fmt::Display) -> Error {
    Error::Validation(format!("at {pointer}: {msg}"))
}

/// Parses and validates a spec. Syntax and type errors carry the JSON
/// pointer of the offending value.
pub fn parse_matrix_spec(text: &str) -> Result<MatrixGameSpec> {
    let mut de = serde_json::Deserializer::from_str(text);
    let spec: MatrixGameSpec = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
        pointer: pointer_of(e.path()),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| Error::Parse {
        pointer: String::new(),
        message: e.to_string(),
    })?;
    spec.validate()?;
    Ok(spec)
}

impl MatrixGameSpec {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(at("/schema", format!("expected \"{SCHEMA}\", found \"{}\"", self.schema)));
        }
        let n = self.players.len();
        if n == 0 {
            return Err(at("/players", "no players"));
        }
        let mut ids = BTreeSet::new();
        for (i, p) in self.players.iter().enumerate() {
            if !ids.insert(p) {
                return Err(at(&format!("/players/{i}"), format!("duplicate player {p}")));
            }
        }
        if self.actions.len() != n {
            return Err(at("/actions", format!("{} action lists for {n} players", self.actions.len())));
        }
        for (i, acts) in self.actions.iter().enumerate() {
            if acts.is_empty() {
                return Err(at(&format!("/actions/{i}"), "no actions"));
            }
            let mut seen = BTreeSet::new();
            for (j, a) in acts.iter().enumerate() {
                if !seen.insert(a) {
                    return Err(at(&format!("/actions/{i}/{j}"), format!("duplicate action {a}")));
                }
            }
        }
        let mut covered = BTreeSet::new();
        for (i, e) in self.payoffs.iter().enumerate() {
            self.check_profile(&e.profile, &format!("/payoffs/{i}/profile"))?;
            if e.payoff.len() != n {
                return Err(at(&format!("/payoffs/{i}/payoff"), format!("{} values for {n} players", e.payoff.len())));
            }
            if e.payoff.iter().any(|x| !x.is_finite()) {
                return Err(at(&format!("/payoffs/{i}/payoff"), "payoffs must be finite"));
            }
            if !covered.insert(e.profile.clone()) {
                return Err(at(&format!("/payoffs/{i}/profile"), format!("profile {:?} listed twice", e.profile)));
            }
        }
        let total: usize = self.actions.iter().map(Vec::len).product();
        if covered.len() != total {
            let missing = self.all_profiles().into_iter().find(|p| !covered.contains(p));
            return Err(at("/payoffs", format!("no payoff for profile {:?}", missing.unwrap_or_default())));
        }
        match (self.mode, self.discount) {
            (Mode::Repeated, None) => return Err(at("/discount", "repeated games need a discount")),
            (_, Some(d)) if !(d > 0.0 && d < 1.0) => {
                return Err(at("/discount", format!("discount {d} must lie strictly between 0 and 1")))
            }
            _ => {}
        }
        if let Some(seed) = &self.seed_actions {
            self.check_profile(seed, "/seed_actions")?;
        }
        if let Some(seed) = &self.seed_output {
            if seed.len() != n || seed.iter().any(|x| !x.is_finite()) {
                return Err(at("/seed_output", format!("need {n} finite values")));
            }
        }
        Ok(())
    }

    fn check_profile(&self, profile: &[String], pointer: &str) -> Result<()> {
        if profile.len() != self.players.len() {
            return Err(at(pointer, format!("{} actions for {} players", profile.len(), self.players.len())));
        }
        for (i, a) in profile.iter().enumerate() {
            if !self.actions[i].contains(a) {
                return Err(at(&format!("{pointer}/{i}"), format!("{a} is not an action of player {}", self.players[i])));
            }
        }
        Ok(())
    }

    fn all_profiles(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new()];
        for acts in &self.actions {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<String>| {
                    acts.iter().map(move |a| {
                        let mut p = prefix.clone();
                        p.push(a.clone());
                        p
                    })
                })
                .collect();
        }
        out
    }
}

fn profile_value(profile: &[String]) -> Value {
    Value::Tuple(profile.iter().map(|a| Value::atom(a)).collect())
}

type Observer = Box<dyn Fn(&Value, &Value) -> Value + Send + Sync>;

/// Builds the game: a single state, inputs the action profiles, and either
/// an immediate result (one-shot) or an endless stream of payoff outputs
/// (repeated).
pub fn build_matrix_game(spec: &MatrixGameSpec) -> Result<Game> {
    spec.validate()?;
    let n = spec.players.len();
    let repeated = spec.mode == Mode::Repeated;
    let action_spaces: Vec<Space> = spec
        .players
        .iter()
        .zip(&spec.actions)
        .map(|(id, acts)| Space::finite(&format!("A{id}"), acts.iter().map(|a| Value::atom(a))))
        .collect();
    let profiles = Space::product(action_spaces.clone());
    let table: BTreeMap<Value, Vec<f64>> = spec
        .payoffs
        .iter()
        .map(|e| (profile_value(&e.profile), e.payoff.clone()))
        .collect();
    let bound = table.values().flatten().fold(0.0f64, |m, x| m.max(x.abs()));

    let star = Space::atoms("{*}", &["*"]);
    let (outputs, results) = if repeated {
        (Space::reals(n), Space::empty())
    } else {
        (Space::unit(), Space::reals(n))
    };
    let lookup = table.clone();
    let core = Process::new(star, profiles.clone(), outputs, results, ChoiceKind::Det, move |_, a| {
        let pay = lookup
            .get(a)
            .ok_or_else(|| Error::Membership {
                space: "action profiles".into(),
                value: a.to_string(),
            })?;
        Ok(Choice::det(if repeated {
            Transition::cont(Value::atom("*"), Value::reals(pay))
        } else {
            Transition::Result(Value::reals(pay))
        }))
    })?;

    let seed_actions = profile_value(
        &spec
            .seed_actions
            .clone()
            .unwrap_or_else(|| spec.actions.iter().map(|a| a[0].clone()).collect()),
    );
    let seed_output = if repeated {
        Value::reals(&spec.seed_output.clone().unwrap_or_else(|| vec![0.0; n]))
    } else {
        Value::Unit
    };

    let players = (0..n)
        .map(|p| {
            let table = table.clone();
            let own = move |c: &Value| match c.as_tuple() {
                Some(items) => items[p].clone(),
                None => Value::Unit,
            };
            let seen_payoff = move |a: &Value| if repeated { Value::real(table[a][p]) } else { Value::Unit };
            let (observe, elements): (Observer, Vec<Value>) =
                match spec.visibility {
                    Visibility::FullProfile => (
                        Box::new(move |c, a| Value::pair(a.clone(), own(c))),
                        profiles
                            .elements()
                            .unwrap_or(&[])
                            .iter()
                            .map(|a| Value::pair(a.clone(), seen_payoff(a)))
                            .chain([Value::pair(seed_actions.clone(), own(&seed_output))])
                            .collect(),
                    ),
                    Visibility::OwnPayoff => (
                        Box::new(move |c, a| {
                            let mine = a.as_tuple().map(|t| t[p].clone()).unwrap_or(Value::Unit);
                            Value::pair(mine, own(c))
                        }),
                        profiles
                            .elements()
                            .unwrap_or(&[])
                            .iter()
                            .map(|a| Value::pair(a.as_tuple().unwrap()[p].clone(), seen_payoff(a)))
                            .chain([Value::pair(seed_actions.as_tuple().unwrap()[p].clone(), own(&seed_output))])
                            .collect(),
                    ),
                };
            let shape_ok = {
                let profiles = profiles.clone();
                let mine = action_spaces[p].clone();
                let full = spec.visibility == Visibility::FullProfile;
                move |b: &Value| match b.as_tuple() {
                    Some([a, r]) => {
                        (if full { profiles.contains(a) } else { mine.contains(a) })
                            && matches!(r, Value::Real(_) | Value::Unit)
                    }
                    _ => false,
                }
            };
            let observations = Space::finite_with_predicate(&format!("B{}", spec.players[p]), elements, shape_ok);
            Player::new(&spec.players[p], action_spaces[p].clone(), observations, observe)
        })
        .collect();

    let outcome = OutcomeSpec::discounted(
        n,
        spec.discount.unwrap_or(DEFAULT_DISCOUNT),
        bound,
        move |o| Ok(o.to_reals().unwrap_or_else(|| vec![0.0; n])),
        |r| r.to_reals().ok_or_else(|| Error::Shape(format!("result {r} is not a payoff vector"))),
    )?;
    Game::new(GameDef {
        name: spec.name.clone().unwrap_or_else(|| "matrix".into()),
        players,
        core,
        outcome,
        initial_state: Value::atom("*"),
        seed_output,
        seed_actions,
        schema: match spec.visibility {
            Visibility::FullProfile => ObservationSchema::FullProfile,
            Visibility::OwnPayoff => ObservationSchema::OwnPayoff,
        },
    })
}

/// The prisoner's dilemma table: `c` is the cooperative action.
pub fn prisoners_dilemma(mode: Mode) -> MatrixGameSpec {
    let entry = |a: &str, b: &str, x: f64, y: f64| PayoffEntry {
        profile: vec![a.into(), b.into()],
        payoff: vec![x, y],
    };
    MatrixGameSpec {
        schema: SCHEMA.into(),
        name: Some(if mode == Mode::Repeated { "pd-repeated" } else { "pd" }.into()),
        players: vec!["1".into(), "2".into()],
        actions: vec![vec!["c".into(), "d".into()], vec!["c".into(), "d".into()]],
        payoffs: vec![
            entry("c", "c", 1.0, 1.0),
            entry("c", "d", -1.0, 2.0),
            entry("d", "c", 2.0, -1.0),
            entry("d", "d", 0.0, 0.0),
        ],
        mode,
        discount: (mode == Mode::Repeated).then_some(0.9),
        seed_actions: Some(vec!["c".into(), "c".into()]),
        seed_output: (mode == Mode::Repeated).then(|| vec![0.0, 0.0]),
        visibility: Visibility::FullProfile,
    }
}
