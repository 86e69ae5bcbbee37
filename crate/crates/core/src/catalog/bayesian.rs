//! A two-round Bayesian game. Nature first draws one of four 2×2 games;
//! each player learns only which pair of games it belongs to, then both
//! play once.

use crate::choice::{Choice, ChoiceKind};
use crate::error::{Error, Result};
use crate::game::{Game, GameDef, ObservationSchema, Player};
use crate::outcome::OutcomeSpec;
use crate::process::{Process, Transition};
use crate::space::Space;
use crate::value::Value;

pub const TYPES: [&str; 4] = ["MP", "PD", "CG", "BS"];

/// Payoff tables indexed `[type][a1][a2]` with `a1 ∈ {U, D}`, `a2 ∈ {L, R}`,
/// and the prior over types.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesianTables {
    pub payoffs: [[[(f64, f64); 2]; 2]; 4],
    pub prior: [f64; 4],
}

impl Default for BayesianTables {
    fn default() -> Self {
        BayesianTables {
            payoffs: [
                [[(2.0, 0.0), (0.0, 2.0)], [(0.0, 2.0), (2.0, 0.0)]],
                [[(2.0, 2.0), (0.0, 3.0)], [(3.0, 0.0), (1.0, 1.0)]],
                [[(2.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 1.0)]],
                [[(2.0, 1.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 2.0)]],
            ],
            prior: [0.3, 0.1, 0.2, 0.4],
        }
    }
}

impl BayesianTables {
    pub fn payoff(&self, ty: usize, a1: usize, a2: usize) -> (f64, f64) {
        self.payoffs[ty][a1][a2]
    }
}

/// The information cell of player `p` (0 or 1) for a drawn type: player 1
/// tells {MP, PD} from {CG, BS}, player 2 tells {MP, CG} from {PD, BS}.
pub fn cell(p: usize, ty: usize) -> usize {
    if p == 0 {
        ty / 2
    } else {
        ty % 2
    }
}

pub fn cell_value(p: usize, c: usize) -> Value {
    let members = (0..4).filter(|&t| cell(p, t) == c).map(|t| Value::atom(TYPES[t]));
    Value::set(members)
}

fn type_index(v: &Value) -> Option<usize> {
    TYPES.iter().position(|t| v.as_atom() == Some(t))
}

const ACTIONS: [[&str; 2]; 2] = [["U", "D"], ["L", "R"]];

pub fn build_bayesian_game(tables: BayesianTables) -> Result<Game> {
    let total: f64 = tables.prior.iter().sum();
    if (total - 1.0).abs() > 1e-12 || tables.prior.iter().any(|&p| p < 0.0) {
        return Err(Error::Param(format!("type prior must be a distribution, sums to {total}")));
    }
    let acts = |p: usize| Space::atoms(&format!("A{}", p + 1), &ACTIONS[p]);
    let profiles = Space::product(vec![acts(0), acts(1)]);
    let states = Space::atoms("{*,MP,PD,CG,BS}", &["*", "MP", "PD", "CG", "BS"]);
    let t = tables.clone();
    let core = Process::new(
        states.clone(),
        profiles,
        states,
        Space::reals(2),
        ChoiceKind::Prob,
        move |s, a| {
            if s.as_atom() == Some("*") {
                return Choice::prob(
                    TYPES
                        .iter()
                        .zip(t.prior)
                        .map(|(ty, p)| (Transition::cont(Value::atom(ty), Value::atom(ty)), p)),
                );
            }
            let ty = type_index(s).ok_or_else(|| Error::Shape(format!("unknown type {s}")))?;
            let idx = |p: usize, x: &Value| ACTIONS[p].iter().position(|n| x.as_atom() == Some(n));
            let (i, j) = match a.as_tuple() {
                Some([x, y]) => (idx(0, x), idx(1, y)),
                _ => (None, None),
            };
            let (i, j) = i.zip(j).ok_or_else(|| Error::Shape(format!("{a} is not a profile")))?;
            let (x, y) = t.payoff(ty, i, j);
            Ok(Choice::point(ChoiceKind::Prob, Transition::Result(Value::reals(&[x, y]))))
        },
    )?;

    let players = (0..2)
        .map(|p| {
            let observations =
                Space::finite(&format!("B{}", p + 1), [Value::atom("*"), cell_value(p, 0), cell_value(p, 1)]);
            Player::new(&(p + 1).to_string(), acts(p), observations, move |o, _| match type_index(o) {
                Some(ty) => cell_value(p, cell(p, ty)),
                None => Value::atom("*"),
            })
        })
        .collect();

    let bound = tables
        .payoffs
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, &(x, y)| m.max(x.abs()).max(y.abs()));
    let outcome = OutcomeSpec::discounted(
        2,
        0.9,
        bound,
        |_| Ok(vec![0.0, 0.0]),
        |r| r.to_reals().ok_or_else(|| Error::Shape(format!("result {r} is not a payoff vector"))),
    )?;
    Game::new(GameDef {
        name: "bayesian".into(),
        players,
        core,
        outcome,
        initial_state: Value::atom("*"),
        seed_output: Value::atom("*"),
        seed_actions: Value::atoms(&["U", "L"]),
        schema: ObservationSchema::TypeSignal,
    })
}
