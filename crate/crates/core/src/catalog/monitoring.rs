//! The repeated prisoner's dilemma under imperfect public monitoring.
//!
//! Players never see each other's actions, only a public signal `G` or `B`
//! whose law depends on how many of them cooperated. Stage payoffs depend on
//! one's own action and the signal, tuned so that their expectation is the
//! prisoner's dilemma table.

use crate::choice::{Choice, ChoiceKind};
use crate::error::{Error, Result};
use crate::game::{Game, GameDef, ObservationSchema, Player};
use crate::outcome::OutcomeSpec;
use crate::process::{Process, Transition};
use crate::space::Space;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitoringParams {
    pub k: f64,
    pub m: f64,
    pub n: f64,
}

impl Default for MonitoringParams {
    fn default() -> Self {
        MonitoringParams { k: 0.9, m: 0.5, n: 0.1 }
    }
}

impl MonitoringParams {
    pub fn new(k: f64, m: f64, n: f64) -> Result<MonitoringParams> {
        let p = MonitoringParams { k, m, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let MonitoringParams { k, m, n } = *self;
        if [k, m, n].iter().all(|x| x.is_finite()) && 1.0 >= k && k > m && m > n && n >= 0.0 {
            Ok(())
        } else {
            Err(Error::Param(format!("need 1 ≥ k > m > n ≥ 0, got k={k}, m={m}, n={n}")))
        }
    }

    /// Stage payoff of a player who chose `cooperate` and saw signal `good`.
    pub fn stage_payoff(&self, cooperate: bool, good: bool) -> f64 {
        let MonitoringParams { k, m, n } = *self;
        match (cooperate, good) {
            (true, true) => 1.0 + (2.0 - 2.0 * k) / (k - m),
            (true, false) => 1.0 - 2.0 * k / (k - m),
            (false, true) => (2.0 - 2.0 * n) / (m - n),
            (false, false) => -2.0 * n / (m - n),
        }
    }

    /// Probability of the good signal given how many players cooperated.
    pub fn good_probability(&self, cooperators: usize) -> f64 {
        match cooperators {
            2 => self.k,
            1 => self.m,
            _ => self.n,
        }
    }

    pub fn output_bound(&self) -> f64 {
        [true, false]
            .iter()
            .flat_map(|&c| [true, false].map(|g| self.stage_payoff(c, g).abs()))
            .fold(0.0, f64::max)
    }
}

fn is_output(v: &Value) -> bool {
    matches!(v.as_tuple(), Some([Value::Real(_), Value::Real(_), Value::Atom(y)]) if &**y == "G" || &**y == "B")
}

pub fn build_monitoring_game(params: MonitoringParams) -> Result<Game> {
    params.validate()?;
    let acts = |p: &str| Space::atoms(&format!("A{p}"), &["c", "d"]);
    let profiles = Space::product(vec![acts("1"), acts("2")]);
    let outputs = Space::predicate("(R × R × {G,B})", is_output);
    let core = Process::new(
        Space::atoms("{*}", &["*"]),
        profiles,
        outputs,
        Space::empty(),
        ChoiceKind::Prob,
        move |_, a| {
            let coop: Vec<bool> = a
                .as_tuple()
                .ok_or_else(|| Error::Shape(format!("{a} is not a profile")))?
                .iter()
                .map(|x| x.as_atom() == Some("c"))
                .collect();
            let good = params.good_probability(coop.iter().filter(|&&c| c).count());
            let out = |g: bool| {
                Transition::cont(
                    Value::atom("*"),
                    Value::Tuple(vec![
                        Value::real(params.stage_payoff(coop[0], g)),
                        Value::real(params.stage_payoff(coop[1], g)),
                        Value::atom(if g { "G" } else { "B" }),
                    ]),
                )
            };
            Choice::prob([(out(true), good), (out(false), 1.0 - good)])
        },
    )?;

    let players = (0..2)
        .map(|p| {
            let id = (p + 1).to_string();
            let mut seen = vec![Value::Tuple(vec![Value::real(0.0), Value::atom("G"), Value::atom("c")])];
            for a in ["c", "d"] {
                for g in [true, false] {
                    seen.push(Value::Tuple(vec![
                        Value::real(params.stage_payoff(a == "c", g)),
                        Value::atom(if g { "G" } else { "B" }),
                        Value::atom(a),
                    ]));
                }
            }
            let observations = Space::finite_with_predicate(&format!("B{id}"), seen, |b| {
                matches!(b.as_tuple(), Some([Value::Real(_), Value::Atom(_), Value::Atom(_)]))
            });
            Player::new(&id, acts(&id), observations, move |o, a| match (o.as_tuple(), a.as_tuple()) {
                (Some(o), Some(a)) => Value::Tuple(vec![o[p].clone(), o[2].clone(), a[p].clone()]),
                _ => Value::Unit,
            })
        })
        .collect();

    let outcome = OutcomeSpec::discounted(
        2,
        0.9,
        params.output_bound(),
        |o| match o.as_tuple() {
            Some([r1, r2, _]) => Ok(vec![r1.as_real().unwrap_or(0.0), r2.as_real().unwrap_or(0.0)]),
            _ => Err(Error::Shape(format!("{o} is not a monitoring output"))),
        },
        |r| Err(Error::Shape(format!("the monitoring game has no results, got {r}"))),
    )?;
    Game::new(GameDef {
        name: "monitoring".into(),
        players,
        core,
        outcome,
        initial_state: Value::atom("*"),
        seed_output: Value::Tuple(vec![Value::real(0.0), Value::real(0.0), Value::atom("G")]),
        seed_actions: Value::atoms(&["c", "c"]),
        schema: ObservationSchema::PublicSignal,
    })
}

/// Expected stage payoffs at each profile, in the order (c,c), (c,d), (d,c), (d,d).
pub fn expected_stage_payoffs(game: &Game) -> Result<Vec<(Value, Vec<f64>)>> {
    let profiles = game.profiles();
    let mut out = Vec::new();
    for a in profiles.elements().unwrap_or(&[]) {
        let choice = game.core.step(&game.initial_state, a)?;
        let mut e = vec![0.0; 2];
        for (t, p) in choice.weighted() {
            if let Transition::Continue { output, .. } = t {
                let pay = game.outcome.tau_step(&[0.0, 0.0], output)?;
                e[0] += p * pay[0];
                e[1] += p * pay[1];
            }
        }
        out.push((a.clone(), e));
    }
    Ok(out)
}
