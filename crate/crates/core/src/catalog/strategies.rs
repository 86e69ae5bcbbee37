//! Named strategies for the catalog games.
//!
//! | name | behaviour |
//! |---|---|
//! | `always-deny` | plays `d` |
//! | `always-confess` | plays `c` |
//! | `always:X` | plays action `X` |
//! | `tit-for-tat` | repeats the watched opponent's previous action |
//! | `copy-2/3` | repeats it with probability 2/3, plays the other action otherwise |
//! | `grim-trigger` | plays `c` until the watched opponent has played `d`, then `d` forever |
//! | `type-contingent:XY` | plays `X` in the first information cell, `Y` in the second |
//! | `always-d-with-history` | plays `d` while recording (own action, signal) pairs |
//! | `uniform` | picks every action with equal probability |
//! | `pass` | network games: never changes an edge |
//!
//! The watched opponent of player `p` is player `p + 1` (cyclically), so in
//! two-player games it is simply the other player.

use crate::choice::{Choice, ChoiceKind};
use crate::error::{Error, Result};
use crate::game::{Game, ObservationSchema, Strategy};
use crate::space::Space;
use crate::value::Value;

use super::bayesian::cell_value;
use super::network::pass;

/// Retained history length for history-keeping strategies.
pub const HISTORY_WINDOW: usize = 16;

fn unavailable(name: &str, why: &str) -> Error {
    Error::UnknownStrategy(format!("{name}: {why}"))
}

fn find_action(game: &Game, p: usize, label: &str) -> Option<Value> {
    game.players[p]
        .actions
        .elements()?
        .iter()
        .find(|a| a.to_string() == label)
        .cloned()
}

fn constant(game: &Game, p: usize, name: &str, label: &str) -> Result<Strategy> {
    let a = find_action(game, p, label)
        .ok_or_else(|| unavailable(name, &format!("player {} has no action {label}", game.players[p].id)))?;
    Ok(Strategy::memoryless(name, move |_| Ok(a.clone())))
}

/// The watched opponent's previous action, read from a full-profile
/// observation.
fn watched_action(b: &Value, watched: usize) -> Result<Value> {
    match b.as_tuple() {
        Some([Value::Tuple(profile), _]) if watched < profile.len() => Ok(profile[watched].clone()),
        _ => Err(Error::Shape(format!("{b} is not a full-profile observation"))),
    }
}

fn needs_profiles(game: &Game, name: &str) -> Result<usize> {
    if game.schema != ObservationSchema::FullProfile || game.player_count() < 2 {
        return Err(unavailable(name, "needs a game in which opponents' actions are observed"));
    }
    Ok(game.player_count())
}

pub fn builtin_strategy(game: &Game, p: usize, name: &str) -> Result<Strategy> {
    if p >= game.player_count() {
        return Err(Error::Validation(format!("no player {}", p + 1)));
    }
    if let Some(label) = name.strip_prefix("always:") {
        return constant(game, p, name, label);
    }
    if let Some(cells) = name.strip_prefix("type-contingent:") {
        return type_contingent(game, p, name, cells);
    }
    let own: Vec<Value> = game.players[p].actions.elements().unwrap_or(&[]).to_vec();
    match name {
        "always-deny" => constant(game, p, name, "d"),
        "always-confess" => constant(game, p, name, "c"),
        "pass" if game.schema == ObservationSchema::Network => {
            let a = pass();
            Ok(Strategy::memoryless(name, move |_| Ok(a.clone())))
        }
        "uniform" => Strategy::new(name, Space::unit(), ChoiceKind::Prob, Value::Unit, move |_, _| {
            Choice::uniform(own.iter().map(|a| (Value::Unit, a.clone())))
        }),
        "tit-for-tat" => {
            let n = needs_profiles(game, name)?;
            let watched = (p + 1) % n;
            Ok(Strategy::memoryless(name, move |b| {
                let a = watched_action(b, watched)?;
                if own.contains(&a) {
                    Ok(a)
                } else {
                    Err(Error::Shape(format!("cannot mirror {a}: not an own action")))
                }
            }))
        }
        "copy-2/3" => {
            let n = needs_profiles(game, name)?;
            if own.len() != 2 {
                return Err(unavailable(name, "needs exactly two actions"));
            }
            let watched = (p + 1) % n;
            Strategy::new(name, Space::unit(), ChoiceKind::Prob, Value::Unit, move |_, b| {
                let x = watched_action(b, watched)?;
                let other = own.iter().find(|a| **a != x).cloned().unwrap_or_else(|| own[0].clone());
                Choice::prob([((Value::Unit, x), 2.0 / 3.0), ((Value::Unit, other), 1.0 / 3.0)])
            })
        }
        "grim-trigger" => {
            let n = needs_profiles(game, name)?;
            let (c, d) = (
                find_action(game, p, "c").ok_or_else(|| unavailable(name, "needs action c"))?,
                find_action(game, p, "d").ok_or_else(|| unavailable(name, "needs action d"))?,
            );
            let watched = (p + 1) % n;
            Strategy::new(
                name,
                Space::atoms("{calm,triggered}", &["calm", "triggered"]),
                ChoiceKind::Det,
                Value::atom("calm"),
                move |e, b| {
                    let triggered = e.as_atom() == Some("triggered") || watched_action(b, watched)?.as_atom() == Some("d");
                    Ok(Choice::det(if triggered {
                        (Value::atom("triggered"), d.clone())
                    } else {
                        (Value::atom("calm"), c.clone())
                    }))
                },
            )
        }
        "always-d-with-history" => {
            if game.schema != ObservationSchema::PublicSignal {
                return Err(unavailable(name, "needs a public-signal game"));
            }
            let d = find_action(game, p, "d").ok_or_else(|| unavailable(name, "needs action d"))?;
            let histories = Space::predicate(&format!("(A{} × Y)*", game.players[p].id), |h| {
                matches!(h, Value::Seq(items) if items.len() <= HISTORY_WINDOW
                    && items.iter().all(|x| matches!(x.as_tuple(), Some([Value::Atom(_), Value::Atom(_)]))))
            });
            Strategy::new(name, histories, ChoiceKind::Det, Value::Seq(Vec::new()), move |h, b| {
                let (Value::Seq(items), Some([_, y, a])) = (h, b.as_tuple()) else {
                    return Err(Error::Shape(format!("cannot extend history {h} with {b}")));
                };
                let mut items = items.clone();
                items.push(Value::pair(a.clone(), y.clone()));
                if items.len() > HISTORY_WINDOW {
                    items.remove(0);
                }
                Ok(Choice::det((Value::Seq(items), d.clone())))
            })
        }
        _ => Err(Error::UnknownStrategy(name.to_string())),
    }
}

fn type_contingent(game: &Game, p: usize, name: &str, cells: &str) -> Result<Strategy> {
    if game.schema != ObservationSchema::TypeSignal {
        return Err(unavailable(name, "needs a game with type signals"));
    }
    let split = (1..cells.len())
        .filter(|&i| cells.is_char_boundary(i))
        .find_map(|i| Some((find_action(game, p, &cells[..i])?, find_action(game, p, &cells[i..])?)))
        .ok_or_else(|| unavailable(name, "expected two actions of this player, as in type-contingent:UD"))?;
    let (first, second) = split;
    let cell0 = cell_value(p, 0);
    Ok(Strategy::memoryless(name, move |b| {
        // before nature moves, players see `*`; their action is ignored then
        Ok(if *b == cell0 || b.as_atom() == Some("*") {
            first.clone()
        } else {
            second.clone()
        })
    }))
}

/// Names accepted by [`builtin_strategy`] for player `p`.
pub fn strategy_names(game: &Game, p: usize) -> Vec<String> {
    let mut names: Vec<String> = [
        "always-deny",
        "always-confess",
        "tit-for-tat",
        "copy-2/3",
        "grim-trigger",
        "always-d-with-history",
        "uniform",
        "pass",
    ]
    .iter()
    .map(|s| s.to_string())
    .filter(|n| builtin_strategy(game, p, n).is_ok())
    .collect();
    let acts: Vec<String> = game.players[p].actions.elements().unwrap_or(&[]).iter().map(|a| a.to_string()).collect();
    if game.schema == ObservationSchema::TypeSignal {
        for x in &acts {
            for y in &acts {
                names.push(format!("type-contingent:{x}{y}"));
            }
        }
    }
    names.extend(acts.iter().map(|a| format!("always:{a}")));
    names
}

/// The candidate names a player is checked against by default.
pub fn default_candidate_names(game: &Game, p: usize) -> Vec<String> {
    let acts: Vec<String> = game.players[p].actions.elements().unwrap_or(&[]).iter().map(|a| a.to_string()).collect();
    let pd_like = acts == ["c", "d"];
    match game.schema {
        ObservationSchema::FullProfile if pd_like => vec!["always-deny".into(), "always-confess".into(), "tit-for-tat".into()],
        ObservationSchema::PublicSignal if pd_like => vec!["always-deny".into(), "always-confess".into()],
        ObservationSchema::TypeSignal => acts
            .iter()
            .flat_map(|x| acts.iter().map(move |y| format!("type-contingent:{x}{y}")))
            .collect(),
        _ => acts.iter().map(|a| format!("always:{a}")).collect(),
    }
}
