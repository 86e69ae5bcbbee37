//! Friendship networks: players add or drop undirected edges to others.
//!
//! Every player names one move per turn: befriend someone, unfriend someone,
//! or pass. All moves apply at once; if the same edge is befriended and
//! unfriended in one turn, it ends up absent. Each turn pays every player
//! their number of friends.

use std::collections::BTreeSet;

use crate::choice::{Choice, ChoiceKind};
use crate::error::{Error, Result};
use crate::game::{Game, GameDef, ObservationSchema, Player};
use crate::outcome::OutcomeSpec;
use crate::process::{Process, Transition};
use crate::space::Space;
use crate::value::Value;

pub const MAX_NODES: usize = 6;

fn node(i: usize) -> Value {
    Value::atom(&(i + 1).to_string())
}

fn edge(i: usize, j: usize) -> Value {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    Value::pair(node(a), node(b))
}

pub fn befriend(j: usize) -> Value {
    Value::tagged("befriend", node(j))
}

pub fn unfriend(j: usize) -> Value {
    Value::tagged("unfriend", node(j))
}

pub fn pass() -> Value {
    Value::atom("pass")
}

fn all_edges(n: usize) -> Vec<Value> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| edge(i, j))).collect()
}

fn node_index(v: &Value, n: usize) -> Option<usize> {
    let k: usize = v.as_atom()?.parse().ok()?;
    (1..=n).contains(&k).then(|| k - 1)
}

/// Applies one joint move to an edge set.
pub fn apply_moves(graph: &BTreeSet<Value>, moves: &[Value], n: usize) -> Result<BTreeSet<Value>> {
    let mut add = BTreeSet::new();
    let mut remove = BTreeSet::new();
    for (p, m) in moves.iter().enumerate() {
        match m.as_tagged() {
            Some((verb, target)) => {
                let q = node_index(target, n)
                    .filter(|&q| q != p)
                    .ok_or_else(|| Error::Shape(format!("player {} cannot target {target}", p + 1)))?;
                if verb == "befriend" {
                    add.insert(edge(p, q));
                } else {
                    remove.insert(edge(p, q));
                }
            }
            None if *m == pass() => {}
            None => return Err(Error::Shape(format!("unknown move {m}"))),
        }
    }
    let mut next: BTreeSet<Value> = graph.union(&add).cloned().collect();
    for e in &remove {
        next.remove(e);
    }
    Ok(next)
}

fn degrees(graph: &Value, n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n];
    if let Value::Set(edges) = graph {
        for e in edges {
            if let Some([a, b]) = e.as_tuple() {
                for v in [a, b] {
                    if let Some(i) = node_index(v, n) {
                        d[i] += 1.0;
                    }
                }
            }
        }
    }
    d
}

pub fn build_network_game(nodes: usize) -> Result<Game> {
    if !(2..=MAX_NODES).contains(&nodes) {
        return Err(Error::Size(format!("network games take 2 to {MAX_NODES} nodes, got {nodes}")));
    }
    let n = nodes;
    let edges = all_edges(n);
    let graphs: Vec<Value> = (0u32..1 << edges.len())
        .map(|mask| {
            Value::Set(
                edges
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, e)| e.clone())
                    .collect(),
            )
        })
        .collect();
    let graphs = Space::finite(&format!("Graphs{n}"), graphs);
    let action_space = |p: usize| {
        let mut acts = vec![pass()];
        for q in (0..n).filter(|&q| q != p) {
            acts.push(befriend(q));
            acts.push(unfriend(q));
        }
        Space::finite(&format!("A{}", p + 1), acts)
    };
    let profiles = Space::product((0..n).map(action_space).collect());
    let core = Process::new(
        graphs.clone(),
        profiles,
        graphs.clone(),
        Space::empty(),
        ChoiceKind::Det,
        move |s, a| {
            let Value::Set(graph) = s else {
                return Err(Error::Shape(format!("{s} is not an edge set")));
            };
            let moves = a.as_tuple().ok_or_else(|| Error::Shape(format!("{a} is not a profile")))?;
            let next = Value::Set(apply_moves(graph, moves, n)?);
            Ok(Choice::det(Transition::cont(next.clone(), next)))
        },
    )?;
    let players = (0..n)
        .map(|p| Player::new(&(p + 1).to_string(), action_space(p), graphs.clone(), |c, _| c.clone()))
        .collect();
    let outcome = OutcomeSpec::discounted(
        n,
        0.9,
        (n - 1) as f64,
        move |o| Ok(degrees(o, n)),
        |r| Err(Error::Shape(format!("network games have no results, got {r}"))),
    )?;
    Game::new(GameDef {
        name: format!("network-{n}"),
        players,
        core,
        outcome,
        initial_state: Value::Set(BTreeSet::new()),
        seed_output: Value::Set(BTreeSet::new()),
        seed_actions: Value::Tuple(vec![pass(); n]),
        schema: ObservationSchema::Network,
    })
}
