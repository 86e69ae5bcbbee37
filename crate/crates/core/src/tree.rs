//! Depth-bounded game trees: the unravelling of a process from a state.
//!
//! Inner nodes carry the output emitted on the way in; the state that
//! produced it is kept only as an annotation and never takes part in
//! equality. Below the depth bound every input leads to a `Truncated` leaf.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::json;

use crate::choice::{Choice, ChoiceKind, EQUALITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::json::format_g;
use crate::process::{Process, Transition};
use crate::value::{Real, Value};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Root,
    Output(Value),
    Result(Value),
    Truncated,
}

impl Label {
    pub fn class(&self) -> &'static str {
        match self {
            Label::Root => "root",
            Label::Output(_) => "B",
            Label::Result(_) => "A",
            Label::Truncated => "truncated",
        }
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            Label::Output(v) | Label::Result(v) => Some(v),
            Label::Root | Label::Truncated => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub label: Label,
    /// The process state reached at this node, for inspection only.
    pub state: Option<Value>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub input: Value,
    pub probability: Option<f64>,
    pub target: Node,
}

impl Node {
    pub fn leaf(label: Label) -> Node {
        Node {
            label,
            state: None,
            edges: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.edges.is_empty()
    }

    /// The children reached through `input`.
    pub fn branch<'a>(&'a self, input: &'a Value) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.input == *input)
    }
}

fn cmp_prob(a: Option<f64>, b: Option<f64>) -> Ordering {
    a.map(Real::new).cmp(&b.map(Real::new))
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.label.cmp(&other.label).then_with(|| {
            self.edges.len().cmp(&other.edges.len()).then_with(|| {
                for (a, b) in self.edges.iter().zip(&other.edges) {
                    let o = a
                        .input
                        .cmp(&b.input)
                        .then_with(|| cmp_prob(a.probability, b.probability))
                        .then_with(|| a.target.cmp(&b.target));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            })
        })
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// Structural equality with probabilities compared within `tol`.
pub fn nodes_approx_eq(a: &Node, b: &Node, tol: f64) -> bool {
    a.label == b.label
        && a.edges.len() == b.edges.len()
        && a.edges.iter().zip(&b.edges).all(|(x, y)| {
            x.input == y.input
                && match (x.probability, y.probability) {
                    (Some(p), Some(q)) => (p - q).abs() <= tol,
                    (None, None) => true,
                    _ => false,
                }
                && nodes_approx_eq(&x.target, &y.target, tol)
        })
}

#[derive(Clone, Debug)]
pub struct GameTree {
    pub root: Node,
    pub kind: ChoiceKind,
    pub depth: usize,
}

pub fn tree_eq(a: &GameTree, b: &GameTree, tol: f64) -> bool {
    a.kind == b.kind && a.depth == b.depth && nodes_approx_eq(&a.root, &b.root, tol)
}

fn inputs_of(p: &Process) -> Result<&[Value]> {
    p.inputs()
        .elements()
        .ok_or_else(|| Error::InputNotEnumerable(p.inputs().name().to_string()))
}

/// Unfolds `p` from `state` for `depth` steps.
pub fn unfold(p: &Process, state: &Value, depth: usize) -> Result<GameTree> {
    let inputs = inputs_of(p)?;
    if !p.states().contains(state) {
        return Err(Error::Membership {
            space: p.states().name().to_string(),
            value: state.to_string(),
        });
    }
    let edges = expand(p, inputs, state, depth)?;
    Ok(GameTree {
        root: Node {
            label: Label::Root,
            state: Some(state.clone()),
            edges,
        },
        kind: p.kind(),
        depth,
    })
}

fn expand(p: &Process, inputs: &[Value], state: &Value, depth: usize) -> Result<Vec<Edge>> {
    let mut edges = Vec::new();
    for c in inputs {
        edges.extend(expand_input(p, inputs, state, c, depth)?);
    }
    Ok(edges)
}

fn expand_input(p: &Process, inputs: &[Value], state: &Value, c: &Value, depth: usize) -> Result<Vec<Edge>> {
    let kind = p.kind();
    if depth == 0 {
        return Ok(vec![Edge {
            input: c.clone(),
            probability: (kind == ChoiceKind::Prob).then_some(1.0),
            target: Node::leaf(Label::Truncated),
        }]);
    }
    let choice = p.step(state, c)?;
    let mut children: Vec<(Node, f64)> = Vec::with_capacity(choice.len());
    for (t, w) in choice.weighted() {
        children.push((subtree(p, inputs, t, depth)?, w));
    }
    Ok(merge(kind, children)
        .into_iter()
        .map(|(target, w)| Edge {
            input: c.clone(),
            probability: (kind == ChoiceKind::Prob).then_some(w),
            target,
        })
        .collect())
}

fn subtree(p: &Process, inputs: &[Value], t: &Transition, depth: usize) -> Result<Node> {
    Ok(match t {
        Transition::Result(r) => Node::leaf(Label::Result(r.clone())),
        Transition::Continue { state, output } => Node {
            label: Label::Output(output.clone()),
            state: Some(state.clone()),
            edges: expand(p, inputs, state, depth - 1)?,
        },
    })
}

/// Collapses structurally equal siblings: probabilities add up for `Prob`,
/// duplicates vanish for `NDet`. The result is sorted.
fn merge(kind: ChoiceKind, children: Vec<(Node, f64)>) -> Vec<(Node, f64)> {
    let mut exact: BTreeMap<Node, f64> = BTreeMap::new();
    for (n, w) in children {
        *exact.entry(n).or_insert(0.0) += w;
    }
    let mut out: Vec<(Node, f64)> = Vec::with_capacity(exact.len());
    for (n, w) in exact {
        match out.iter_mut().find(|(m, _)| nodes_approx_eq(m, &n, EQUALITY_TOLERANCE)) {
            Some(slot) => slot.1 += w,
            None => out.push((n, w)),
        }
    }
    if kind != ChoiceKind::Prob {
        for slot in &mut out {
            slot.1 = 1.0;
        }
    }
    out
}

/// Reads the children under one input as a choice over subtrees.
fn branch_choice(kind: ChoiceKind, node: &Node, input: &Value) -> Choice<Node> {
    let children = node.branch(input).map(|e| (e.target.clone(), e.probability.unwrap_or(1.0)));
    match kind {
        ChoiceKind::Prob => Choice::prob_unchecked(children),
        ChoiceKind::NDet => Choice::ndet_unchecked(children.map(|(n, _)| n)),
        ChoiceKind::Det => {
            let mut v: Vec<Node> = children.map(|(n, _)| n).collect();
            if v.len() == 1 {
                Choice::det(v.pop().unwrap())
            } else {
                Choice::ndet_unchecked(v)
            }
        }
    }
}

/// Checks, for every input, that stepping and then unfolding the successors
/// one level shallower gives the same choice of subtrees as the input's
/// branch in the full unfolding.
///
/// The full unfolding is built one root branch at a time, so memory stays
/// proportional to a single branch.
pub fn check_commutes(p: &Process, state: &Value, depth: usize) -> Result<bool> {
    let inputs = inputs_of(p)?;
    if !p.states().contains(state) {
        return Err(Error::Membership {
            space: p.states().name().to_string(),
            value: state.to_string(),
        });
    }
    for c in inputs {
        let branch = Node {
            label: Label::Root,
            state: None,
            edges: expand_input(p, inputs, state, c, depth)?,
        };
        if !commutes_at(p, state, c, depth, &branch)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// As [`check_commutes`], against a supplied tree.
pub fn check_commutes_tree(p: &Process, state: &Value, tree: &GameTree) -> Result<bool> {
    if tree.kind != p.kind() {
        return Ok(false);
    }
    for c in inputs_of(p)? {
        if !commutes_at(p, state, c, tree.depth, &tree.root)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn commutes_at(p: &Process, state: &Value, c: &Value, depth: usize, root: &Node) -> Result<bool> {
    let kind = p.kind();
    let actual = branch_choice(kind, root, c);
    let expected: Choice<Node> = if depth == 0 {
        Choice::point(kind, Node::leaf(Label::Truncated))
    } else {
        p.probe(state, c)?.try_map(|t| {
            Ok(match t {
                Transition::Result(r) => Node::leaf(Label::Result(r.clone())),
                Transition::Continue { state: s2, output } => {
                    let sub = unfold(p, s2, depth - 1)?;
                    Node {
                        label: Label::Output(output.clone()),
                        state: Some(s2.clone()),
                        edges: sub.root.edges,
                    }
                }
            })
        })?
    };
    Ok(choice_trees_eq(&expected, &actual))
}

fn choice_trees_eq(a: &Choice<Node>, b: &Choice<Node>) -> bool {
    if a.kind() != b.kind() && !(a.len() == 1 && b.len() == 1) {
        return false;
    }
    let (wa, wb) = (a.weighted(), b.weighted());
    wa.len() == wb.len()
        && wa.iter().all(|(n, p)| {
            wb.iter()
                .any(|(m, q)| (p - q).abs() <= EQUALITY_TOLERANCE && nodes_approx_eq(n, m, EQUALITY_TOLERANCE))
        })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeStats {
    pub nodes: usize,
    pub result_leaves: usize,
    pub output_leaves: usize,
    pub truncated_leaves: usize,
    pub max_branching: usize,
    /// Path weight reaching result leaves, indexed by depth. Path weight is
    /// the product of edge probabilities (1 for non-probabilistic edges),
    /// summed over every input.
    pub result_mass_by_depth: Vec<f64>,
}

pub fn tree_stats(t: &GameTree) -> TreeStats {
    let mut stats = TreeStats {
        nodes: 0,
        result_leaves: 0,
        output_leaves: 0,
        truncated_leaves: 0,
        max_branching: 0,
        result_mass_by_depth: vec![0.0; t.depth + 2],
    };
    let mut stack = vec![(&t.root, 0usize, 1.0f64)];
    while let Some((node, d, w)) = stack.pop() {
        stats.nodes += 1;
        stats.max_branching = stats.max_branching.max(node.edges.len());
        match (&node.label, node.is_leaf()) {
            (Label::Result(_), _) => {
                stats.result_leaves += 1;
                if d >= stats.result_mass_by_depth.len() {
                    stats.result_mass_by_depth.resize(d + 1, 0.0);
                }
                stats.result_mass_by_depth[d] += w;
            }
            (Label::Truncated, _) => stats.truncated_leaves += 1,
            (Label::Output(_), true) => stats.output_leaves += 1,
            _ => {}
        }
        for e in &node.edges {
            stack.push((&e.target, d + 1, w * e.probability.unwrap_or(1.0)));
        }
    }
    stats
}

impl TreeStats {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "nodes": self.nodes,
            "result_leaves": self.result_leaves,
            "output_leaves": self.output_leaves,
            "truncated_leaves": self.truncated_leaves,
            "max_branching": self.max_branching,
            "result_mass_by_depth": self.result_mass_by_depth,
        })
    }
}

fn node_json(n: &Node) -> serde_json::Value {
    let mut label = serde_json::Map::new();
    label.insert("class".into(), json!(n.label.class()));
    if let Some(v) = n.label.value() {
        label.insert("value".into(), v.to_json());
    }
    let edges: Vec<serde_json::Value> = n
        .edges
        .iter()
        .map(|e| {
            let mut m = serde_json::Map::new();
            m.insert("input".into(), e.input.to_json());
            if let Some(p) = e.probability {
                m.insert("p".into(), crate::json::number(p));
            }
            m.insert("node".into(), node_json(&e.target));
            serde_json::Value::Object(m)
        })
        .collect();
    json!({ "label": label, "edges": edges })
}

impl GameTree {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "kind": self.kind.as_str(),
            "depth": self.depth,
            "root": node_json(&self.root),
        })
    }

    /// Graphviz rendering; edges read `c` or `c : p`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n  node [shape=box];\n");
        let mut next = 0usize;
        let mut stack = vec![(&self.root, None::<(usize, String)>)];
        while let Some((node, parent)) = stack.pop() {
            let id = next;
            next += 1;
            let text = match node.label.value() {
                Some(v) => format!("{} {}", node.label.class(), v),
                None => node.label.class().to_string(),
            };
            let _ = writeln!(out, "  n{id} [label=\"{}\"];", escape(&text));
            if let Some((pid, elabel)) = parent {
                let _ = writeln!(out, "  n{pid} -> n{id} [label=\"{}\"];", escape(&elabel));
            }
            for e in node.edges.iter().rev() {
                let elabel = match e.probability {
                    Some(p) => format!("{} : {}", e.input, format_g(p, 6)),
                    None => e.input.to_string(),
                };
                stack.push((&e.target, Some((id, elabel))));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
