//! Plain-text renderings for `--format text`.

use std::fmt::Write;

use koalg::equilibrium::{Holds, Verdict};
use koalg::game::TraceStep;
use koalg::json::format_g;
use koalg::outcome::{MonteCarlo, OutcomeResult};
use koalg::tree::{GameTree, Node};
use koalg::Transition;

fn num(x: f64) -> String {
    format_g(x, 10)
}

fn vector(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| num(x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn trace(steps: &[TraceStep], value: &[f64]) -> String {
    let mut out = String::new();
    for s in steps {
        let _ = match &s.transition {
            Transition::Continue { output, .. } => writeln!(out, "turn {}: {output}", s.turn),
            Transition::Result(r) => writeln!(out, "turn {}: result {r}", s.turn),
        };
    }
    let _ = writeln!(out, "outcome: {}", vector(value));
    out
}

fn node(out: &mut String, n: &Node, indent: usize) {
    for e in &n.edges {
        let label = match e.target.label.value() {
            Some(v) => format!("{} {v}", e.target.label.class()),
            None => e.target.label.class().to_string(),
        };
        let p = e.probability.map(|p| format!(" ({})", format_g(p, 6))).unwrap_or_default();
        let _ = writeln!(out, "{:indent$}{} -> {label}{p}", "", e.input, indent = indent);
        node(out, &e.target, indent + 2);
    }
}

pub fn tree(t: &GameTree) -> String {
    let mut out = format!("{} tree, depth {}\n", t.kind.as_str(), t.depth);
    node(&mut out, &t.root, 0);
    out
}

pub fn outcome(r: &OutcomeResult) -> String {
    let how = if r.exact { "exact" } else { "truncated" };
    format!("outcome: {} ± {} ({how})\n", vector(&r.value), num(r.error_bound))
}

pub fn monte_carlo(mc: &MonteCarlo) -> String {
    format!(
        "estimate: {} (standard error {}, {} samples)\n",
        vector(&mc.mean),
        vector(&mc.std_error),
        mc.samples
    )
}

pub fn verdict(v: &Verdict) -> String {
    let holds = match v.holds {
        Holds::Yes => "holds",
        Holds::No => "fails",
        Holds::Inconclusive => "inconclusive",
    };
    let mut out = format!("{}: {holds}\n", v.kind.as_str());
    out.push_str(&outcome(&v.outcome));
    if let Some(w) = v.witness() {
        let horizon = w.horizon.map(|n| format!(" ({n}-modification)")).unwrap_or_default();
        let _ = writeln!(
            out,
            "witness: player {} switching to {}{horizon}: {} against {}",
            w.player_id,
            w.strategy,
            num(w.alternative),
            num(w.base)
        );
    }
    out
}

pub fn games() -> String {
    koalg::catalog::GAMES
        .iter()
        .map(|(n, d)| format!("{n:<12} {d}\n"))
        .collect()
}

pub fn strategy_lists(players: &[(String, Vec<String>)]) -> String {
    players
        .iter()
        .map(|(id, names)| format!("player {id}: {}\n", names.join(", ")))
        .collect()
}
