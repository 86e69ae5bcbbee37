//! Best responses, Nash equilibria and subgame perfection, each relative to
//! finite candidate sets of strategies.
//!
//! Outcomes are computed to a certified radius, so a comparison can come out
//! inconclusive. With tolerance `eps`, each evaluation runs at `eps/4`; an
//! alternative `a ± ea` against the baseline `b ± eb` is
//!
//! * no improvement when `b − eb ≥ a + ea − eps`,
//! * a strict improvement when `b + eb < a − ea − eps`,
//! * inconclusive otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde_json::json;

use crate::choice::Choice;
use crate::error::{Error, Result};
use crate::exec::{try_par_map, Parallelism};
use crate::game::{fix_strategies, Game, Strategy, StrategyProfile};
use crate::json::number;
use crate::outcome::{evaluate_to_tolerance, OutcomeResult};
use crate::process::Transition;
use crate::space::Space;
use crate::value::Value;

/// Most prefix tables enumerated for one player and horizon.
pub const NMOD_CAP: usize = 10_000;
/// Most joint prefix profiles checked for one horizon.
pub const JOINT_CAP: usize = 100_000;
/// Most (state, output, profile) triples tracked per turn when collecting
/// reachable observations.
pub const REACH_CAP: usize = 100_000;

/// Per-player candidate strategies, each with its initial epistemic state.
#[derive(Clone, Debug)]
pub struct CandidateSet {
    pub per_player: Vec<Vec<Strategy>>,
}

impl CandidateSet {
    pub fn new(per_player: Vec<Vec<Strategy>>) -> Result<CandidateSet> {
        if let Some(p) = per_player.iter().position(Vec::is_empty) {
            return Err(Error::Validation(format!("no candidates for player {}", p + 1)));
        }
        Ok(CandidateSet { per_player })
    }

    fn check(&self, game: &Game) -> Result<()> {
        if self.per_player.len() != game.player_count() {
            return Err(Error::Shape(format!(
                "candidates for {} players in a {}-player game",
                self.per_player.len(),
                game.player_count()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Holds {
    Yes,
    Inconclusive,
    No,
}

impl Holds {
    pub fn to_json(self) -> serde_json::Value {
        match self {
            Holds::Yes => json!(true),
            Holds::No => json!(false),
            Holds::Inconclusive => json!("inconclusive"),
        }
    }

    /// The combined verdict of several checks.
    fn and(self, other: Holds) -> Holds {
        self.max(other)
    }
}

/// The alternative that did best against a baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub player: usize,
    pub player_id: String,
    pub strategy: String,
    pub verdict: Holds,
    pub base: f64,
    pub base_error: f64,
    pub alternative: f64,
    pub alternative_error: f64,
    /// Horizon of the modification being checked, for subgame checks.
    pub horizon: Option<usize>,
    /// The joint prefix profile the check ran under.
    pub prefix: Option<serde_json::Value>,
}

impl Witness {
    pub fn gain(&self) -> f64 {
        self.alternative - self.base
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        m.insert("player".into(), json!(self.player_id));
        m.insert("strategy".into(), json!(self.strategy));
        m.insert("verdict".into(), self.verdict.to_json());
        m.insert("base".into(), number(self.base));
        m.insert("base_error".into(), number(self.base_error));
        m.insert("alternative".into(), number(self.alternative));
        m.insert("alternative_error".into(), number(self.alternative_error));
        if let Some(n) = self.horizon {
            m.insert("n".into(), json!(n));
        }
        if let Some(p) = &self.prefix {
            m.insert("prefix".into(), p.clone());
        }
        serde_json::Value::Object(m)
    }

    fn rank(&self) -> (Holds, f64) {
        (self.verdict, self.gain())
    }
}

/// Picks the more damning witness: a failure beats an inconclusive one,
/// then larger gain wins, then the earlier player and name.
fn worse(a: Witness, b: Witness) -> Witness {
    let (ha, ga) = a.rank();
    let (hb, gb) = b.rank();
    let ord = ha
        .cmp(&hb)
        .then(ga.total_cmp(&gb))
        .then_with(|| b.player.cmp(&a.player))
        .then_with(|| b.strategy.cmp(&a.strategy));
    if ord.is_ge() {
        a
    } else {
        b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    BestResponse,
    Nash,
    SubgamePerfect,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::BestResponse => "best_response",
            VerdictKind::Nash => "nash",
            VerdictKind::SubgamePerfect => "subgame_perfect",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub holds: Holds,
    /// The worst non-holding alternative per player, in player order.
    pub witnesses: Vec<Witness>,
    pub n_max: Option<usize>,
    pub eps: f64,
    /// The outcome of the profile under test.
    pub outcome: OutcomeResult,
}

impl Verdict {
    /// The single most damning witness.
    pub fn witness(&self) -> Option<&Witness> {
        self.witnesses.iter().reduce(|a, b| {
            let w = worse(a.clone(), b.clone());
            if w == *a {
                a
            } else {
                b
            }
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        m.insert("kind".into(), json!(self.kind.as_str()));
        m.insert("holds".into(), self.holds.to_json());
        m.insert("eps".into(), number(self.eps));
        m.insert("outcome".into(), self.outcome.to_json());
        if let Some(w) = self.witness() {
            m.insert("witness".into(), w.to_json());
        }
        m.insert(
            "witnesses".into(),
            serde_json::Value::Array(self.witnesses.iter().map(Witness::to_json).collect()),
        );
        if let Some(n) = self.n_max {
            m.insert("n_max".into(), json!(n));
        }
        serde_json::Value::Object(m)
    }
}

/// Outcome of a fully specified profile, certified to `eps/4`.
pub fn evaluate_profile(game: &Game, profile: &[Strategy], eps: f64) -> Result<OutcomeResult> {
    let closed = fix_strategies(game, &StrategyProfile::full(profile.to_vec()))?;
    evaluate_to_tolerance(&closed.process, &closed.initial, &game.outcome, eps / 4.0)
}

fn classify(q: usize, base: &OutcomeResult, alt: &OutcomeResult, eps: f64) -> Holds {
    let (b, eb) = (base.value[q], base.error_bound);
    let (a, ea) = (alt.value[q], alt.error_bound);
    if b - eb >= a + ea - eps {
        Holds::Yes
    } else if b + eb < a - ea - eps {
        Holds::No
    } else {
        Holds::Inconclusive
    }
}

struct Comparison<'a> {
    game: &'a Game,
    q: usize,
    eps: f64,
    horizon: Option<usize>,
    prefix: Option<&'a serde_json::Value>,
}

impl Comparison<'_> {
    /// The verdict for player `q` over the alternatives, with the worst
    /// non-holding alternative.
    fn judge(&self, base: &OutcomeResult, alts: &[(String, OutcomeResult)]) -> (Holds, Option<Witness>) {
        let mut holds = Holds::Yes;
        let mut witness: Option<Witness> = None;
        for (name, alt) in alts {
            let h = classify(self.q, base, alt, self.eps);
            holds = holds.and(h);
            if h == Holds::Yes {
                continue;
            }
            let w = Witness {
                player: self.q,
                player_id: self.game.players[self.q].id.clone(),
                strategy: name.clone(),
                verdict: h,
                base: base.value[self.q],
                base_error: base.error_bound,
                alternative: alt.value[self.q],
                alternative_error: alt.error_bound,
                horizon: self.horizon,
                prefix: self.prefix.cloned(),
            };
            witness = Some(match witness {
                Some(old) => worse(old, w),
                None => w,
            });
        }
        (holds, witness)
    }
}

fn check_profile(game: &Game, profile: &[Strategy]) -> Result<()> {
    if profile.len() != game.player_count() {
        return Err(Error::Shape(format!(
            "profile has {} strategies for {} players",
            profile.len(),
            game.player_count()
        )));
    }
    Ok(())
}

fn replaced(profile: &[Strategy], q: usize, s: &Strategy) -> Vec<Strategy> {
    let mut v = profile.to_vec();
    v[q] = s.clone();
    v
}

/// Whether `profile[q]` is a best response among `candidates` for `q`.
pub fn best_response(
    game: &Game,
    profile: &[Strategy],
    q: usize,
    candidates: &[Strategy],
    eps: f64,
    mode: Parallelism,
) -> Result<Verdict> {
    check_profile(game, profile)?;
    if q >= game.player_count() {
        return Err(Error::Validation(format!("no player {}", q + 1)));
    }
    let base = evaluate_profile(game, profile, eps)?;
    let alts = try_par_map(mode, candidates, |c| {
        Ok::<_, Error>((c.name().to_string(), evaluate_profile(game, &replaced(profile, q, c), eps)?))
    })?;
    let cmp = Comparison {
        game,
        q,
        eps,
        horizon: None,
        prefix: None,
    };
    let (holds, witness) = cmp.judge(&base, &alts);
    Ok(Verdict {
        kind: VerdictKind::BestResponse,
        holds,
        witnesses: witness.into_iter().collect(),
        n_max: None,
        eps,
        outcome: base,
    })
}

/// Whether no player gains by unilaterally switching to one of their
/// candidates.
pub fn nash_check(
    game: &Game,
    profile: &[Strategy],
    candidates: &CandidateSet,
    eps: f64,
    mode: Parallelism,
) -> Result<Verdict> {
    check_profile(game, profile)?;
    candidates.check(game)?;
    let base = evaluate_profile(game, profile, eps)?;
    let tasks: Vec<(usize, &Strategy)> = candidates
        .per_player
        .iter()
        .enumerate()
        .flat_map(|(q, cs)| cs.iter().map(move |c| (q, c)))
        .collect();
    let evaluated = try_par_map(mode, &tasks, |&(q, c)| {
        evaluate_profile(game, &replaced(profile, q, c), eps).map(|r| (q, c.name().to_string(), r))
    })?;
    let (holds, witnesses) = judge_players(game, &base, evaluated, eps, None, None);
    Ok(Verdict {
        kind: VerdictKind::Nash,
        holds,
        witnesses,
        n_max: None,
        eps,
        outcome: base,
    })
}

fn judge_players(
    game: &Game,
    base: &OutcomeResult,
    evaluated: Vec<(usize, String, OutcomeResult)>,
    eps: f64,
    horizon: Option<usize>,
    prefix: Option<&serde_json::Value>,
) -> (Holds, Vec<Witness>) {
    let mut by_player: BTreeMap<usize, Vec<(String, OutcomeResult)>> = BTreeMap::new();
    for (q, name, r) in evaluated {
        by_player.entry(q).or_default().push((name, r));
    }
    let mut holds = Holds::Yes;
    let mut witnesses = Vec::new();
    for (q, alts) in by_player {
        let cmp = Comparison {
            game,
            q,
            eps,
            horizon,
            prefix,
        };
        let (h, w) = cmp.judge(base, &alts);
        holds = holds.and(h);
        witnesses.extend(w);
    }
    (holds, witnesses)
}

/// A strategy that follows a fixed table for its first `horizon` turns and
/// then behaves as `base` from `base`'s initial epistemic state.
#[derive(Clone, Debug)]
pub struct NModification {
    pub base: Strategy,
    pub horizon: usize,
    /// `(turn, observation) → action` for turns `0..horizon`.
    pub prefix: Arc<BTreeMap<(usize, Value), Value>>,
}

pub type PrefixTable = Arc<BTreeMap<(usize, Value), Value>>;

fn prefix_label(prefix: &BTreeMap<(usize, Value), Value>) -> String {
    prefix
        .iter()
        .map(|((k, b), a)| format!("{k}:{b}->{a}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn prefix_json(prefix: &BTreeMap<(usize, Value), Value>) -> serde_json::Value {
    serde_json::Value::Array(
        prefix
            .iter()
            .map(|((k, b), a)| json!([k, b.to_json(), a.to_json()]))
            .collect(),
    )
}

impl NModification {
    pub fn new(base: &Strategy, horizon: usize, prefix: PrefixTable) -> NModification {
        NModification {
            base: base.clone(),
            horizon,
            prefix,
        }
    }

    /// The modified strategy. Its epistemic states are `K(k)` for the turns
    /// of the prefix and `E(e)` for the base's states.
    pub fn strategy(&self) -> Result<Strategy> {
        let n = self.horizon;
        if n == 0 {
            return Ok(self.base.clone());
        }
        let base = self.base.clone();
        let inner = base.epistemic().clone();
        let epistemic = Space::predicate(&format!("({} + [{n}])", inner.name()), move |v| match v.as_tagged() {
            Some(("K", Value::Int(k))) => (0..n as i64).contains(k),
            Some(("E", e)) => inner.contains(e),
            _ => false,
        });
        let table = self.prefix.clone();
        let kind = base.kind();
        let name = format!("{}[{}]", base.name(), prefix_label(&self.prefix));
        let label = name.clone();
        Strategy::new(&name, epistemic, kind, Value::tagged("K", Value::Int(0)), move |e, b| {
            match e.as_tagged() {
                Some(("K", Value::Int(k))) => {
                    let k = *k as usize;
                    let a = table.get(&(k, b.clone())).ok_or_else(|| {
                        Error::Validation(format!("{label} has no action for observation {b} at turn {k}"))
                    })?;
                    let next = if k + 1 < n {
                        Value::tagged("K", Value::Int(k as i64 + 1))
                    } else {
                        Value::tagged("E", base.initial().clone())
                    };
                    Ok(Choice::point(kind, (next, a.clone())))
                }
                Some(("E", inner)) => Ok(base
                    .step(inner, b)?
                    .map(|(e2, a)| (Value::tagged("E", e2.clone()), a.clone()))),
                _ => Err(Error::Shape(format!("{e} is not an epistemic state of {label}"))),
            }
        })
    }
}

/// Every assignment of an action to each key, in lexicographic order of the
/// action indices.
pub fn prefix_tables(actions: &[Value], keys: &[(usize, Value)]) -> Result<Vec<PrefixTable>> {
    let count = (actions.len() as u128).checked_pow(keys.len() as u32).unwrap_or(u128::MAX);
    if count > NMOD_CAP as u128 {
        return Err(Error::Explosion(format!(
            "{} actions over {} prefix entries exceed {NMOD_CAP} modifications",
            actions.len(),
            keys.len()
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; keys.len()];
    for _ in 0..count {
        out.push(Arc::new(
            keys.iter()
                .zip(&digits)
                .map(|(k, &d)| (k.clone(), actions[d].clone()))
                .collect(),
        ));
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < actions.len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// All `n`-modifications of `base` that prescribe an action for every
/// observation in `observations` at each of the first `n` turns.
pub fn enumerate_nmods(base: &Strategy, n: usize, actions: &[Value], observations: &[Value]) -> Result<Vec<NModification>> {
    let keys: Vec<(usize, Value)> = (0..n)
        .flat_map(|k| observations.iter().map(move |b| (k, b.clone())))
        .collect();
    Ok(prefix_tables(actions, &keys)?
        .into_iter()
        .map(|t| NModification::new(base, n, t))
        .collect())
}

/// [`enumerate_nmods`] over the full observation space of player `p`.
pub fn enumerate_nmods_for(game: &Game, p: usize, base: &Strategy, n: usize) -> Result<Vec<NModification>> {
    let player = &game.players[p];
    let observations = player
        .observations
        .elements()
        .ok_or_else(|| Error::InputNotEnumerable(player.observations.name().to_string()))?;
    let actions = player.actions.elements().unwrap_or(&[]);
    enumerate_nmods(base, n, actions, observations)
}

/// Observations each player can receive at turns `0..turns`, whatever
/// anybody plays: `[p][k]` is the set for player `p` at turn `k`.
pub fn reachable_observations(game: &Game, turns: usize) -> Result<Vec<Vec<BTreeSet<Value>>>> {
    let n = game.player_count();
    let profiles = game.profiles();
    let profiles = profiles.elements().unwrap_or(&[]);
    let mut out = vec![Vec::with_capacity(turns); n];
    let mut layer: BTreeSet<(Value, Value, Value)> = BTreeSet::from([(
        game.initial_state.clone(),
        game.seed_output.clone(),
        game.seed_actions.clone(),
    )]);
    for k in 0..turns {
        for (p, sets) in out.iter_mut().enumerate() {
            sets.push(layer.iter().map(|(_, c, a)| game.observe(p, c, a)).collect());
        }
        if k + 1 == turns {
            break;
        }
        let mut next = BTreeSet::new();
        for (s, _, _) in &layer {
            for a in profiles {
                for t in game.core.step(s, a)?.support() {
                    if let Transition::Continue { state, output } = t {
                        next.insert((state.clone(), output.clone(), a.clone()));
                    }
                }
            }
            if next.len() > REACH_CAP {
                return Err(Error::Explosion(format!("more than {REACH_CAP} reachable situations at turn {}", k + 1)));
            }
        }
        layer = next;
    }
    Ok(out)
}

/// Checks, for every horizon `n ≤ n_max`, every joint prefix profile and
/// every player `q`, that the `n`-modification of `q`'s strategy is a best
/// response among the `n`-modifications of `q`'s candidates sharing the
/// same prefix. Horizon `0` is the Nash check.
///
/// Prefixes range over the observations that can actually occur at each
/// turn (see [`reachable_observations`]); entries for impossible
/// observations could never influence play.
pub fn subgame_perfect_check(
    game: &Game,
    profile: &[Strategy],
    candidates: &CandidateSet,
    n_max: usize,
    eps: f64,
    mode: Parallelism,
) -> Result<Verdict> {
    let nash = nash_check(game, profile, candidates, eps, mode)?;
    let mut holds = nash.holds;
    let mut worst: BTreeMap<usize, Witness> = nash.witnesses.into_iter().map(|w| (w.player, w)).collect();
    let reach = reachable_observations(game, n_max)?;
    let players = game.player_count();

    for n in 1..=n_max {
        let mut tables: Vec<Vec<PrefixTable>> = Vec::with_capacity(players);
        for (seen, player) in reach.iter().zip(&game.players) {
            let keys: Vec<(usize, Value)> = (0..n)
                .flat_map(|k| seen[k].iter().map(move |b| (k, b.clone())))
                .collect();
            tables.push(prefix_tables(player.actions.elements().unwrap_or(&[]), &keys)?);
        }
        let joint = tables
            .iter()
            .try_fold(1usize, |acc, t| acc.checked_mul(t.len()).filter(|&c| c <= JOINT_CAP))
            .ok_or_else(|| Error::Explosion(format!("more than {JOINT_CAP} joint {n}-modification profiles")))?;
        let indices: Vec<usize> = (0..joint).collect();
        let results = try_par_map(mode, &indices, |&j| {
            let mut rest = j;
            let mut pick = vec![0usize; players];
            for p in (0..players).rev() {
                pick[p] = rest % tables[p].len();
                rest /= tables[p].len();
            }
            let chosen: Vec<&PrefixTable> = (0..players).map(|p| &tables[p][pick[p]]).collect();
            let modified: Vec<Strategy> = profile
                .iter()
                .zip(&chosen)
                .map(|(s, t)| NModification::new(s, n, (*t).clone()).strategy())
                .collect::<Result<_>>()?;
            let base = evaluate_profile(game, &modified, eps)?;
            let mut evaluated = Vec::new();
            for (q, cs) in candidates.per_player.iter().enumerate() {
                for c in cs {
                    let alt = NModification::new(c, n, chosen[q].clone()).strategy()?;
                    let r = evaluate_profile(game, &replaced(&modified, q, &alt), eps)?;
                    evaluated.push((q, c.name().to_string(), r));
                }
            }
            let prefix = serde_json::Value::Array(chosen.iter().map(|t| prefix_json(t)).collect());
            Ok::<_, Error>(judge_players(game, &base, evaluated, eps, Some(n), Some(&prefix)))
        })?;
        for (h, ws) in results {
            holds = holds.and(h);
            for w in ws {
                let q = w.player;
                let w = match worst.remove(&q) {
                    Some(old) => worse(old, w),
                    None => w,
                };
                worst.insert(q, w);
            }
        }
    }
    Ok(Verdict {
        kind: VerdictKind::SubgamePerfect,
        holds,
        witnesses: worst.into_values().collect(),
        n_max: Some(n_max),
        eps,
        outcome: nash.outcome,
    })
}
