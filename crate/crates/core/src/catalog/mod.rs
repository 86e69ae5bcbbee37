//! Ready-made games and strategies.

pub mod bayesian;
pub mod examples;
pub mod matrix;
pub mod monitoring;
pub mod network;
pub mod strategies;

use crate::equilibrium::CandidateSet;
use crate::error::{Error, Result};
use crate::game::{Game, Strategy};

pub use strategies::{builtin_strategy, default_candidate_names, strategy_names};

/// Names accepted by [`build`], with a one-line description each.
pub const GAMES: [(&str, &str); 5] = [
    ("pd", "one-shot prisoner's dilemma"),
    ("pd-repeated", "infinitely repeated prisoner's dilemma"),
    ("monitoring", "repeated prisoner's dilemma with a noisy public signal"),
    ("bayesian", "nature draws one of four 2x2 games, players see a partition"),
    ("network", "players add and drop friendships, paid by their degree"),
];

#[derive(Clone, Debug, Default)]
pub struct CatalogOptions {
    /// Overrides the game's own discount factor.
    pub lambda: Option<f64>,
    pub k: Option<f64>,
    pub m: Option<f64>,
    pub n: Option<f64>,
    pub nodes: Option<usize>,
}

pub fn build(name: &str, opts: &CatalogOptions) -> Result<Game> {
    let game = match name {
        "pd" => matrix::build_matrix_game(&matrix::prisoners_dilemma(matrix::Mode::OneShot))?,
        "pd-repeated" => matrix::build_matrix_game(&matrix::prisoners_dilemma(matrix::Mode::Repeated))?,
        "monitoring" => {
            let d = monitoring::MonitoringParams::default();
            let params =
                monitoring::MonitoringParams::new(opts.k.unwrap_or(d.k), opts.m.unwrap_or(d.m), opts.n.unwrap_or(d.n))?;
            monitoring::build_monitoring_game(params)?
        }
        "bayesian" => bayesian::build_bayesian_game(bayesian::BayesianTables::default())?,
        "network" => network::build_network_game(opts.nodes.unwrap_or(3))?,
        _ => return Err(Error::UnknownGame(name.to_string())),
    };
    with_lambda(game, opts.lambda)
}

/// Replaces the discount factor when one is given.
pub fn with_lambda(game: Game, lambda: Option<f64>) -> Result<Game> {
    match lambda {
        Some(l) => {
            let outcome = game.outcome.with_discount(l)?;
            game.with_outcome(outcome)
        }
        None => Ok(game),
    }
}

pub fn strategies_by_name(game: &Game, p: usize, names: &[String]) -> Result<Vec<Strategy>> {
    names.iter().map(|n| builtin_strategy(game, p, n)).collect()
}

pub fn default_candidates(game: &Game) -> Result<CandidateSet> {
    let per_player = (0..game.player_count())
        .map(|p| strategies_by_name(game, p, &default_candidate_names(game, p)))
        .collect::<Result<Vec<_>>>()?;
    CandidateSet::new(per_player)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_game_builds() {
        for (name, _) in GAMES {
            let g = build(name, &CatalogOptions::default()).unwrap();
            assert!(default_candidates(&g).is_ok(), "{name}");
        }
    }

    #[test]
    fn unknown_game() {
        assert!(matches!(build("chess", &CatalogOptions::default()), Err(Error::UnknownGame(_))));
    }

    #[test]
    fn discount_override() {
        let opts = CatalogOptions { lambda: Some(0.5), ..Default::default() };
        assert_eq!(build("pd-repeated", &opts).unwrap().outcome.discount(), 0.5);
    }

    #[test]
    fn strategy_availability() {
        let pd = build("pd-repeated", &CatalogOptions::default()).unwrap();
        assert!(builtin_strategy(&pd, 0, "tit-for-tat").is_ok());
        assert!(matches!(builtin_strategy(&pd, 0, "type-contingent:UD"), Err(Error::UnknownStrategy(_))));
        let bayes = build("bayesian", &CatalogOptions::default()).unwrap();
        assert!(builtin_strategy(&bayes, 0, "type-contingent:UD").is_ok());
        assert!(builtin_strategy(&bayes, 1, "type-contingent:LR").is_ok());
        assert!(matches!(builtin_strategy(&bayes, 0, "tit-for-tat"), Err(Error::UnknownStrategy(_))));
    }
}
