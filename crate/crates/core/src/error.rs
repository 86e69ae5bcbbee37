use thiserror::Error;

use crate::choice::ChoiceKind;

/// Every failure the engine can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    /// Non-deterministic and probabilistic choices cannot be combined.
    #[error("cannot combine {0:?} with {1:?} choices")]
    MixedChoice(ChoiceKind, ChoiceKind),

    #[error("processes use different choice functors ({0:?} vs {1:?})")]
    KindMismatch(ChoiceKind, ChoiceKind),

    #[error("input spaces differ ({0} vs {1})")]
    InputMismatch(String, String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("{value} is not a member of {space}")]
    Membership { space: String, value: String },

    #[error("non-deterministic choice left unresolved at turn {turn}")]
    NDetUnresolved { turn: usize },

    #[error("outcome of a non-deterministic tree is a set; use evaluate_ndet")]
    NDetOutcome,

    #[error("more than {limit} resolutions of non-determinism")]
    ResolutionExplosion { limit: usize },

    #[error("enumeration too large: {0}")]
    Explosion(String),

    #[error("input space {0} is not enumerated")]
    InputNotEnumerable(String),

    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },

    #[error("invalid parameters: {0}")]
    Param(String),

    #[error("unknown strategy {0}")]
    UnknownStrategy(String),

    #[error("unknown game {0}")]
    UnknownGame(String),

    #[error("size out of range: {0}")]
    Size(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
