pub mod catalog;
pub mod choice;
pub mod equilibrium;
pub mod error;
pub mod exec;
pub mod game;
pub mod json;
pub mod outcome;
pub mod process;
pub mod space;
pub mod tree;
pub mod value;

pub use choice::{Choice, ChoiceKind};
pub use error::{Error, Result};
pub use exec::Parallelism;
pub use game::{fix_strategies, ClosedGame, Game, GameDef, Player, Strategy, StrategyProfile};
pub use outcome::{OutcomeResult, OutcomeSpec};
pub use process::{Process, Transition};
pub use space::Space;
pub use tree::GameTree;
pub use value::Value;
