//! Surface language: syntax, parser, simple types and the reduction engine.

mod parse;
mod reduce;
mod syntax;
mod types;

pub use parse::{parse, parse_term, ParseError};
pub use reduce::{
    enumerate_trajectories, find_word, reduce_once, replay, subst, ChoiceWord, ReduceError, Step, Trajectory,
};
pub use syntax::{Program, Term};
pub use types::{check_ground, free_vars, type_check, SimpleType, TypeError, Typing};
