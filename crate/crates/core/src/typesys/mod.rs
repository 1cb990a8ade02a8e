//! Tropical intersection types: bounded proof search producing minimal
//! polynomials together with traceback words.

mod deriv;
mod itype;
mod search;
mod traj;

use thiserror::Error;

use crate::lang::TypeError;

pub use deriv::{apply_rule, merge, vn_traced, Bounds, Combiner, Entry, Rule, Source, Traces, TropDerivation};
pub use itype::{combinations_with_repetition, Ctx, IType, MSet, Pat, Refiner, TooManyRefinements};
pub use search::{schedule, search, stabilize, trace_is_valid, SearchConfig, SearchResult, Stabilization};
pub use traj::{derivation_json, traj_poly, traj_root};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("search budget exhausted at n={}, p={}", .0.n, .0.p)]
    Exhausted(Bounds),
    #[error("rule {rule:?} does not fit its premises: {msg}")]
    Schema { rule: Rule, msg: String },
    #[error(transparent)]
    Type(TypeError),
}
