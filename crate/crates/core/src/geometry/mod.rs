//! Exact convex geometry over lattice points.

mod cone;
mod hull;
pub mod lp;

use thiserror::Error;

pub use cone::{format_row, normal_cone, HalfspaceSystem, NormalCone};
pub use hull::{hull_vertices, is_vertex, min_dot, minimal_vertices, minkowski_vertices, np_min, vn, LatticePolytope};
pub use lp::{lp_solve, Constraint, LpProblem, LpResult, Sense};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("empty point set")]
    EmptyInput,
    #[error("monomial {0} is not in the support")]
    NotInSupport(String),
}
