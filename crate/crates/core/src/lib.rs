//! Static inference of most likely reductions for PCF with parametric
//! probabilistic choice, via tropical polynomials and Newton polytopes.

pub mod algebra;
pub mod cli;
pub mod geometry;
pub mod infer;
pub mod lang;
pub mod typesys;
