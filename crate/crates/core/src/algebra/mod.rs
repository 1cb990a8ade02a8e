//! Monomials, formal polynomials over extended naturals, and their
//! probabilistic and tropical evaluations.

mod extnat;
mod monomial;
mod poly;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use extnat::ExtNat;
pub use monomial::{mono_mul, param_slot, var_name, Monomial};
pub use poly::{minimal_elements, poly_add, poly_mul, FormalPolynomial, ProbValue};

pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("probability {0} outside [0,1]")]
    BadProbability(String),
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
}

/// An element of `[0, +∞]` with exact rational finite part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tropical {
    Fin(Q),
    Inf,
}

impl Ord for Tropical {
    fn cmp(&self, o: &Self) -> Ordering {
        match (self, o) {
            (Tropical::Fin(a), Tropical::Fin(b)) => a.cmp(b),
            (Tropical::Fin(_), Tropical::Inf) => Ordering::Less,
            (Tropical::Inf, Tropical::Fin(_)) => Ordering::Greater,
            (Tropical::Inf, Tropical::Inf) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Tropical {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Tropical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tropical::Fin(q) => write!(f, "{q}"),
            Tropical::Inf => f.write_str("inf"),
        }
    }
}

/// A point `z` of `[0,+∞]^{2k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropAssignment {
    z: Vec<Tropical>,
}

impl TropAssignment {
    pub fn new(z: Vec<Tropical>) -> Self {
        TropAssignment { z }
    }

    pub fn finite(z: Vec<Q>) -> Self {
        TropAssignment { z: z.into_iter().map(Tropical::Fin).collect() }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn coords(&self) -> &[Tropical] {
        &self.z
    }

    /// `μ·z` with `0·∞ = 0`.
    pub fn dot(&self, m: &Monomial) -> Tropical {
        let mut acc = Q::zero();
        for (&e, z) in m.exponents().iter().zip(&self.z) {
            if e == 0 {
                continue;
            }
            match z {
                Tropical::Fin(q) => acc += q * Q::from_integer(BigInt::from(e)),
                Tropical::Inf => return Tropical::Inf,
            }
        }
        Tropical::Fin(acc)
    }
}

/// Probabilities `p_i ∈ [0,1]` for the parameters; `~X_i` is weighted by `1 - p_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbAssignment {
    p: Vec<Q>,
}

impl ProbAssignment {
    pub fn new(p: Vec<Q>) -> Result<Self, AlgebraError> {
        for q in &p {
            if q.is_negative() || *q > Q::one() {
                return Err(AlgebraError::BadProbability(q.to_string()));
            }
        }
        Ok(ProbAssignment { p })
    }

    /// Parses a comma separated list of decimals (`0.25`) or fractions (`1/4`).
    pub fn parse(text: &str) -> Result<Self, AlgebraError> {
        let p = text
            .split(',')
            .map(|s| parse_rational(s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(p)
    }

    pub fn params(&self) -> usize {
        self.p.len()
    }

    pub fn probs(&self) -> &[Q] {
        &self.p
    }

    /// The induced `2k` vector `(p_1, 1-p_1, ..., p_k, 1-p_k)`.
    pub fn weights(&self) -> Vec<Q> {
        self.p.iter().flat_map(|q| [q.clone(), Q::one() - q]).collect()
    }

    /// `p^μ` computed exactly.
    pub fn weight(&self, m: &Monomial) -> Q {
        let w = self.weights();
        let mut acc = Q::one();
        for (&e, q) in m.exponents().iter().zip(&w) {
            if e > 0 {
                acc *= num_traits::pow(q.clone(), e as usize);
            }
        }
        acc
    }

    /// `z = (-ln p_i, -ln(1-p_i))` in floating point.
    pub fn to_z(&self) -> Vec<f64> {
        self.weights().iter().map(|q| -ln_rational(q)).collect()
    }
}

/// Parses `3`, `-1/2`, `0.125` exactly.
pub fn parse_rational(s: &str) -> Result<Q, AlgebraError> {
    let bad = || AlgebraError::BadRational(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let d = num_traits::pow(BigInt::from(10), frac.len());
    let q = Q::new(n, d);
    Ok(if neg { -q } else { q })
}

/// Renders a rational as `p/q` (or `p` when integral).
pub fn rational_string(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Natural log of a nonnegative rational; `-inf` at zero.
pub fn ln_rational(q: &Q) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        let f: f64 = n.to_string().parse().unwrap_or(f64::INFINITY);
        return f.ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    let f: f64 = top.to_string().parse().unwrap_or(f64::INFINITY);
    f.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn rational_to_f64(q: &Q) -> f64 {
    let n: f64 = q.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = q.denom().to_string().parse().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        n / d
    } else {
        (ln_bigint(&q.numer().abs()) - ln_bigint(q.denom())).exp() * if q.is_negative() { -1.0 } else { 1.0 }
    }
}
