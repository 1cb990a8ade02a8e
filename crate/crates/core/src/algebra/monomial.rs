use std::fmt;

use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Exponent vector over the ordered variables `X1, ~X1, ..., Xk, ~Xk`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; dim])
    }

    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    /// The variable `X_i` (or `~X_i` when `right` holds) for a 1-based parameter index.
    pub fn param(params: u32, i: u32, right: bool) -> Self {
        let mut e = vec![0; 2 * params as usize];
        e[param_slot(i, right)] = 1;
        Monomial(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum; panics on dimension mismatch (see [`mono_mul`] for the checked form).
    pub fn times(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.dim(), other.dim(), "monomial dimension mismatch");
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn bump(&mut self, slot: usize) {
        self.0[slot] += 1;
    }

    /// Pointwise order: `self ≼ other`.
    pub fn leq(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Strict pointwise order: `self ≺ other`.
    pub fn below(&self, other: &Monomial) -> bool {
        self != other && self.leq(other)
    }

    /// Comparison key for canonical printing: total degree, then reverse lexicographic.
    pub fn display_cmp(&self, other: &Monomial) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

/// Slot of `X_i` / `~X_i` in an exponent vector.
pub fn param_slot(i: u32, right: bool) -> usize {
    2 * (i as usize - 1) + right as usize
}

pub fn var_name(slot: usize) -> String {
    let i = slot / 2 + 1;
    if slot % 2 == 0 {
        format!("X{i}")
    } else {
        format!("~X{i}")
    }
}

pub fn mono_mul(a: &Monomial, b: &Monomial) -> Result<Monomial, AlgebraError> {
    if a.dim() != b.dim() {
        return Err(AlgebraError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.times(b))
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (slot, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            f.write_str(&var_name(slot))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}
