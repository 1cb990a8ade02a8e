use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AlgebraError, ExtNat, Monomial, ProbAssignment, Q, TropAssignment, Tropical};

/// Finite map from monomials to extended naturals; absent monomials have coefficient 0.
#[derive(Clone, Debug)]
pub struct FormalPolynomial {
    dim: usize,
    coeffs: BTreeMap<Monomial, ExtNat>,
}

/// Result of probabilistic evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbValue {
    Finite(Q),
    Infinite,
}

impl FormalPolynomial {
    pub fn zero(dim: usize) -> Self {
        FormalPolynomial { dim, coeffs: BTreeMap::new() }
    }

    pub fn one(dim: usize) -> Self {
        Self::monomial(Monomial::one(dim))
    }

    pub fn monomial(m: Monomial) -> Self {
        let dim = m.dim();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(m, ExtNat::ONE);
        FormalPolynomial { dim, coeffs }
    }

    /// The all-one polynomial supported on `ms`.
    pub fn all_one<I: IntoIterator<Item = Monomial>>(dim: usize, ms: I) -> Self {
        let mut p = Self::zero(dim);
        for m in ms {
            debug_assert_eq!(m.dim(), dim);
            p.coeffs.insert(m, ExtNat::ONE);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, ExtNat)>>(
        dim: usize,
        terms: I,
    ) -> Result<Self, AlgebraError> {
        let mut p = Self::zero(dim);
        for (m, c) in terms {
            if m.dim() != dim {
                return Err(AlgebraError::DimensionMismatch(dim, m.dim()));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn add_term(&mut self, m: Monomial, c: ExtNat) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(m).or_insert(ExtNat::ZERO);
        *e = *e + c;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> ExtNat {
        self.coeffs.get(m).copied().unwrap_or(ExtNat::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ExtNat)> {
        self.coeffs.iter()
    }

    /// Support in lexicographic order of exponent vectors.
    pub fn support(&self) -> Vec<Monomial> {
        self.coeffs.keys().cloned().collect()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.coeffs.contains_key(m)
    }

    pub fn is_all_one(&self) -> bool {
        self.coeffs.values().all(|&c| c == ExtNat::ONE)
    }

    /// Maximum total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u64 {
        self.coeffs.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn check_dim(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.dim != other.dim {
            Err(AlgebraError::DimensionMismatch(self.dim, other.dim))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.coeffs {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (a, &ca) in &self.coeffs {
            for (b, &cb) in &other.coeffs {
                out.add_term(a.times(b), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn eval_prob(&self, p: &ProbAssignment) -> Result<ProbValue, AlgebraError> {
        if 2 * p.params() != self.dim {
            return Err(AlgebraError::DimensionMismatch(self.dim, 2 * p.params()));
        }
        let mut total = Q::zero();
        for (m, c) in &self.coeffs {
            let w = p.weight(m);
            match c {
                ExtNat::Fin(n) => total += w * Q::from_integer((*n).into()),
                ExtNat::Inf => {
                    if !w.is_zero() {
                        return Ok(ProbValue::Infinite);
                    }
                }
            }
        }
        Ok(ProbValue::Finite(total))
    }

    pub fn tropicalize(&self) -> Self {
        Self::all_one(self.dim, self.coeffs.keys().cloned())
    }

    /// Minimum of `μ·z` over the support, with every minimizing monomial.
    pub fn eval_trop(&self, z: &TropAssignment) -> Result<(Tropical, Vec<Monomial>), AlgebraError> {
        if z.dim() != self.dim {
            return Err(AlgebraError::DimensionMismatch(self.dim, z.dim()));
        }
        let mut best = Tropical::Inf;
        let mut arg = Vec::new();
        for m in self.coeffs.keys() {
            let v = z.dot(m);
            match v.cmp(&best) {
                std::cmp::Ordering::Less => {
                    best = v;
                    arg.clear();
                    arg.push(m.clone());
                }
                std::cmp::Ordering::Equal => arg.push(m.clone()),
                std::cmp::Ordering::Greater => {}
            }
        }
        if self.coeffs.is_empty() {
            arg.clear();
        }
        Ok((best, arg))
    }

    /// The ≼-minimal elements of the support.
    pub fn minimal_support(&self) -> Vec<Monomial> {
        minimal_elements(self.coeffs.keys())
    }
}

pub fn minimal_elements<'a, I: IntoIterator<Item = &'a Monomial>>(ms: I) -> Vec<Monomial> {
    let mut sorted: Vec<&Monomial> = ms.into_iter().collect();
    sorted.sort_by_key(|m| m.degree());
    let mut kept: Vec<Monomial> = Vec::new();
    for m in sorted {
        if !kept.iter().any(|k| k.leq(m)) {
            kept.push(m.clone());
        }
    }
    kept.sort();
    kept
}

pub fn poly_add(s: &FormalPolynomial, t: &FormalPolynomial) -> Result<FormalPolynomial, AlgebraError> {
    s.add(t)
}

pub fn poly_mul(s: &FormalPolynomial, t: &FormalPolynomial) -> Result<FormalPolynomial, AlgebraError> {
    s.mul(t)
}

impl PartialEq for FormalPolynomial {
    // zero polynomials are equal whatever their dimension
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && (self.dim == other.dim || self.coeffs.is_empty())
    }
}

impl Eq for FormalPolynomial {}

impl fmt::Display for FormalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut terms: Vec<_> = self.coeffs.iter().collect();
        terms.sort_by(|a, b| a.0.display_cmp(b.0));
        for (i, (m, c)) in terms.into_iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match c {
                ExtNat::Fin(1) => write!(f, "{m}")?,
                _ if m.is_one() => write!(f, "{c}")?,
                _ => write!(f, "{c}*{m}")?,
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exponents: Vec<u32>,
    coeff: ExtNat,
}

impl Serialize for FormalPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermRepr> = self
            .coeffs
            .iter()
            .map(|(m, c)| TermRepr { exponents: m.exponents().to_vec(), coeff: *c })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormalPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms = Vec::<TermRepr>::deserialize(d)?;
        let dim = terms.first().map_or(0, |t| t.exponents.len());
        FormalPolynomial::from_terms(dim, terms.into_iter().map(|t| (Monomial::new(t.exponents), t.coeff)))
            .map_err(serde::de::Error::custom)
    }
}
