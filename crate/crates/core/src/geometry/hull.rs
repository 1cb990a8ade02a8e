use std::collections::BTreeSet;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::lp::{lp_solve, LpProblem, LpResult, Sense};
use super::GeometryError;
use crate::algebra::{FormalPolynomial, Monomial, Q};

/// Vertex set of the convex hull of finitely many lattice points, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePolytope {
    pub dim: usize,
    pub vertices: Vec<Monomial>,
}

impl LatticePolytope {
    pub fn point(m: Monomial) -> Self {
        LatticePolytope { dim: m.dim(), vertices: vec![m] }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

fn unique_argmin(points: &[&Monomial], p: &Monomial, key: impl Fn(&Monomial) -> i64) -> bool {
    let kp = key(p);
    points.iter().all(|q| *q == p || key(q) > kp)
}

/// Whether `p` is not a convex combination of the other points.
pub fn is_vertex(p: &Monomial, points: &[&Monomial]) -> bool {
    let others: Vec<&Monomial> = points.iter().copied().filter(|q| *q != p).collect();
    if others.is_empty() {
        return true;
    }
    let all: Vec<&Monomial> = points.to_vec();
    let dim = p.dim();
    for d in 0..dim {
        if unique_argmin(&all, p, |m| m.exponents()[d] as i64)
            || unique_argmin(&all, p, |m| -(m.exponents()[d] as i64))
        {
            return true;
        }
    }
    if unique_argmin(&all, p, |m| m.degree() as i64) || unique_argmin(&all, p, |m| -(m.degree() as i64)) {
        return true;
    }
    // p is a vertex iff {λ ≥ 0 : Σλ = 1, Σλ q = p} is empty.
    let mut lp = LpProblem::new(others.len());
    lp.constrain(vec![Q::one(); others.len()], Sense::Eq, Q::one());
    for d in 0..dim {
        let row: Vec<Q> = others.iter().map(|q| Q::from_integer(q.exponents()[d].into())).collect();
        lp.constrain(row, Sense::Eq, Q::from_integer(p.exponents()[d].into()));
    }
    matches!(lp_solve(&lp), Ok(LpResult::Infeasible))
}

fn common_dim<'a>(points: impl IntoIterator<Item = &'a Monomial>) -> Result<Option<usize>, GeometryError> {
    let mut dim = None;
    for p in points {
        match dim {
            None => dim = Some(p.dim()),
            Some(d) if d != p.dim() => return Err(GeometryError::DimensionMismatch(d, p.dim())),
            _ => {}
        }
    }
    Ok(dim)
}

const MAX_DIRECTIONS: usize = 4096;

/// Directions in `{-2,...,2}^dim`, at most `MAX_DIRECTIONS` of them.
fn probe_directions(dim: usize) -> Vec<Vec<i64>> {
    let total = 5usize.checked_pow(dim as u32).unwrap_or(usize::MAX);
    let stride = (total / MAX_DIRECTIONS).max(1);
    (0..total.min(MAX_DIRECTIONS))
        .map(|k| {
            let mut code = k.saturating_mul(stride);
            (0..dim)
                .map(|_| {
                    let digit = (code % 5) as i64 - 2;
                    code /= 5;
                    digit
                })
                .collect()
        })
        .collect()
}

/// Whether `p` is a convex combination of `qs`.
fn in_hull_of(p: &Monomial, qs: &[&Monomial]) -> bool {
    if qs.is_empty() {
        return false;
    }
    let mut lp = LpProblem::new(qs.len());
    lp.constrain(vec![Q::one(); qs.len()], Sense::Eq, Q::one());
    for d in 0..p.dim() {
        let row: Vec<Q> = qs.iter().map(|q| Q::from_integer(q.exponents()[d].into())).collect();
        lp.constrain(row, Sense::Eq, Q::from_integer(p.exponents()[d].into()));
    }
    matches!(lp_solve(&lp), Ok(LpResult::Optimal { .. }))
}

/// Vertex classifier over a fixed point set, certifying most vertices by
/// unique minimizers along probe directions before falling back to LPs.
struct VertexProbe<'a> {
    pts: Vec<&'a Monomial>,
    certified: Vec<bool>,
    known: Vec<&'a Monomial>,
}

impl<'a> VertexProbe<'a> {
    fn new(points: &'a [Monomial], dim: usize) -> Self {
        let set: BTreeSet<&Monomial> = points.iter().collect();
        let pts: Vec<&Monomial> = set.into_iter().collect();
        let mut certified = vec![false; pts.len()];
        for dir in probe_directions(dim) {
            let key = |m: &Monomial| m.exponents().iter().zip(&dir).map(|(&e, &c)| e as i64 * c).sum::<i64>();
            let keys: Vec<i64> = pts.iter().map(|p| key(p)).collect();
            let Some(&best) = keys.iter().min() else { break };
            let mut hits = keys.iter().enumerate().filter(|(_, k)| **k == best);
            if let (Some((i, _)), None) = (hits.next(), hits.next()) {
                certified[i] = true;
            }
        }
        let known = pts.iter().zip(&certified).filter(|(_, c)| **c).map(|(p, _)| *p).collect();
        VertexProbe { pts, certified, known }
    }

    fn is_vertex(&self, i: usize) -> bool {
        self.certified[i] || (!in_hull_of(self.pts[i], &self.known) && is_vertex(self.pts[i], &self.pts))
    }
}

pub fn hull_vertices(points: &[Monomial]) -> Result<LatticePolytope, GeometryError> {
    let dim = common_dim(points)?.ok_or(GeometryError::EmptyInput)?;
    let probe = VertexProbe::new(points, dim);
    let vertices = (0..probe.pts.len()).filter(|&i| probe.is_vertex(i)).map(|i| probe.pts[i].clone()).collect();
    Ok(LatticePolytope { dim, vertices })
}

/// Vertices of the hull that are ≼-minimal among the vertices.
pub fn minimal_vertices(points: &[Monomial]) -> Vec<Monomial> {
    let Some(first) = points.first() else { return Vec::new() };
    let probe = VertexProbe::new(points, first.dim());
    let mut order: Vec<usize> = (0..probe.pts.len()).collect();
    order.sort_by_key(|&i| probe.pts[i].degree());
    let mut kept: Vec<&Monomial> = Vec::new();
    for i in order {
        let p = probe.pts[i];
        // a vertex strictly below p has smaller degree and was examined already
        if kept.iter().any(|k| k.below(p)) {
            continue;
        }
        if probe.is_vertex(i) {
            kept.push(p);
        }
    }
    let mut out: Vec<Monomial> = kept.into_iter().cloned().collect();
    out.sort();
    out
}

/// `NP_min(s)` and the all-one polynomial `s_min` on its vertices.
pub fn np_min(s: &FormalPolynomial) -> (LatticePolytope, FormalPolynomial) {
    let vertices = minimal_vertices(&s.support());
    let poly = FormalPolynomial::all_one(s.dim(), vertices.iter().cloned());
    (LatticePolytope { dim: s.dim(), vertices }, poly)
}

pub fn minkowski_vertices(a: &LatticePolytope, b: &LatticePolytope) -> Result<LatticePolytope, GeometryError> {
    if a.dim != b.dim {
        return Err(GeometryError::DimensionMismatch(a.dim, b.dim));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(LatticePolytope { dim: a.dim, vertices: Vec::new() });
    }
    let sums: Vec<Monomial> = a.vertices.iter().flat_map(|x| b.vertices.iter().map(move |y| x.times(y))).collect();
    hull_vertices(&sums)
}

/// Minimal polynomial of the product of minimal all-one polynomials.
pub fn vn(dim: usize, polys: &[FormalPolynomial]) -> Result<FormalPolynomial, GeometryError> {
    let mut acc = LatticePolytope::point(Monomial::one(dim));
    for s in polys {
        if s.dim() != dim {
            return Err(GeometryError::DimensionMismatch(dim, s.dim()));
        }
        let next = LatticePolytope { dim, vertices: s.support() };
        acc = minkowski_vertices(&acc, &next)?;
    }
    Ok(FormalPolynomial::all_one(dim, minimal_vertices(&acc.vertices)))
}

/// Minimum of `μ·z` over a point set for rational `z`.
pub fn min_dot(points: &[Monomial], z: &[Q]) -> Option<Q> {
    points
        .iter()
        .map(|m| m.exponents().iter().zip(z).map(|(&e, q)| q * Q::from_integer(e.into())).sum::<Q>())
        .min()
}
