//! Dense two-phase simplex over exact rationals.

use num_traits::{One, Signed, Zero};

use super::GeometryError;
use crate::algebra::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub sense: Sense,
    pub rhs: Q,
}

/// Optimize `objective · x` subject to the constraints and `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<Q>,
    pub maximize: bool,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal { point: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem { num_vars, objective: vec![Q::zero(); num_vars], maximize: true, constraints: Vec::new() }
    }

    pub fn constrain(&mut self, coeffs: Vec<Q>, sense: Sense, rhs: Q) {
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }
}

const DANTZIG_PIVOTS: usize = 64;

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Q {
        &self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Q::one() / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost` over the columns allowed by `usable`; returns false when unbounded.
    /// Uses the largest reduced cost first and Bland's rule after `DANTZIG_PIVOTS` pivots.
    fn optimize(&mut self, cost: &[Q], usable: &dyn Fn(usize) -> bool) -> bool {
        let mut pivots = 0usize;
        loop {
            let bland = pivots >= DANTZIG_PIVOTS;
            pivots += 1;
            let mut entering: Option<(usize, Q)> = None;
            for j in 0..self.width {
                if !usable(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.rows[i][j].is_zero() {
                        reduced -= &cost[b] * &self.rows[i][j];
                    }
                }
                if reduced.is_positive() && entering.as_ref().is_none_or(|(_, best)| reduced > *best) {
                    entering = Some((j, reduced));
                    if bland {
                        break;
                    }
                }
            }
            let entering = entering.map(|(j, _)| j);
            let Some(c) = entering else { return true };
            let mut leaving: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leaving {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            match leaving {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn value_of(&self, col: usize) -> Q {
        self.basis
            .iter()
            .position(|&b| b == col)
            .map_or_else(Q::zero, |r| self.rhs(r).clone())
    }
}

pub fn lp_solve(p: &LpProblem) -> Result<LpResult, GeometryError> {
    let n = p.num_vars;
    if p.objective.len() != n {
        return Err(GeometryError::DimensionMismatch(n, p.objective.len()));
    }
    for c in &p.constraints {
        if c.coeffs.len() != n {
            return Err(GeometryError::DimensionMismatch(n, c.coeffs.len()));
        }
    }
    // Normalize to nonnegative right-hand sides.
    let rows: Vec<(Vec<Q>, Sense, Q)> = p
        .constraints
        .iter()
        .map(|c| {
            if c.rhs.is_negative() {
                let sense = match c.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect(), sense, -c.rhs.clone())
            } else {
                (c.coeffs.clone(), c.sense, c.rhs.clone())
            }
        })
        .collect();

    let slacks = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let width = n + slacks + artificials;
    let first_art = n + slacks;

    let mut tab = Tableau { rows: Vec::with_capacity(rows.len()), basis: Vec::new(), width };
    let (mut s, mut a) = (n, first_art);
    for (coeffs, sense, rhs) in rows {
        let mut row = vec![Q::zero(); width + 1];
        row[..n].clone_from_slice(&coeffs);
        row[width] = rhs;
        match sense {
            Sense::Le => {
                row[s] = Q::one();
                tab.basis.push(s);
                s += 1;
            }
            Sense::Ge => {
                row[s] = -Q::one();
                s += 1;
                row[a] = Q::one();
                tab.basis.push(a);
                a += 1;
            }
            Sense::Eq => {
                row[a] = Q::one();
                tab.basis.push(a);
                a += 1;
            }
        }
        tab.rows.push(row);
    }

    if artificials > 0 {
        let mut cost = vec![Q::zero(); width];
        for c in cost.iter_mut().skip(first_art) {
            *c = -Q::one();
        }
        tab.optimize(&cost, &|_| true);
        let infeasibility: Q = (first_art..width).map(|j| tab.value_of(j)).sum();
        if infeasibility.is_positive() {
            return Ok(LpResult::Infeasible);
        }
        // Drive zero-valued artificials out of the basis, dropping redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= first_art {
                match (0..first_art).find(|&j| !tab.rows[r][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    let mut cost = vec![Q::zero(); width];
    for (j, c) in p.objective.iter().enumerate() {
        cost[j] = if p.maximize { c.clone() } else { -c.clone() };
    }
    if !tab.optimize(&cost, &|j| j < first_art) {
        return Ok(LpResult::Unbounded);
    }
    let point: Vec<Q> = (0..n).map(|j| tab.value_of(j)).collect();
    let value = point.iter().zip(&p.objective).map(|(x, c)| x * c).sum();
    Ok(LpResult::Optimal { point, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn simple_max() {
        let mut p = LpProblem::new(1);
        p.objective = vec![q(1)];
        p.constrain(vec![q(1)], Sense::Le, q(1));
        assert_eq!(lp_solve(&p).unwrap(), LpResult::Optimal { point: vec![q(1)], value: q(1) });
    }

    #[test]
    fn infeasible() {
        let mut p = LpProblem::new(1);
        p.constrain(vec![q(1)], Sense::Le, q(-1));
        assert_eq!(lp_solve(&p).unwrap(), LpResult::Infeasible);
    }

    #[test]
    fn two_vars() {
        let mut p = LpProblem::new(2);
        p.objective = vec![q(1), q(1)];
        p.constrain(vec![q(1), q(1)], Sense::Le, q(3));
        p.constrain(vec![q(1), q(0)], Sense::Le, q(2));
        match lp_solve(&p).unwrap() {
            LpResult::Optimal { value, .. } => assert_eq!(value, q(3)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn unbounded_and_minimize() {
        let mut p = LpProblem::new(2);
        p.objective = vec![q(1), q(0)];
        p.constrain(vec![q(1), q(-1)], Sense::Le, q(1));
        assert_eq!(lp_solve(&p).unwrap(), LpResult::Unbounded);
        p.maximize = false;
        p.constrain(vec![q(1), q(1)], Sense::Ge, q(2));
        match lp_solve(&p).unwrap() {
            LpResult::Optimal { value, .. } => assert_eq!(value, q(0)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn equalities_with_redundancy() {
        let mut p = LpProblem::new(2);
        p.objective = vec![q(2), q(1)];
        p.constrain(vec![q(1), q(1)], Sense::Eq, q(1));
        p.constrain(vec![q(2), q(2)], Sense::Eq, q(2));
        match lp_solve(&p).unwrap() {
            LpResult::Optimal { point, value } => {
                assert_eq!(value, q(2));
                assert_eq!(point, vec![q(1), q(0)]);
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn dimension_checked() {
        let mut p = LpProblem::new(2);
        p.constrain(vec![q(1)], Sense::Le, q(1));
        assert!(lp_solve(&p).is_err());
    }
}
