use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::lp::{lp_solve, LpProblem, LpResult, Sense};
use super::GeometryError;
use crate::algebra::{parse_rational, rational_string, FormalPolynomial, Monomial, Tropical, Q};

/// Homogeneous system `row · x ≤ 0` for every row, together with `x ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfspaceSystem {
    pub dim: usize,
    pub rows: Vec<Vec<Q>>,
}

/// Normal cone of a monomial in an all-one polynomial, with an optional witness point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalCone {
    #[serde(flatten)]
    pub system: HalfspaceSystem,
    #[serde(with = "opt_rational_vec")]
    pub witness: Option<Vec<Q>>,
    /// The witness satisfies every row and every coordinate bound strictly.
    pub strict: bool,
}

fn dot(row: &[Q], x: &[Q]) -> Q {
    row.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl HalfspaceSystem {
    pub fn contains(&self, x: &[Q]) -> bool {
        x.iter().all(|v| !v.is_negative()) && self.rows.iter().all(|r| !dot(r, x).is_positive())
    }

    /// Membership for points of `[0,+∞]^d`, with `0·∞ = 0`.
    pub fn contains_trop(&self, z: &[Tropical]) -> bool {
        self.rows.iter().all(|r| {
            let (mut pos, mut neg) = (Q::zero(), Q::zero());
            let (mut pos_inf, mut neg_inf) = (false, false);
            for (c, zv) in r.iter().zip(z) {
                if c.is_zero() {
                    continue;
                }
                match zv {
                    Tropical::Fin(q) if c.is_positive() => pos += c * q,
                    Tropical::Fin(q) => neg -= c * q,
                    Tropical::Inf if c.is_positive() => pos_inf = true,
                    Tropical::Inf => neg_inf = true,
                }
            }
            neg_inf || (!pos_inf && pos <= neg)
        })
    }

    /// Floating-point membership with absolute slack; `+∞` coordinates allowed.
    pub fn contains_f64(&self, z: &[f64], slack: f64) -> bool {
        self.rows.iter().all(|r| {
            let (mut pos, mut neg) = (0.0f64, 0.0f64);
            for (c, &zv) in r.iter().zip(z) {
                if c.is_zero() {
                    continue;
                }
                let cf = crate::algebra::rational_to_f64(c);
                if cf > 0.0 {
                    pos += cf * zv;
                } else {
                    neg -= cf * zv;
                }
            }
            if neg == f64::INFINITY {
                return true;
            }
            pos <= neg + slack
        })
    }

    /// Rows scaled to coprime integers, deduplicated, with rows implied by the others removed.
    pub fn irredundant_rows(&self) -> Vec<Vec<Q>> {
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for r in &self.rows {
            let n = normalize_row(r);
            if n.iter().any(|v| !v.is_zero()) && !rows.contains(&n) {
                rows.push(n);
            }
        }
        let mut i = 0;
        while i < rows.len() {
            let others: Vec<&Vec<Q>> = rows.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r).collect();
            if implied(&rows[i], &others, self.dim) {
                rows.remove(i);
            } else {
                i += 1;
            }
        }
        rows
    }

    /// Renders each irredundant row as `lhs <= rhs` over `z1, z~1, ...`.
    pub fn inequalities(&self) -> Vec<String> {
        self.irredundant_rows().iter().map(|r| format_row(r)).collect()
    }
}

fn implied(row: &[Q], others: &[&Vec<Q>], dim: usize) -> bool {
    let mut lp = LpProblem::new(dim);
    lp.objective = row.to_vec();
    for o in others {
        lp.constrain((*o).clone(), Sense::Le, Q::zero());
    }
    lp.constrain(vec![Q::one(); dim], Sense::Le, Q::one());
    match lp_solve(&lp) {
        Ok(LpResult::Optimal { value, .. }) => !value.is_positive(),
        _ => false,
    }
}

fn normalize_row(r: &[Q]) -> Vec<Q> {
    let lcm = r.iter().fold(num_bigint::BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<num_bigint::BigInt> = r.iter().map(|q| (q * Q::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(num_bigint::BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return r.to_vec();
    }
    ints.into_iter().map(|v| Q::from_integer(v / &g)).collect()
}

fn coordinate_name(slot: usize) -> String {
    let i = slot / 2 + 1;
    if slot % 2 == 0 {
        format!("z{i}")
    } else {
        format!("z~{i}")
    }
}

pub fn format_row(r: &[Q]) -> String {
    let n = normalize_row(r);
    let side = |positive: bool| {
        let terms: Vec<String> = n
            .iter()
            .enumerate()
            .filter(|(_, c)| if positive { c.is_positive() } else { c.is_negative() })
            .map(|(slot, c)| {
                let a = c.abs();
                if a.is_one() {
                    coordinate_name(slot)
                } else {
                    format!("{}*{}", rational_string(&a), coordinate_name(slot))
                }
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    };
    format!("{} <= {}", side(true), side(false))
}

/// `𝒩(μ; s) = {x ≥ 0 | (μ − ν)·x ≤ 0 for all ν in supp(s)}`.
pub fn normal_cone(mu: &Monomial, s: &FormalPolynomial) -> Result<NormalCone, GeometryError> {
    if !s.contains(mu) {
        return Err(GeometryError::NotInSupport(mu.to_string()));
    }
    let dim = s.dim();
    let rows: Vec<Vec<Q>> = s
        .support()
        .iter()
        .filter(|nu| *nu != mu)
        .map(|nu| {
            mu.exponents()
                .iter()
                .zip(nu.exponents())
                .map(|(&a, &b)| Q::from_integer((a as i64 - b as i64).into()))
                .collect()
        })
        .collect();
    let system = HalfspaceSystem { dim, rows };
    let (witness, strict) = find_witness(&system)?;
    Ok(NormalCone { system, witness, strict })
}

fn find_witness(sys: &HalfspaceSystem) -> Result<(Option<Vec<Q>>, bool), GeometryError> {
    let d = sys.dim;
    // maximize the minimum slack t over rows and coordinates, inside the simplex Σx ≤ 1
    let mut lp = LpProblem::new(d + 1);
    lp.objective[d] = Q::one();
    for r in &sys.rows {
        let mut row = r.clone();
        row.push(Q::one());
        lp.constrain(row, Sense::Le, Q::zero());
    }
    for i in 0..d {
        let mut row = vec![Q::zero(); d + 1];
        row[i] = -Q::one();
        row[d] = Q::one();
        lp.constrain(row, Sense::Le, Q::zero());
    }
    let mut total = vec![Q::one(); d];
    total.push(Q::zero());
    lp.constrain(total, Sense::Le, Q::one());
    if let LpResult::Optimal { point, value } = lp_solve(&lp)? {
        if value.is_positive() {
            return Ok((Some(point[..d].to_vec()), true));
        }
    }
    let mut lp = LpProblem::new(d);
    lp.objective = vec![Q::one(); d];
    for r in &sys.rows {
        lp.constrain(r.clone(), Sense::Le, Q::zero());
    }
    lp.constrain(vec![Q::one(); d], Sense::Le, Q::one());
    match lp_solve(&lp)? {
        LpResult::Optimal { point, value } if value.is_positive() => Ok((Some(point), false)),
        _ => Ok((None, false)),
    }
}

#[derive(Serialize, Deserialize)]
struct RowRepr {
    normal: Vec<String>,
    rhs: String,
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    dim: usize,
    rows: Vec<RowRepr>,
}

impl Serialize for HalfspaceSystem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SystemRepr {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|r| RowRepr { normal: r.iter().map(rational_string).collect(), rhs: "0".into() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HalfspaceSystem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = SystemRepr::deserialize(d)?;
        let mut rows = Vec::new();
        for r in repr.rows {
            if r.rhs != "0" {
                return Err(serde::de::Error::custom("normal cone rows must be homogeneous"));
            }
            let row = r
                .normal
                .iter()
                .map(|v| parse_rational(v))
                .collect::<Result<Vec<_>, _>>()
                .map_err(serde::de::Error::custom)?;
            rows.push(row);
        }
        Ok(HalfspaceSystem { dim: repr.dim, rows })
    }
}

pub(crate) mod opt_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Vec<Q>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|xs| xs.iter().map(rational_string).collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Q>>, D::Error> {
        let v = Option::<Vec<String>>::deserialize(d)?;
        v.map(|xs| xs.iter().map(|x| parse_rational(x)).collect::<Result<Vec<_>, _>>())
            .transpose()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[u32]) -> Monomial {
        Monomial::new(v.to_vec())
    }

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn m1_cone() {
        let s = FormalPolynomial::all_one(2, [m(&[2, 0]), m(&[2, 1]), m(&[0, 3])]);
        let c = normal_cone(&m(&[0, 3]), &s).unwrap();
        assert_eq!(c.system.rows.len(), 2);
        assert_eq!(c.system.inequalities(), vec!["3*z~1 <= 2*z1".to_string()]);
        assert!(c.strict);
        let w = c.witness.clone().unwrap();
        assert!(c.system.contains(&w));
        let z = [4f64.ln(), (4f64 / 3.0).ln()];
        assert!(c.system.contains_f64(&z, 1e-12));
        let half = [2f64.ln(), 2f64.ln()];
        assert!(!c.system.contains_f64(&half, 1e-12));
        assert!(c.system.contains(&[q(3, 1), q(2, 1)]));
        assert!(!c.system.contains(&[q(1, 1), q(1, 1)]));
    }

    #[test]
    fn singleton_is_orthant() {
        let s = FormalPolynomial::all_one(2, [m(&[1, 0])]);
        let c = normal_cone(&m(&[1, 0]), &s).unwrap();
        assert!(c.system.rows.is_empty());
        assert!(c.strict);
        assert!(normal_cone(&m(&[0, 1]), &s).is_err());
    }

    #[test]
    fn infinite_coordinates() {
        let s = FormalPolynomial::all_one(2, [m(&[1, 0]), m(&[0, 1])]);
        let c = normal_cone(&m(&[1, 0]), &s).unwrap();
        assert!(c.system.contains_trop(&[Tropical::Fin(Q::zero()), Tropical::Inf]));
        assert!(!c.system.contains_trop(&[Tropical::Inf, Tropical::Fin(Q::zero())]));
        assert!(c.system.contains_f64(&[0.0, f64::INFINITY], 1e-12));
    }

    #[test]
    fn degenerate_cone_has_boundary_witness() {
        // X*~X lies on the segment between X^2 and ~X^2, so its cone is a ray
        let s = FormalPolynomial::all_one(2, [m(&[2, 0]), m(&[1, 1]), m(&[0, 2])]);
        let c = normal_cone(&m(&[1, 1]), &s).unwrap();
        assert!(!c.strict);
        let w = c.witness.unwrap();
        assert_eq!(w[0], w[1]);
    }

    #[test]
    fn json_round_trip() {
        let s = FormalPolynomial::all_one(2, [m(&[2, 0]), m(&[0, 3])]);
        let c = normal_cone(&m(&[0, 3]), &s).unwrap();
        let j = serde_json::to_string(&c).unwrap();
        assert!(j.contains("\"rhs\":\"0\""));
        let back: NormalCone = serde_json::from_str(&j).unwrap();
        assert_eq!(back, c);
    }
}
