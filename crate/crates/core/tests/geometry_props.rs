//! Hull, minimal hull, VN and normal cone properties checked against
//! brute-force evaluation of linear forms.

mod common;

use common::{q, rand_point, rng};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::Rng;
use tropinf::algebra::{FormalPolynomial, Monomial, TropAssignment, Q};
use tropinf::geometry::{hull_vertices, is_vertex, min_dot, minimal_vertices, normal_cone, np_min, vn};

fn points(dim: usize) -> impl Strategy<Value = Vec<Monomial>> {
    prop::collection::vec(prop::collection::vec(0u32..5, dim).prop_map(Monomial::new), 1..8)
}

fn brute_min(points: &[Monomial], z: &[Q]) -> Q {
    points
        .iter()
        .map(|m| m.exponents().iter().zip(z).map(|(&e, x)| x * Q::from_integer(e.into())).sum::<Q>())
        .min()
        .unwrap()
}

fn signed_direction(r: &mut impl Rng, dim: usize) -> Vec<Q> {
    (0..dim).map(|_| q(r.gen_range(-9..=9), r.gen_range(1..=5))).collect()
}

fn naive_product(dim: usize, polys: &[FormalPolynomial]) -> FormalPolynomial {
    polys.iter().fold(FormalPolynomial::one(dim), |acc, p| acc.mul(p).unwrap()).tropicalize()
}

proptest! {
    #[test]
    fn hull_preserves_every_linear_minimum(pts in points(3)) {
        let hull = hull_vertices(&pts).unwrap();
        for v in &hull.vertices {
            prop_assert!(pts.contains(v));
        }
        let mut r = rng(21);
        for _ in 0..20 {
            let z = signed_direction(&mut r, 3);
            prop_assert_eq!(min_dot(&hull.vertices, &z).unwrap(), brute_min(&pts, &z));
        }
    }

    #[test]
    fn hull_vertices_are_exactly_the_vertices(pts in points(3)) {
        let hull = hull_vertices(&pts).unwrap();
        let refs: Vec<&Monomial> = pts.iter().collect();
        for p in &pts {
            prop_assert_eq!(hull.vertices.contains(p), is_vertex(p, &refs));
        }
    }

    #[test]
    fn minimal_hull_preserves_nonnegative_minima(pts in points(4)) {
        let min = minimal_vertices(&pts);
        let hull = hull_vertices(&pts).unwrap();
        for m in &min {
            prop_assert!(hull.vertices.contains(m));
            prop_assert!(!hull.vertices.iter().any(|v| v != m && v.leq(m)));
        }
        let mut r = rng(22);
        for _ in 0..20 {
            let z = rand_point(&mut r, 4);
            prop_assert_eq!(min_dot(&min, &z).unwrap(), brute_min(&pts, &z));
        }
    }

    #[test]
    fn normal_cones_cover_the_orthant(pts in points(4)) {
        let (_, s) = np_min(&FormalPolynomial::all_one(4, pts));
        let cones: Vec<_> = s.support().iter().map(|m| (m.clone(), normal_cone(m, &s).unwrap())).collect();
        let mut r = rng(24);
        for _ in 0..30 {
            let z = rand_point(&mut r, 4);
            let best = min_dot(&s.support(), &z).unwrap();
            let hits: Vec<&Monomial> = cones.iter().filter(|(_, c)| c.system.contains(&z)).map(|(m, _)| m).collect();
            prop_assert!(!hits.is_empty());
            for m in hits {
                prop_assert_eq!(min_dot(std::slice::from_ref(m), &z).unwrap(), best.clone());
            }
        }
    }

    #[test]
    fn cone_witnesses_select_their_monomial(pts in points(3)) {
        let (_, s) = np_min(&FormalPolynomial::all_one(3, pts));
        for m in s.support() {
            let cone = normal_cone(&m, &s).unwrap();
            let Some(w) = cone.witness.clone() else {
                prop_assert!(!cone.strict);
                continue;
            };
            prop_assert!(w.iter().all(|x| !x.is_negative()));
            prop_assert!(cone.system.contains(&w));
            let (_, arg) = s.eval_trop(&TropAssignment::finite(w)).unwrap();
            prop_assert!(arg.contains(&m));
            if cone.strict {
                prop_assert_eq!(arg, vec![m.clone()]);
            }
        }
    }

    #[test]
    fn irredundant_rows_describe_the_same_cone(pts in points(3)) {
        let (_, s) = np_min(&FormalPolynomial::all_one(3, pts));
        let mut r = rng(25);
        for m in s.support() {
            let sys = normal_cone(&m, &s).unwrap().system;
            let reduced = tropinf::geometry::HalfspaceSystem { dim: sys.dim, rows: sys.irredundant_rows() };
            prop_assert!(reduced.rows.len() <= sys.rows.len());
            for _ in 0..30 {
                let z = rand_point(&mut r, 3);
                prop_assert_eq!(sys.contains(&z), reduced.contains(&z));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vn_agrees_with_the_naive_product(a in points(4), b in points(4), c in points(4)) {
        let polys: Vec<FormalPolynomial> =
            [a, b, c].into_iter().map(|ms| np_min(&FormalPolynomial::all_one(4, ms)).1).collect();
        let fast = vn(4, &polys).unwrap();
        let (_, slow) = np_min(&naive_product(4, &polys));
        prop_assert_eq!(&fast, &slow);
        let mut r = rng(23);
        for _ in 0..10 {
            let z = TropAssignment::finite(rand_point(&mut r, 4));
            prop_assert_eq!(fast.eval_trop(&z).unwrap().0, naive_product(4, &polys).eval_trop(&z).unwrap().0);
        }
    }
}

#[test]
fn freshman_dream_in_three_variables() {
    let lin = FormalPolynomial::all_one(3, [Monomial::new(vec![1, 0, 0]), Monomial::new(vec![0, 1, 0]), Monomial::new(vec![0, 0, 1])]);
    for k in 2..=5u32 {
        let copies = vec![lin.clone(); k as usize];
        let out = vn(3, &copies).unwrap();
        let want = FormalPolynomial::all_one(
            3,
            [Monomial::new(vec![k, 0, 0]), Monomial::new(vec![0, k, 0]), Monomial::new(vec![0, 0, k])],
        );
        assert_eq!(out, want);
    }
}

#[test]
fn minimal_vertex_with_trivial_cone() {
    let pts = [Monomial::new(vec![0, 4, 0]), Monomial::new(vec![0, 0, 4]), Monomial::new(vec![1, 2, 3])];
    let (_, s) = np_min(&FormalPolynomial::all_one(3, pts.clone()));
    assert_eq!(s.len(), 3);
    let cone = normal_cone(&pts[2], &s).unwrap();
    assert!(cone.witness.is_none());
    assert!(cone.system.contains(&[Q::zero(), Q::zero(), Q::zero()]));
    assert!(!cone.system.contains(&[q(1, 100), q(1, 1), q(1, 1)]));
}

#[test]
fn empty_factor_annihilates() {
    let a = FormalPolynomial::all_one(2, [Monomial::new(vec![1, 0])]);
    assert!(vn(2, &[a, FormalPolynomial::zero(2)]).unwrap().is_zero());
    assert!(min_dot(&[], &[Q::zero()]).is_none());
}
