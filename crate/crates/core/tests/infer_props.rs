//! I1 answers against exhaustive enumeration and I2 regions against the
//! tropical minimum, over the corpus and random programs.

mod common;

use common::{load, q, rand_point, rng, ProgramGen};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tropinf::algebra::{ln_rational, ProbAssignment, TropAssignment, Q};
use tropinf::geometry::min_dot;
use tropinf::infer::{analyze, solve_i1, solve_i2, AnalysisConfig, AnalysisReport, ReportFile};
use tropinf::lang::{enumerate_trajectories, Program};

const ORACLE_STEPS: usize = 10_000;

fn config() -> AnalysisConfig {
    AnalysisConfig { window: 3, ..AnalysisConfig::default() }
}

fn rand_probs(r: &mut impl Rng, k: usize) -> ProbAssignment {
    ProbAssignment::new(
        (0..k)
            .map(|_| {
                let d = r.gen_range(1..=12);
                q(r.gen_range(0..=d), d)
            })
            .collect(),
    )
    .unwrap()
}

/// Largest probability of a single reduction to `target`, by enumeration.
fn oracle_best(prog: &Program, target: u64, p: &ProbAssignment) -> Q {
    let trajs = enumerate_trajectories(&prog.term, prog.params, ORACLE_STEPS).unwrap();
    assert!(trajs.iter().all(|t| t.is_terminated()));
    trajs.iter().filter(|t| t.value() == Some(target)).map(|t| p.weight(&t.monomial)).max().unwrap_or_else(Q::zero)
}

fn check_i1(prog: &Program, report: &AnalysisReport, r: &mut impl Rng) {
    for _ in 0..20 {
        let p = rand_probs(r, prog.params as usize);
        let a = solve_i1(report, &p).unwrap();
        let best = oracle_best(prog, report.target, &p);
        assert_eq!(a.probability, best, "{prog} at {:?}", p.probs());
        if best.is_zero() {
            assert_eq!(a.value, f64::INFINITY);
        } else {
            assert!((a.value - (-ln_rational(&best))).abs() < 1e-9, "{prog}");
            for w in &a.winners {
                assert_eq!(p.weight(&w.monomial), best);
                assert!(solve_i2(report, &w.monomial).unwrap().test(&p), "{prog}: winner outside its region");
            }
        }
    }
}

fn check_cone_coverage(report: &AnalysisReport, r: &mut impl Rng) {
    let support = report.polynomial.support();
    if support.is_empty() {
        assert!(report.selected.is_empty());
        return;
    }
    let dim = report.polynomial.dim();
    for _ in 0..100 {
        let z = rand_point(r, dim);
        let best = min_dot(&support, &z).unwrap();
        let hits: Vec<_> = report.selected.iter().filter(|s| s.cone.system.contains(&z)).collect();
        assert!(!hits.is_empty(), "no cone holds {z:?}");
        for s in hits {
            assert_eq!(min_dot(std::slice::from_ref(&s.monomial), &z).unwrap(), best);
        }
        let (v, _) = report.polynomial.eval_trop(&TropAssignment::finite(z)).unwrap();
        assert_eq!(v, tropinf::algebra::Tropical::Fin(best));
    }
}

#[test]
fn corpus_i1_matches_enumeration() {
    let mut r = rng(31);
    for (name, window) in [("m1", 3), ("m4_2", 3), ("m4_3", 3), ("m4_3_distinct", 3), ("m4_4", 2), ("value", 3)] {
        let prog = load(name);
        let report = analyze(&prog, 1, &AnalysisConfig { window, ..AnalysisConfig::default() }).unwrap();
        assert!(report.stable, "{name}");
        check_i1(&prog, &report, &mut r);
    }
    let prog = load("m1");
    let report = analyze(&prog, 0, &config()).unwrap();
    check_i1(&prog, &report, &mut r);
}

#[test]
fn corpus_cones_cover_the_orthant() {
    let mut r = rng(32);
    for (name, target) in [("m1", 1), ("m1", 0), ("m2", 1), ("m3", 1), ("m4_3", 1), ("m4_3_distinct", 1), ("unreachable", 0)] {
        let report = analyze(&load(name), target, &AnalysisConfig::default()).unwrap();
        check_cone_coverage(&report, &mut r);
    }
}

#[test]
fn unreachable_target_gives_an_empty_report() {
    let report = analyze(&load("unreachable"), 0, &AnalysisConfig::default()).unwrap();
    assert!(report.selected.is_empty());
    assert!(report.polynomial.is_zero());
    let a = solve_i1(&report, &ProbAssignment::parse("0.5").unwrap()).unwrap();
    assert_eq!(a.value, f64::INFINITY);
    assert!(a.winners.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_programs_i1_and_cones(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (prog, target) = ProgramGen::new(2, 12, 2).sample_with_target(&mut r, ORACLE_STEPS);
        let report = analyze(&prog, target, &config()).unwrap();
        prop_assert!(report.stable);
        check_i1(&prog, &report, &mut r);
        check_cone_coverage(&report, &mut r);
    }

    #[test]
    fn report_files_round_trip(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (prog, target) = ProgramGen::new(2, 12, 2).sample_with_target(&mut r, ORACLE_STEPS);
        let report = analyze(&prog, target, &config()).unwrap();
        let file = ReportFile::new(report, &prog.to_string());
        let text = serde_json::to_string(&file).unwrap();
        let back: ReportFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, file);
    }
}
