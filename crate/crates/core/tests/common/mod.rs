//! Shared fixtures for the integration suites: seeded randomness, a
//! generator of small well-typed programs and oracle helpers.

#![allow(dead_code)]

use std::path::PathBuf;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tropinf::algebra::{FormalPolynomial, Monomial, Q};
use tropinf::lang::{check_ground, enumerate_trajectories, parse, Program, Term};

pub const DEFAULT_SEED: u64 = 0x7e0f_1a2b;

/// Sampling seed, overridable through `TROPINF_SEED`.
pub fn seed() -> u64 {
    std::env::var("TROPINF_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed());
    r.set_stream(stream);
    r
}

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.pcfx"))
}

pub fn load(name: &str) -> Program {
    let src = std::fs::read_to_string(corpus(name)).expect("corpus file");
    parse(&src).expect("corpus program parses")
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

pub fn mono(e: &[u32]) -> Monomial {
    Monomial::new(e.to_vec())
}

/// Random rational in `[0, max]` with denominator at most `den`.
pub fn rand_q(r: &mut impl Rng, max: i64, den: i64) -> Q {
    let d = r.gen_range(1..=den);
    q(r.gen_range(0..=max * d), d)
}

pub fn rand_point(r: &mut impl Rng, dim: usize) -> Vec<Q> {
    (0..dim).map(|_| rand_q(r, 10, 7)).collect()
}

/// All-one polynomial of the reductions of `prog` to `target` seen within `budget` steps.
pub fn oracle_support(prog: &Program, target: u64, budget: usize) -> (FormalPolynomial, bool) {
    let trajs = enumerate_trajectories(&prog.term, prog.params, budget).expect("oracle runs");
    let complete = trajs.iter().all(|t| t.is_terminated());
    let ms = trajs.into_iter().filter(|t| t.value() == Some(target)).map(|t| t.monomial);
    (FormalPolynomial::all_one(prog.dim(), ms), complete)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ty {
    Nat,
    Fun,
}

/// Generator of closed, fixpoint-free programs over `Nat` and `Nat -> Nat`.
pub struct ProgramGen {
    pub params: u32,
    pub max_nodes: usize,
    pub max_numeral: u64,
    fresh: usize,
}

impl ProgramGen {
    pub fn new(params: u32, max_nodes: usize, max_numeral: u64) -> Self {
        ProgramGen { params, max_nodes, max_numeral, fresh: 0 }
    }

    fn var_of(&self, r: &mut impl Rng, env: &[(Rc<str>, Ty)], ty: Ty) -> Option<Rc<Term>> {
        let vs: Vec<&Rc<str>> = env.iter().filter(|(_, t)| *t == ty).map(|(x, _)| x).collect();
        if vs.is_empty() {
            None
        } else {
            Some(Rc::new(Term::Var(vs[r.gen_range(0..vs.len())].clone())))
        }
    }

    fn gen(&mut self, r: &mut impl Rng, env: &mut Vec<(Rc<str>, Ty)>, ty: Ty, fuel: usize) -> Rc<Term> {
        match ty {
            Ty::Fun => {
                if fuel < 3 || r.gen_bool(0.2) {
                    if let Some(v) = self.var_of(r, env, Ty::Fun) {
                        return v;
                    }
                }
                self.fresh += 1;
                let x: Rc<str> = format!("x{}", self.fresh).into();
                env.push((x.clone(), Ty::Nat));
                let body = self.gen(r, env, Ty::Nat, fuel.saturating_sub(1));
                env.pop();
                Rc::new(Term::Lam(x, body))
            }
            Ty::Nat => {
                if fuel <= 1 || r.gen_bool(0.25) {
                    if r.gen_bool(0.4) {
                        if let Some(v) = self.var_of(r, env, Ty::Nat) {
                            return v;
                        }
                    }
                    return Term::num(r.gen_range(0..=self.max_numeral));
                }
                let choice_weight = if self.params == 0 { 0 } else { 4 };
                let k = r.gen_range(0..(6 + choice_weight));
                match k {
                    0 => Rc::new(Term::Succ(self.gen(r, env, Ty::Nat, fuel - 1))),
                    1 => Rc::new(Term::Pred(self.gen(r, env, Ty::Nat, fuel - 1))),
                    2 => {
                        let s = self.gen(r, env, Ty::Nat, fuel / 3);
                        let a = self.gen(r, env, Ty::Nat, fuel / 3);
                        let b = self.gen(r, env, Ty::Nat, fuel / 3);
                        Term::ifz(s, a, b)
                    }
                    3 | 4 => {
                        let f = self.gen(r, env, Ty::Fun, fuel / 2);
                        let a = self.gen(r, env, Ty::Nat, fuel / 2);
                        Term::app(f, a)
                    }
                    5 => {
                        self.fresh += 1;
                        let x: Rc<str> = format!("f{}", self.fresh).into();
                        let arg = self.gen(r, env, Ty::Fun, fuel / 2);
                        env.push((x.clone(), Ty::Fun));
                        let body = self.gen(r, env, Ty::Nat, fuel / 2);
                        env.pop();
                        Term::app(Rc::new(Term::Lam(x, body)), arg)
                    }
                    _ => {
                        let i = r.gen_range(1..=self.params);
                        let a = self.gen(r, env, Ty::Nat, fuel / 2);
                        let b = self.gen(r, env, Ty::Nat, fuel / 2);
                        Term::choice(i, a, b)
                    }
                }
            }
        }
    }

    /// A random well-typed program with at most `max_nodes` nodes.
    pub fn sample(&mut self, r: &mut impl Rng) -> Program {
        loop {
            self.fresh = 0;
            let fuel = r.gen_range(self.max_nodes / 2..=self.max_nodes);
            let t = self.gen(r, &mut Vec::new(), Ty::Nat, fuel);
            if t.size() <= self.max_nodes && check_ground(&t).is_ok() {
                return Program::new(self.params, t);
            }
        }
    }

    /// A random program containing a choice, with a target drawn from its outcomes.
    pub fn sample_with_target(&mut self, r: &mut impl Rng, budget: usize) -> (Program, u64) {
        loop {
            let prog = self.sample(r);
            if prog.term.max_param() == 0 {
                continue;
            }
            let trajs = enumerate_trajectories(&prog.term, prog.params, budget).expect("oracle runs");
            let values: Vec<u64> = trajs.iter().filter_map(|t| t.value()).collect();
            if values.is_empty() || values.len() < trajs.len() {
                continue;
            }
            let target = values[r.gen_range(0..values.len())];
            return (prog, target);
        }
    }
}
