use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::syntax::Term;
use crate::algebra::{param_slot, Monomial};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    NormalForm,
    Deterministic(Rc<Term>),
    Branch(u32, Rc<Term>, Rc<Term>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("internal error: stuck term `{0}`")]
    Stuck(String),
    #[error("word does not match the reduction: {0}")]
    WordMismatch(String),
}

/// Capture-avoiding substitution of `n` for `x`; unchanged subtrees are shared.
pub fn subst(t: &Rc<Term>, x: &str, n: &Rc<Term>) -> Rc<Term> {
    let fv = super::types::free_vars(n);
    subst_with(t, x, n, &fv)
}

fn fresh_name(base: &str, avoid: &dyn Fn(&str) -> bool) -> String {
    let mut i = 1;
    loop {
        let cand = format!("{base}'{i}");
        if !avoid(&cand) {
            return cand;
        }
        i += 1;
    }
}

fn subst_with(t: &Rc<Term>, x: &str, n: &Rc<Term>, fv: &std::collections::HashMap<String, usize>) -> Rc<Term> {
    let rebuild1 = |a: &Rc<Term>, f: fn(Rc<Term>) -> Term| {
        let a2 = subst_with(a, x, n, fv);
        if Rc::ptr_eq(a, &a2) {
            t.clone()
        } else {
            Rc::new(f(a2))
        }
    };
    match &**t {
        Term::Zero => t.clone(),
        Term::Var(y) => {
            if &**y == x {
                n.clone()
            } else {
                t.clone()
            }
        }
        Term::Succ(a) => rebuild1(a, Term::Succ),
        Term::Pred(a) => rebuild1(a, Term::Pred),
        Term::Fix(a) => rebuild1(a, Term::Fix),
        Term::Lam(y, body) => {
            if &**y == x {
                return t.clone();
            }
            if fv.contains_key(&**y) && body.is_free(x) {
                let z = fresh_name(y, &|c| fv.contains_key(c) || body.is_free(c) || c == x);
                let renamed = subst_with(body, y, &Term::var(&z), &[(z.clone(), 1)].into_iter().collect());
                return Term::lam(&z, subst_with(&renamed, x, n, fv));
            }
            let b2 = subst_with(body, x, n, fv);
            if Rc::ptr_eq(body, &b2) {
                t.clone()
            } else {
                Rc::new(Term::Lam(y.clone(), b2))
            }
        }
        Term::App(a, b) => {
            let (a2, b2) = (subst_with(a, x, n, fv), subst_with(b, x, n, fv));
            if Rc::ptr_eq(a, &a2) && Rc::ptr_eq(b, &b2) {
                t.clone()
            } else {
                Term::app(a2, b2)
            }
        }
        Term::Choice(i, a, b) => {
            let (a2, b2) = (subst_with(a, x, n, fv), subst_with(b, x, n, fv));
            if Rc::ptr_eq(a, &a2) && Rc::ptr_eq(b, &b2) {
                t.clone()
            } else {
                Term::choice(*i, a2, b2)
            }
        }
        Term::Ifz(s, a, b) => {
            let (s2, a2, b2) = (subst_with(s, x, n, fv), subst_with(a, x, n, fv), subst_with(b, x, n, fv));
            if Rc::ptr_eq(s, &s2) && Rc::ptr_eq(a, &a2) && Rc::ptr_eq(b, &b2) {
                t.clone()
            } else {
                Term::ifz(s2, a2, b2)
            }
        }
    }
}

fn stuck(t: &Term) -> ReduceError {
    ReduceError::Stuck(t.to_string())
}

fn wrap(step: Step, f: impl Fn(Rc<Term>) -> Rc<Term>) -> Step {
    match step {
        Step::NormalForm => Step::NormalForm,
        Step::Deterministic(t) => Step::Deterministic(f(t)),
        Step::Branch(i, l, r) => Step::Branch(i, f(l), f(r)),
    }
}

/// One weak-head call-by-name step.
pub fn reduce_once(t: &Rc<Term>) -> Result<Step, ReduceError> {
    match &**t {
        Term::Zero | Term::Lam(..) => Ok(Step::NormalForm),
        Term::Var(_) => Err(stuck(t)),
        Term::Choice(i, l, r) => Ok(Step::Branch(*i, l.clone(), r.clone())),
        Term::Fix(m) => Ok(Step::Deterministic(Term::app(m.clone(), t.clone()))),
        Term::Succ(m) => Ok(wrap(reduce_once(m)?, |m2| Rc::new(Term::Succ(m2)))),
        Term::Pred(m) => match &**m {
            Term::Zero => Ok(Step::Deterministic(m.clone())),
            Term::Succ(n) => Ok(Step::Deterministic(n.clone())),
            _ => match reduce_once(m)? {
                Step::NormalForm => Err(stuck(t)),
                s => Ok(wrap(s, |m2| Rc::new(Term::Pred(m2)))),
            },
        },
        Term::Ifz(s, a, b) => {
            if let Term::Zero = **s {
                return Ok(Step::Deterministic(a.clone()));
            }
            match reduce_once(s)? {
                Step::NormalForm if s.numeral_value().is_some() => Ok(Step::Deterministic(b.clone())),
                Step::NormalForm => Err(stuck(t)),
                step => Ok(wrap(step, |s2| Term::ifz(s2, a.clone(), b.clone()))),
            }
        }
        Term::App(f, arg) => match &**f {
            Term::Lam(x, body) => Ok(Step::Deterministic(subst(body, x, arg))),
            _ => match reduce_once(f)? {
                Step::NormalForm => Err(stuck(t)),
                step => Ok(wrap(step, |f2| Term::app(f2, arg.clone()))),
            },
        },
    }
}

/// Sequence of choices along a reduction: `bits[j]` is 0 for a left branch and
/// 1 for a right branch, taken at a choice labeled `params[j]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChoiceWord {
    pub bits: Vec<u8>,
    pub params: Vec<u32>,
}

impl ChoiceWord {
    pub fn new(bits: Vec<u8>, params: Vec<u32>) -> Self {
        assert_eq!(bits.len(), params.len(), "word and parameter sequence differ in length");
        ChoiceWord { bits, params }
    }

    pub fn empty() -> Self {
        ChoiceWord::default()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, param: u32, bit: u8) {
        self.bits.push(bit);
        self.params.push(param);
    }

    pub fn concat(&self, other: &ChoiceWord) -> ChoiceWord {
        let mut w = self.clone();
        w.bits.extend_from_slice(&other.bits);
        w.params.extend_from_slice(&other.params);
        w
    }

    pub fn prepend(&self, param: u32, bit: u8) -> ChoiceWord {
        let mut w = ChoiceWord::new(vec![bit], vec![param]);
        w.bits.extend_from_slice(&self.bits);
        w.params.extend_from_slice(&self.params);
        w
    }

    /// The monomial obtained by forgetting the order of the choices.
    pub fn abstraction(&self, params: u32) -> Monomial {
        let mut m = Monomial::one(2 * params as usize);
        for (&b, &i) in self.bits.iter().zip(&self.params) {
            m.bump(param_slot(i, b == 1));
        }
        m
    }

    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
    }
}

impl fmt::Display for ChoiceWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ε");
        }
        f.write_str(&self.bit_string())
    }
}

#[derive(Serialize, Deserialize)]
struct WordRepr {
    word: String,
    params: Vec<u32>,
}

impl Serialize for ChoiceWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WordRepr { word: self.bit_string(), params: self.params.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChoiceWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = WordRepr::deserialize(d)?;
        let bits = r
            .word
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(serde::de::Error::custom(format!("bad word symbol {other:?}"))),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        if bits.len() != r.params.len() {
            return Err(serde::de::Error::custom("word and params differ in length"));
        }
        Ok(ChoiceWord { bits, params: r.params })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub monomial: Monomial,
    pub word: ChoiceWord,
    /// `None` when the step budget ran out first.
    pub normal_form: Option<Rc<Term>>,
    pub steps: usize,
}

impl Trajectory {
    pub fn value(&self) -> Option<u64> {
        self.normal_form.as_ref().and_then(|t| t.numeral_value())
    }

    pub fn is_terminated(&self) -> bool {
        self.normal_form.is_some()
    }
}

/// Explores every path of the choice tree depth first, left branch first.
/// Paths still running after `max_steps` reductions end in a nonterminated leaf.
pub fn enumerate_trajectories(t: &Rc<Term>, params: u32, max_steps: usize) -> Result<Vec<Trajectory>, ReduceError> {
    let mut out = Vec::new();
    let mut stack = vec![(t.clone(), ChoiceWord::empty(), 0usize)];
    while let Some((mut cur, mut word, mut steps)) = stack.pop() {
        loop {
            let step = reduce_once(&cur)?;
            if matches!(step, Step::NormalForm) {
                out.push(Trajectory { monomial: word.abstraction(params), word, normal_form: Some(cur), steps });
                break;
            }
            if steps >= max_steps {
                out.push(Trajectory { monomial: word.abstraction(params), word, normal_form: None, steps });
                break;
            }
            steps += 1;
            match step {
                Step::Deterministic(next) => cur = next,
                Step::Branch(i, l, r) => {
                    let mut right = word.clone();
                    right.push(i, 1);
                    stack.push((r, right, steps));
                    word.push(i, 0);
                    cur = l;
                }
                Step::NormalForm => unreachable!(),
            }
        }
    }
    Ok(out)
}

/// Follows `word` through the reduction of `t` and returns the normal form.
pub fn replay(t: &Rc<Term>, word: &ChoiceWord, max_steps: usize) -> Result<Rc<Term>, ReduceError> {
    let mut cur = t.clone();
    let mut pos = 0;
    for _ in 0..=max_steps {
        match reduce_once(&cur)? {
            Step::NormalForm => {
                if pos != word.len() {
                    return Err(ReduceError::WordMismatch(format!("normal form reached after {pos} of {} choices", word.len())));
                }
                return Ok(cur);
            }
            Step::Deterministic(next) => cur = next,
            Step::Branch(i, l, r) => {
                if pos >= word.len() {
                    return Err(ReduceError::WordMismatch(format!("word exhausted at a choice on X{i}")));
                }
                if word.params[pos] != i {
                    return Err(ReduceError::WordMismatch(format!(
                        "choice {pos} is on X{i}, word expects X{}",
                        word.params[pos]
                    )));
                }
                cur = if word.bits[pos] == 0 { l } else { r };
                pos += 1;
            }
        }
    }
    Err(ReduceError::WordMismatch(format!("no normal form within {max_steps} steps")))
}

/// Lexicographically smallest word whose reduction reaches the numeral `target`
/// with weight exactly `mu`. Paths whose weight exceeds `mu` are cut.
pub fn find_word(
    t: &Rc<Term>,
    target: u64,
    mu: &Monomial,
    max_steps: usize,
    max_branches: usize,
) -> Option<ChoiceWord> {
    let mut stack = vec![(t.clone(), ChoiceWord::empty(), Monomial::one(mu.dim()), 0usize)];
    let mut branches = 0;
    while let Some((mut cur, mut word, mut mono, mut steps)) = stack.pop() {
        loop {
            let step = reduce_once(&cur).ok()?;
            match step {
                Step::NormalForm => {
                    if cur.numeral_value() == Some(target) && &mono == mu {
                        return Some(word);
                    }
                    break;
                }
                _ if steps >= max_steps => break,
                Step::Deterministic(next) => {
                    cur = next;
                    steps += 1;
                }
                Step::Branch(i, l, r) => {
                    branches += 1;
                    if branches > max_branches {
                        return None;
                    }
                    steps += 1;
                    let (sl, sr) = (param_slot(i, false), param_slot(i, true));
                    if mono.exponents()[sr] < mu.exponents()[sr] {
                        let mut m2 = mono.clone();
                        m2.bump(sr);
                        let mut w2 = word.clone();
                        w2.push(i, 1);
                        stack.push((r, w2, m2, steps));
                    }
                    if mono.exponents()[sl] < mu.exponents()[sl] {
                        mono.bump(sl);
                        word.push(i, 0);
                        cur = l;
                    } else {
                        break;
                    }
                }
            }
        }
    }
    None
}
