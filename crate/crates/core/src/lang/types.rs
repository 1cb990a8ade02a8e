use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::syntax::Term;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SimpleType {
    Bool,
    Nat,
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn arrow(a: SimpleType, b: SimpleType) -> SimpleType {
        SimpleType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, SimpleType::Arrow(..))
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Bool => f.write_str("Bool"),
            SimpleType::Nat => f.write_str("Nat"),
            SimpleType::Arrow(a, b) => {
                if a.is_ground() {
                    write!(f, "{a} -> {b}")
                } else {
                    write!(f, "({a}) -> {b}")
                }
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("type error in `{subterm}`: {msg}")]
    Mismatch { subterm: String, msg: String },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("cannot infer a ground type: program has type {0}")]
    NotGround(SimpleType),
}

/// Simple typing of a term. Node ids follow a pre-order walk: a node, then its
/// children left to right.
#[derive(Clone, Debug)]
pub struct Typing {
    pub ty: SimpleType,
    pub node_types: Vec<SimpleType>,
    /// Nodes typed `Bool` that are used at `Nat`.
    pub casts: Vec<usize>,
}

impl Typing {
    pub fn is_cast(&self, node: usize) -> bool {
        self.casts.binary_search(&node).is_ok()
    }
}

#[derive(Clone, Debug)]
enum Ty {
    Var(usize),
    /// Ground type whose Bool/Nat choice is a kind variable.
    Ground(usize),
    Arrow(Box<Ty>, Box<Ty>),
}

struct Flow {
    have: Ty,
    want: Ty,
    node: usize,
}

struct Infer<'a> {
    subst: Vec<Option<Ty>>,
    kind_parent: Vec<usize>,
    kind_nat: Vec<bool>,
    kind_le: Vec<(usize, usize, usize)>,
    flows: Vec<Flow>,
    node_ty: Vec<Ty>,
    subjects: Vec<&'a Term>,
}

impl<'a> Infer<'a> {
    fn fresh(&mut self) -> Ty {
        self.subst.push(None);
        Ty::Var(self.subst.len() - 1)
    }

    fn fresh_kind(&mut self, nat: bool) -> usize {
        self.kind_parent.push(self.kind_parent.len());
        self.kind_nat.push(nat);
        self.kind_parent.len() - 1
    }

    fn find(&mut self, k: usize) -> usize {
        let mut r = k;
        while self.kind_parent[r] != r {
            r = self.kind_parent[r];
        }
        let mut c = k;
        while self.kind_parent[c] != r {
            let next = self.kind_parent[c];
            self.kind_parent[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.kind_parent[ra] = rb;
            self.kind_nat[rb] |= self.kind_nat[ra];
        }
    }

    fn shallow(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Var(v) = t {
            match &self.subst[v] {
                Some(next) => t = next.clone(),
                None => return t,
            }
        }
        t
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.shallow(t) {
            Ty::Var(w) => v == w,
            Ty::Ground(_) => false,
            Ty::Arrow(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty, node: usize) -> Result<(), TypeError> {
        match (self.shallow(a), self.shallow(b)) {
            (Ty::Var(v), Ty::Var(w)) if v == w => Ok(()),
            (Ty::Var(v), t) | (t, Ty::Var(v)) => {
                if self.occurs(v, &t) {
                    return Err(self.mismatch(node, "infinite type".into()));
                }
                self.subst[v] = Some(t);
                Ok(())
            }
            (Ty::Ground(k1), Ty::Ground(k2)) => {
                self.union(k1, k2);
                Ok(())
            }
            (Ty::Arrow(a1, b1), Ty::Arrow(a2, b2)) => {
                self.unify(&a1, &a2, node)?;
                self.unify(&b1, &b2, node)
            }
            _ => Err(self.mismatch(node, "expected a function, found a ground value (or the converse)".into())),
        }
    }

    fn mismatch(&self, node: usize, msg: String) -> TypeError {
        TypeError::Mismatch { subterm: self.subjects[node].to_string(), msg }
    }

    fn flow(&mut self, have: Ty, want: Ty, node: usize) {
        self.flows.push(Flow { have, want, node });
    }

    fn nat(&mut self) -> Ty {
        Ty::Ground(self.fresh_kind(true))
    }

    fn walk(&mut self, t: &'a Term, env: &mut Vec<(Rc<str>, Ty)>) -> Result<Ty, TypeError> {
        let node = self.node_ty.len();
        self.subjects.push(t);
        self.node_ty.push(Ty::Var(usize::MAX));
        let ty = match t {
            Term::Zero => Ty::Ground(self.fresh_kind(false)),
            Term::Succ(inner) => {
                let it = self.walk(inner, env)?;
                if matches!(**inner, Term::Zero) {
                    Ty::Ground(self.fresh_kind(false))
                } else {
                    let want = self.nat();
                    self.flow(it, want, node + 1);
                    self.nat()
                }
            }
            Term::Pred(inner) => {
                let it = self.walk(inner, env)?;
                let want = self.nat();
                self.flow(it, want, node + 1);
                self.nat()
            }
            Term::Ifz(s, a, b) => {
                let sn = self.node_ty.len();
                let st = self.walk(s, env)?;
                let want = self.nat();
                self.flow(st, want, sn);
                let r = self.fresh();
                let an = self.node_ty.len();
                let at = self.walk(a, env)?;
                self.flow(at, r.clone(), an);
                let bn = self.node_ty.len();
                let bt = self.walk(b, env)?;
                self.flow(bt, r.clone(), bn);
                r
            }
            Term::Var(x) => match env.iter().rev().find(|(y, _)| y == x) {
                Some((_, ty)) => ty.clone(),
                None => return Err(TypeError::Unbound(x.to_string())),
            },
            Term::Lam(x, body) => {
                let a = self.fresh();
                let b = self.fresh();
                env.push((x.clone(), a.clone()));
                let bn = self.node_ty.len();
                let bt = self.walk(body, env);
                env.pop();
                self.flow(bt?, b.clone(), bn);
                Ty::Arrow(Box::new(a), Box::new(b))
            }
            Term::App(f, arg) => {
                let ft = self.walk(f, env)?;
                let a = self.fresh();
                let b = self.fresh();
                self.unify(&ft, &Ty::Arrow(Box::new(a.clone()), Box::new(b.clone())), node)?;
                let an = self.node_ty.len();
                let at = self.walk(arg, env)?;
                self.flow(at, a, an);
                b
            }
            Term::Fix(inner) => {
                let it = self.walk(inner, env)?;
                let a = self.fresh();
                self.unify(&it, &Ty::Arrow(Box::new(a.clone()), Box::new(a.clone())), node)?;
                a
            }
            Term::Choice(_, l, r) => {
                let out = self.fresh();
                let ln = self.node_ty.len();
                let lt = self.walk(l, env)?;
                self.flow(lt, out.clone(), ln);
                let rn = self.node_ty.len();
                let rt = self.walk(r, env)?;
                self.flow(rt, out.clone(), rn);
                out
            }
        };
        self.node_ty[node] = ty.clone();
        Ok(ty)
    }

    fn solve(&mut self) -> Result<(), TypeError> {
        let mut pending = std::mem::take(&mut self.flows);
        loop {
            let mut deferred = Vec::new();
            let mut progress = false;
            for f in pending {
                match (self.shallow(&f.have), self.shallow(&f.want)) {
                    (Ty::Ground(k1), Ty::Ground(k2)) => {
                        self.kind_le.push((k1, k2, f.node));
                        progress = true;
                    }
                    (Ty::Var(_), Ty::Var(_)) => deferred.push(f),
                    (Ty::Var(v), Ty::Ground(k)) => {
                        let k2 = self.fresh_kind(false);
                        self.subst[v] = Some(Ty::Ground(k2));
                        self.kind_le.push((k2, k, f.node));
                        progress = true;
                    }
                    (Ty::Ground(k), Ty::Var(v)) => {
                        let k2 = self.fresh_kind(false);
                        self.subst[v] = Some(Ty::Ground(k2));
                        self.kind_le.push((k, k2, f.node));
                        progress = true;
                    }
                    (h, w) => {
                        self.unify(&h, &w, f.node)?;
                        progress = true;
                    }
                }
            }
            if deferred.is_empty() {
                break;
            }
            if !progress {
                let f = deferred.remove(0);
                self.unify(&f.have, &f.want, f.node)?;
            }
            pending = deferred;
        }
        // least solution: a kind is Nat only when forced
        loop {
            let mut changed = false;
            for i in 0..self.kind_le.len() {
                let (a, b, _) = self.kind_le[i];
                let (ra, rb) = (self.find(a), self.find(b));
                if self.kind_nat[ra] && !self.kind_nat[rb] {
                    self.kind_nat[rb] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(())
    }

    fn resolve(&mut self, t: &Ty) -> SimpleType {
        match self.shallow(t) {
            Ty::Var(_) => SimpleType::Bool,
            Ty::Ground(k) => {
                let r = self.find(k);
                if self.kind_nat[r] {
                    SimpleType::Nat
                } else {
                    SimpleType::Bool
                }
            }
            Ty::Arrow(a, b) => SimpleType::arrow(self.resolve(&a), self.resolve(&b)),
        }
    }
}

/// Infers the least simple typing of a closed term, recording every Bool-to-Nat cast.
pub fn type_check(t: &Term) -> Result<Typing, TypeError> {
    let mut inf = Infer {
        subst: Vec::new(),
        kind_parent: Vec::new(),
        kind_nat: Vec::new(),
        kind_le: Vec::new(),
        flows: Vec::new(),
        node_ty: Vec::new(),
        subjects: Vec::new(),
    };
    let root = inf.walk(t, &mut Vec::new())?;
    inf.solve()?;
    let ty = inf.resolve(&root);
    let node_ty = std::mem::take(&mut inf.node_ty);
    let node_types = node_ty.iter().map(|t| inf.resolve(t)).collect();
    let mut casts = Vec::new();
    for i in 0..inf.kind_le.len() {
        let (a, b, node) = inf.kind_le[i];
        let (ra, rb) = (inf.find(a), inf.find(b));
        if !inf.kind_nat[ra] && inf.kind_nat[rb] {
            casts.push(node);
        }
    }
    casts.sort_unstable();
    casts.dedup();
    Ok(Typing { ty, node_types, casts })
}

/// Like [`type_check`] but rejects programs whose type is not `Bool` or `Nat`.
pub fn check_ground(t: &Term) -> Result<Typing, TypeError> {
    let typing = type_check(t)?;
    if !typing.ty.is_ground() {
        return Err(TypeError::NotGround(typing.ty));
    }
    Ok(typing)
}

/// Names of the free variables of `t` mapped to a count of occurrences.
pub fn free_vars(t: &Term) -> HashMap<String, usize> {
    fn go(t: &Term, bound: &mut Vec<Rc<str>>, out: &mut HashMap<String, usize>) {
        match t {
            Term::Zero => {}
            Term::Var(x) => {
                if !bound.contains(x) {
                    *out.entry(x.to_string()).or_default() += 1;
                }
            }
            Term::Lam(x, b) => {
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            Term::Succ(a) | Term::Pred(a) | Term::Fix(a) => go(a, bound, out),
            Term::App(a, b) | Term::Choice(_, a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Term::Ifz(a, b, c) => {
                go(a, bound, out);
                go(b, bound, out);
                go(c, bound, out);
            }
        }
    }
    let mut out = HashMap::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_term;

    fn ty(src: &str) -> Result<SimpleType, TypeError> {
        type_check(&parse_term(src).unwrap()).map(|t| t.ty)
    }

    #[test]
    fn m1_is_bool() {
        assert_eq!(ty("(1 +[X] 0) +[X] ((1 +[X] 0) +[X] (0 +[X] 1))").unwrap(), SimpleType::Bool);
    }

    #[test]
    fn numerals_and_casts() {
        assert_eq!(ty("2").unwrap(), SimpleType::Nat);
        assert_eq!(ty("succ 0").unwrap(), SimpleType::Bool);
        let t = type_check(&parse_term("1 +[X] 2").unwrap()).unwrap();
        assert_eq!(t.ty, SimpleType::Nat);
        assert_eq!(t.casts, vec![1, 4]);
        assert_eq!(ty("pred (1 +[X] 0)").unwrap(), SimpleType::Nat);
    }

    #[test]
    fn identity_defaults_to_bool() {
        let id = SimpleType::arrow(SimpleType::Bool, SimpleType::Bool);
        assert_eq!(ty("\\x. x").unwrap(), id.clone());
        let err = check_ground(&parse_term("\\x. x").unwrap()).unwrap_err();
        assert_eq!(err, TypeError::NotGround(id));
        assert!(err.to_string().contains("cannot infer"));
    }

    #[test]
    fn fix_of_identity_function() {
        let b = SimpleType::arrow(SimpleType::Bool, SimpleType::Bool);
        assert_eq!(ty("fix (\\f. \\x. f x)").unwrap(), b);
    }

    #[test]
    fn counters() {
        assert_eq!(ty("fix (\\f. \\x. ifz x then 0 else f (pred x)) 3").unwrap(), SimpleType::Bool);
        assert_eq!(ty("fix (\\f. \\x. ifz x then 0 else succ (f (pred x))) 3").unwrap(), SimpleType::Nat);
    }

    #[test]
    fn errors() {
        assert!(matches!(ty("x"), Err(TypeError::Unbound(_))));
        assert!(matches!(ty("0 0"), Err(TypeError::Mismatch { .. })));
        assert!(matches!(ty("succ (\\x. x)"), Err(TypeError::Mismatch { .. })));
        assert!(matches!(ty("\\x. x x"), Err(TypeError::Mismatch { .. })));
        let e = ty("1 +[X] (\\x. x)").unwrap_err();
        assert!(e.to_string().contains("\\x. x"), "{e}");
    }

    #[test]
    fn node_types_are_preorder() {
        let t = type_check(&parse_term("(\\x. succ x) 1").unwrap()).unwrap();
        assert_eq!(t.node_types.len(), 6);
        assert_eq!(t.node_types[0], SimpleType::Nat);
        assert_eq!(t.node_types[1], SimpleType::arrow(SimpleType::Bool, SimpleType::Nat));
        assert_eq!(t.casts, vec![3]);
    }
}
