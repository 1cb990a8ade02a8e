use std::collections::BTreeMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::itype::{combinations_with_repetition, Ctx, IType, Pat};
use super::SearchError;
use crate::algebra::{FormalPolynomial, Monomial};
use crate::geometry::{hull_vertices, minimal_vertices};
use crate::lang::{ChoiceWord, Term};

/// Trace word of every monomial of an entry polynomial.
pub type Traces = BTreeMap<Monomial, ChoiceWord>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    Empty,
    Id,
    Num,
    Succ,
    Pred,
    Ifz,
    Oplus,
    Lambda,
    App,
    Fix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    /// Total number of fixpoint rules in a derivation.
    pub n: u32,
    /// Largest multiset in arrow types and contexts, and largest Nat atom for variables.
    pub p: u32,
}

/// How one merged summand of an entry was built: an optional choice factor
/// times one entry from each listed premise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Source {
    pub factor: Option<(u32, bool)>,
    pub parts: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub ctx: Ctx,
    pub ty: IType,
    /// Number of fixpoint rules used by every reduction this entry collects.
    pub uses: u32,
    pub poly: FormalPolynomial,
    pub traces: Traces,
    pub sources: Vec<Source>,
}

#[derive(Clone, Debug)]
pub struct TropDerivation {
    pub rule: Rule,
    pub subject: Rc<Term>,
    pub pattern: Pat,
    pub premises: Vec<Rc<TropDerivation>>,
    pub entries: Vec<Entry>,
}

impl TropDerivation {
    pub fn empty(subject: Rc<Term>, pattern: Pat) -> Self {
        TropDerivation { rule: Rule::Empty, subject, pattern, premises: Vec::new(), entries: Vec::new() }
    }
}

/// Minimal polynomial of a product of minimal polynomials, with a trace for each
/// output monomial formed by concatenating factor traces in order.
pub fn vn_traced(dim: usize, factors: &[&Traces]) -> Traces {
    let mut acc: Traces = BTreeMap::from([(Monomial::one(dim), ChoiceWord::empty())]);
    for f in factors {
        let mut next: Traces = BTreeMap::new();
        for (a, wa) in &acc {
            for (b, wb) in f.iter() {
                let m = a.times(b);
                let w = wa.concat(wb);
                match next.get(&m) {
                    Some(old) if *old <= w => {}
                    _ => {
                        next.insert(m, w);
                    }
                }
            }
        }
        if next.len() > 2 {
            let keys: Vec<Monomial> = next.keys().cloned().collect();
            let keep = hull_vertices(&keys).map(|h| h.vertices).unwrap_or(keys);
            next.retain(|m, _| keep.binary_search(m).is_ok());
        }
        acc = next;
    }
    if acc.len() > 1 {
        let keys: Vec<Monomial> = acc.keys().cloned().collect();
        let keep = minimal_vertices(&keys);
        acc.retain(|m, _| keep.binary_search(m).is_ok());
    }
    acc
}

fn union_traces(into: &mut Traces, from: Traces) {
    for (m, w) in from {
        match into.get(&m) {
            Some(old) if *old <= w => {}
            _ => {
                into.insert(m, w);
            }
        }
    }
}

/// Fuses entries with equal context, type and fixpoint count, then minimizes.
pub fn merge(dim: usize, entries: Vec<Entry>) -> Vec<Entry> {
    let mut groups: BTreeMap<(Ctx, IType, u32), (Entry, bool)> = BTreeMap::new();
    for e in entries {
        let key = (e.ctx.clone(), e.ty.clone(), e.uses);
        match groups.get_mut(&key) {
            Some((g, dirty)) => {
                union_traces(&mut g.traces, e.traces);
                g.sources.extend(e.sources);
                *dirty = true;
            }
            None => {
                groups.insert(key, (e, false));
            }
        }
    }
    groups
        .into_values()
        .map(|(mut e, dirty)| {
            if dirty && e.traces.len() > 1 {
                let keys: Vec<Monomial> = e.traces.keys().cloned().collect();
                let keep = minimal_vertices(&keys);
                e.traces.retain(|m, _| keep.binary_search(m).is_ok());
            }
            e.poly = FormalPolynomial::all_one(dim, e.traces.keys().cloned());
            e
        })
        .collect()
}

/// Builds candidate entries for the rules of the tropical type system.
pub struct Combiner {
    pub params: u32,
    pub bounds: Bounds,
    /// Remaining number of candidate entries the search may build.
    pub budget: u64,
}

impl Combiner {
    pub fn new(params: u32, bounds: Bounds, budget: u64) -> Self {
        Combiner { params, bounds, budget }
    }

    pub fn dim(&self) -> usize {
        2 * self.params as usize
    }

    fn charge(&mut self) -> Result<(), SearchError> {
        if self.budget == 0 {
            return Err(SearchError::Exhausted(self.bounds));
        }
        self.budget -= 1;
        Ok(())
    }

    fn unit(&self) -> Traces {
        BTreeMap::from([(Monomial::one(self.dim()), ChoiceWord::empty())])
    }

    pub fn id_entries(&mut self, x: &Rc<str>, types: Vec<IType>) -> Result<Vec<Entry>, SearchError> {
        let mut out = Vec::new();
        for ty in types {
            self.charge()?;
            out.push(Entry {
                ctx: Ctx::singleton(x.clone(), ty.clone()),
                ty,
                uses: 0,
                poly: FormalPolynomial::one(self.dim()),
                traces: self.unit(),
                sources: vec![Source { factor: None, parts: Vec::new() }],
            });
        }
        Ok(out)
    }

    pub fn num_entry(&mut self) -> Result<Entry, SearchError> {
        self.charge()?;
        Ok(Entry {
            ctx: Ctx::empty(),
            ty: IType::Atom(0),
            uses: 0,
            poly: FormalPolynomial::one(self.dim()),
            traces: self.unit(),
            sources: vec![Source { factor: None, parts: Vec::new() }],
        })
    }

    fn candidate(
        &mut self,
        premises: &[Rc<TropDerivation>],
        factor: Option<(u32, bool)>,
        parts: Vec<(usize, usize)>,
        ty: IType,
        extra_uses: u32,
    ) -> Result<Option<Entry>, SearchError> {
        self.charge()?;
        let mut ctx = Ctx::empty();
        let mut uses = extra_uses;
        for &(p, e) in &parts {
            let entry = &premises[p].entries[e];
            ctx = ctx.sum(&entry.ctx);
            uses += entry.uses;
        }
        if uses > self.bounds.n || ctx.max_len() > self.bounds.p as usize {
            return Ok(None);
        }
        let factor_traces: Option<Traces> = factor.map(|(i, right)| {
            let mut w = ChoiceWord::empty();
            w.push(i, right as u8);
            BTreeMap::from([(Monomial::param(self.params, i, right), w)])
        });
        let mut factors: Vec<&Traces> = Vec::new();
        if let Some(f) = &factor_traces {
            factors.push(f);
        }
        for &(p, e) in &parts {
            factors.push(&premises[p].entries[e].traces);
        }
        let traces = vn_traced(self.dim(), &factors);
        let poly = FormalPolynomial::all_one(self.dim(), traces.keys().cloned());
        Ok(Some(Entry { ctx, ty, uses, poly, traces, sources: vec![Source { factor, parts }] }))
    }

    /// Shifts atoms of the single premise: `succ` adds one, `pred` subtracts one down to 0.
    pub fn shift(&mut self, premises: &[Rc<TropDerivation>], up: bool) -> Result<Vec<Entry>, SearchError> {
        let mut out = Vec::new();
        for (p, d) in premises.iter().enumerate() {
            for (j, e) in d.entries.iter().enumerate() {
                if let IType::Atom(k) = e.ty {
                    let k2 = if up { k + 1 } else { k.saturating_sub(1) };
                    out.extend(self.candidate(premises, None, vec![(p, j)], IType::Atom(k2), 0)?);
                }
            }
        }
        Ok(out)
    }

    /// Premises: scrutinee, then-branch, else-branch.
    pub fn ifz(&mut self, premises: &[Rc<TropDerivation>]) -> Result<Vec<Entry>, SearchError> {
        let mut out = Vec::new();
        for (s, se) in premises[0].entries.iter().enumerate() {
            let branch = match se.ty {
                IType::Atom(0) => 1,
                IType::Atom(_) => 2,
                IType::Arrow(..) => continue,
            };
            for (t, te) in premises[branch].entries.iter().enumerate() {
                out.extend(self.candidate(premises, None, vec![(0, s), (branch, t)], te.ty.clone(), 0)?);
            }
        }
        Ok(out)
    }

    /// Premises: left branch, right branch.
    pub fn oplus(&mut self, param: u32, premises: &[Rc<TropDerivation>]) -> Result<Vec<Entry>, SearchError> {
        let mut out = Vec::new();
        for side in 0..2 {
            for (j, e) in premises[side].entries.iter().enumerate() {
                out.extend(self.candidate(premises, Some((param, side == 1)), vec![(side, j)], e.ty.clone(), 0)?);
            }
        }
        Ok(out)
    }

    pub fn lambda(&mut self, x: &str, premises: &[Rc<TropDerivation>]) -> Result<Vec<Entry>, SearchError> {
        let mut out = Vec::new();
        for (j, e) in premises[0].entries.iter().enumerate() {
            self.charge()?;
            let (m, ctx) = e.ctx.take(x);
            if m.len() > self.bounds.p as usize {
                continue;
            }
            out.push(Entry {
                ctx,
                ty: IType::arrow(m, e.ty.clone()),
                uses: e.uses,
                poly: e.poly.clone(),
                traces: e.traces.clone(),
                sources: vec![Source { factor: None, parts: vec![(0, j)] }],
            });
        }
        Ok(out)
    }

    /// Application (`extra_uses = 0`) and fixpoint (`extra_uses = 1`): premise 0 has
    /// arrow entries, the other premises supply one entry per multiset element.
    pub fn spread(&mut self, premises: &[Rc<TropDerivation>], extra_uses: u32) -> Result<Vec<Entry>, SearchError> {
        let mut by_type: BTreeMap<&IType, Vec<(usize, usize)>> = BTreeMap::new();
        for (p, d) in premises.iter().enumerate().skip(1) {
            for (j, e) in d.entries.iter().enumerate() {
                by_type.entry(&e.ty).or_default().push((p, j));
            }
        }
        let mut out = Vec::new();
        for (f, fe) in premises[0].entries.iter().enumerate() {
            let IType::Arrow(m, result) = &fe.ty else { continue };
            let mut groups: Vec<Vec<Vec<(usize, usize)>>> = Vec::new();
            let mut feasible = true;
            for (b, c) in m.counts() {
                let Some(avail) = by_type.get(b) else {
                    feasible = false;
                    break;
                };
                let choices = combinations_with_repetition(avail.len(), c)
                    .into_iter()
                    .map(|ix| ix.into_iter().map(|i| avail[i]).collect())
                    .collect();
                groups.push(choices);
            }
            if !feasible {
                continue;
            }
            let start = (fe.ctx.clone(), fe.uses + extra_uses);
            self.product(premises, &groups, 0, vec![(0, f)], start, result, extra_uses, &mut out)?;
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn product(
        &mut self,
        premises: &[Rc<TropDerivation>],
        groups: &[Vec<Vec<(usize, usize)>>],
        g: usize,
        parts: Vec<(usize, usize)>,
        (ctx, uses): (Ctx, u32),
        result: &IType,
        extra_uses: u32,
        out: &mut Vec<Entry>,
    ) -> Result<(), SearchError> {
        if uses > self.bounds.n || ctx.max_len() > self.bounds.p as usize {
            return Ok(());
        }
        if g == groups.len() {
            out.extend(self.candidate(premises, None, parts, result.clone(), extra_uses)?);
            return Ok(());
        }
        for choice in &groups[g] {
            self.charge()?;
            let mut c2 = ctx.clone();
            let mut u2 = uses;
            for &(p, e) in choice {
                let entry = &premises[p].entries[e];
                c2 = c2.sum(&entry.ctx);
                u2 += entry.uses;
            }
            let mut p2 = parts.clone();
            p2.extend_from_slice(choice);
            self.product(premises, groups, g + 1, p2, (c2, u2), result, extra_uses, out)?;
        }
        Ok(())
    }
}

fn expect(cond: bool, rule: Rule, msg: &str) -> Result<(), SearchError> {
    if cond {
        Ok(())
    } else {
        Err(SearchError::Schema { rule, msg: msg.to_string() })
    }
}

/// Builds the conclusion of `rule` at `site` from derivations of its premises.
/// For `App` and `Fix` the first premise types the function and the rest type
/// its arguments (the unfolded fixpoint for `Fix`). `Id` has no premises and is
/// produced by the search from the variable's refinements.
pub fn apply_rule(
    rule: Rule,
    premises: Vec<Rc<TropDerivation>>,
    site: &Rc<Term>,
    comb: &mut Combiner,
) -> Result<TropDerivation, SearchError> {
    let sub = |i: usize| premises.get(i).map(|d| d.subject.clone());
    let entries = match (rule, &**site) {
        (Rule::Empty, _) => Vec::new(),
        (Rule::Num, Term::Zero) => vec![comb.num_entry()?],
        (Rule::Succ, Term::Succ(m)) => {
            expect(premises.len() == 1 && sub(0).as_ref() == Some(m), rule, "one premise typing the argument")?;
            comb.shift(&premises, true)?
        }
        (Rule::Pred, Term::Pred(m)) => {
            expect(!premises.is_empty() && premises.iter().all(|d| d.subject == *m), rule, "premises typing the argument")?;
            comb.shift(&premises, false)?
        }
        (Rule::Ifz, Term::Ifz(s, a, b)) => {
            expect(
                premises.len() == 3 && sub(0).as_ref() == Some(s) && sub(1).as_ref() == Some(a) && sub(2).as_ref() == Some(b),
                rule,
                "premises for scrutinee and both branches",
            )?;
            comb.ifz(&premises)?
        }
        (Rule::Oplus, Term::Choice(i, l, r)) => {
            expect(premises.len() == 2 && sub(0).as_ref() == Some(l) && sub(1).as_ref() == Some(r), rule, "premises for both branches")?;
            comb.oplus(*i, &premises)?
        }
        (Rule::Lambda, Term::Lam(x, body)) => {
            expect(premises.len() == 1 && sub(0).as_ref() == Some(body), rule, "one premise typing the body")?;
            comb.lambda(x, &premises)?
        }
        (Rule::App, Term::App(f, arg)) => {
            expect(!premises.is_empty() && sub(0).as_ref() == Some(f), rule, "first premise types the function")?;
            expect(premises[1..].iter().all(|d| d.subject == *arg), rule, "argument premises type the argument")?;
            comb.spread(&premises, 0)?
        }
        (Rule::Fix, Term::Fix(p)) => {
            expect(!premises.is_empty() && sub(0).as_ref() == Some(p), rule, "first premise types the functional")?;
            expect(premises[1..].iter().all(|d| d.subject == *site), rule, "other premises type the fixpoint")?;
            comb.spread(&premises, 1)?
        }
        (Rule::Id, _) => return Err(SearchError::Schema { rule, msg: "variables are typed by the search".into() }),
        _ => return Err(SearchError::Schema { rule, msg: format!("rule does not apply to `{site}`") }),
    };
    Ok(TropDerivation { rule, subject: site.clone(), pattern: Pat::Any, premises, entries: merge(comb.dim(), entries) })
}
