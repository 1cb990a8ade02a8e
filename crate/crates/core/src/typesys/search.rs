use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::deriv::{merge, Bounds, Combiner, Rule, Traces, TropDerivation};
use super::itype::{IType, Pat, Refiner};
use super::SearchError;
use crate::algebra::{FormalPolynomial, Monomial};
use crate::geometry::minimal_vertices;
use crate::lang::{check_ground, find_word, replay, ChoiceWord, Program, SimpleType, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Candidate entries one search may build before giving up.
    pub max_work: u64,
    /// Reduction steps allowed when replaying a trace.
    pub replay_steps: usize,
    /// Choice points the trace repair may visit.
    pub repair_branches: usize,
    /// Refinements of a single simple type the search may enumerate.
    pub max_refinements: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_work: 2_000_000, replay_steps: 100_000, repair_branches: 200_000, max_refinements: 50_000 }
    }
}

struct Node {
    term: Rc<Term>,
    ty: SimpleType,
    children: Vec<usize>,
}

fn flatten(t: &Rc<Term>, types: &[SimpleType], nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    nodes.push(Node { term: t.clone(), ty: types[id].clone(), children: Vec::new() });
    let kids: Vec<&Rc<Term>> = match &**t {
        Term::Zero | Term::Var(_) => vec![],
        Term::Succ(a) | Term::Pred(a) | Term::Fix(a) | Term::Lam(_, a) => vec![a],
        Term::App(a, b) | Term::Choice(_, a, b) => vec![a, b],
        Term::Ifz(a, b, c) => vec![a, b, c],
    };
    let children = kids.into_iter().map(|k| flatten(k, types, nodes)).collect();
    nodes[id].children = children;
    id
}

struct Searcher {
    nodes: Vec<Node>,
    comb: Combiner,
    refiner: Refiner,
    memo: HashMap<(usize, Pat, u32), Rc<TropDerivation>>,
}

impl Searcher {
    fn finish(&self, rule: Rule, node: usize, pat: &Pat, premises: Vec<Rc<TropDerivation>>, entries: Vec<super::deriv::Entry>) -> TropDerivation {
        let mut entries = merge(self.comb.dim(), entries);
        entries.retain(|e| pat.matches(&e.ty));
        TropDerivation { rule, subject: self.nodes[node].term.clone(), pattern: pat.clone(), premises, entries }
    }

    fn demand(&mut self, node: usize, pat: &Pat, level: u32) -> Result<Rc<TropDerivation>, SearchError> {
        let key = (node, pat.clone(), level);
        if let Some(d) = self.memo.get(&key) {
            return Ok(d.clone());
        }
        let d = Rc::new(self.build(node, pat, level)?);
        self.memo.insert(key, d.clone());
        Ok(d)
    }

    fn elements_of(d: &TropDerivation) -> BTreeSet<IType> {
        d.entries
            .iter()
            .filter_map(|e| match &e.ty {
                IType::Arrow(m, _) => Some(m.elements().to_vec()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    fn build(&mut self, node: usize, pat: &Pat, level: u32) -> Result<TropDerivation, SearchError> {
        let term = self.nodes[node].term.clone();
        let kids = self.nodes[node].children.clone();
        let n = self.comb.bounds.n;
        let empty = || Ok(TropDerivation::empty(term.clone(), pat.clone()));
        match &*term {
            Term::Zero => {
                if !pat.matches(&IType::Atom(0)) {
                    return empty();
                }
                let e = self.comb.num_entry()?;
                Ok(self.finish(Rule::Num, node, pat, vec![], vec![e]))
            }
            Term::Var(x) => {
                let bounds = self.comb.bounds;
                let types =
                    self.refiner.instances(pat, &self.nodes[node].ty).map_err(|_| SearchError::Exhausted(bounds))?;
                let entries = self.comb.id_entries(x, types)?;
                Ok(self.finish(Rule::Id, node, pat, vec![], entries))
            }
            Term::Succ(_) => {
                let inner = match pat {
                    Pat::Any => Pat::Any,
                    Pat::Atom(k) if *k > 0 => Pat::Atom(k - 1),
                    _ => return empty(),
                };
                let prem = vec![self.demand(kids[0], &inner, n)?];
                let entries = self.comb.shift(&prem, true)?;
                Ok(self.finish(Rule::Succ, node, pat, prem, entries))
            }
            Term::Pred(_) => {
                let inner: Vec<Pat> = match pat {
                    Pat::Any => vec![Pat::Any],
                    Pat::Atom(0) => vec![Pat::Atom(1), Pat::Atom(0)],
                    Pat::Atom(k) => vec![Pat::Atom(k + 1)],
                    Pat::Arrow(..) => return empty(),
                };
                let prem = inner.iter().map(|q| self.demand(kids[0], q, n)).collect::<Result<Vec<_>, _>>()?;
                let entries = self.comb.shift(&prem, false)?;
                Ok(self.finish(Rule::Pred, node, pat, prem, entries))
            }
            Term::Ifz(..) => {
                let s = self.demand(kids[0], &Pat::Any, n)?;
                let a = self.demand(kids[1], pat, n)?;
                let b = self.demand(kids[2], pat, n)?;
                let prem = vec![s, a, b];
                let entries = self.comb.ifz(&prem)?;
                Ok(self.finish(Rule::Ifz, node, pat, prem, entries))
            }
            Term::Choice(i, _, _) => {
                let prem = vec![self.demand(kids[0], pat, n)?, self.demand(kids[1], pat, n)?];
                let entries = self.comb.oplus(*i, &prem)?;
                Ok(self.finish(Rule::Oplus, node, pat, prem, entries))
            }
            Term::Lam(x, _) => {
                let body_pat = match pat {
                    Pat::Any => Pat::Any,
                    Pat::Arrow(_, r) => (**r).clone(),
                    Pat::Atom(_) => return empty(),
                };
                let prem = vec![self.demand(kids[0], &body_pat, n)?];
                let entries = self.comb.lambda(x, &prem)?;
                Ok(self.finish(Rule::Lambda, node, pat, prem, entries))
            }
            Term::App(..) => {
                let f = self.demand(kids[0], &Pat::returning(pat.clone()), n)?;
                let mut prem = vec![f.clone()];
                for b in Self::elements_of(&f) {
                    prem.push(self.demand(kids[1], &Pat::exact(&b), n)?);
                }
                let entries = self.comb.spread(&prem, 0)?;
                Ok(self.finish(Rule::App, node, pat, prem, entries))
            }
            Term::Fix(_) => {
                if level == 0 {
                    return empty();
                }
                let f = self.demand(kids[0], &Pat::returning(pat.clone()), n)?;
                let mut prem = vec![f.clone()];
                for b in Self::elements_of(&f) {
                    prem.push(self.demand(node, &Pat::exact(&b), level - 1)?);
                }
                let entries = self.comb.spread(&prem, 1)?;
                Ok(self.finish(Rule::Fix, node, pat, prem, entries))
            }
        }
    }
}

/// Outcome of one bounded search for a target numeral.
#[derive(Clone, Debug)]
pub struct SearchResult {
    pub derivation: Rc<TropDerivation>,
    pub bounds: Bounds,
    pub target: u64,
    /// Minimal polynomial over all closed entries typed by the target.
    pub poly: FormalPolynomial,
    pub traces: Traces,
    /// Monomials whose composed trace failed replay and was recomputed.
    pub repaired: Vec<Monomial>,
    /// Monomials left without a replayable trace.
    pub unverified: Vec<Monomial>,
}

impl SearchResult {
    /// Entries of the root derivation that contribute to the conclusion.
    pub fn root_entries(&self) -> Vec<usize> {
        self.derivation
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.ctx.is_empty() && e.ty == IType::Atom(self.target))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Builds the bounded derivation for `target` with at most `n` fixpoint rules and
/// multisets of at most `p` elements, then checks every trace by replay.
pub fn search(prog: &Program, target: u64, bounds: Bounds, config: &SearchConfig) -> Result<SearchResult, SearchError> {
    let typing = check_ground(&prog.term).map_err(SearchError::Type)?;
    let mut nodes = Vec::new();
    flatten(&prog.term, &typing.node_types, &mut nodes);
    let mut s = Searcher {
        nodes,
        comb: Combiner::new(prog.params, bounds, config.max_work),
        refiner: Refiner::with_limit(bounds.p, config.max_refinements),
        memo: HashMap::new(),
    };
    let derivation = s.demand(0, &Pat::Atom(target), bounds.n)?;
    let dim = prog.dim();
    let mut traces: Traces = BTreeMap::new();
    for e in derivation.entries.iter().filter(|e| e.ctx.is_empty()) {
        for (m, w) in &e.traces {
            match traces.get(m) {
                Some(old) if old <= w => {}
                _ => {
                    traces.insert(m.clone(), w.clone());
                }
            }
        }
    }
    let keep = minimal_vertices(&traces.keys().cloned().collect::<Vec<_>>());
    traces.retain(|m, _| keep.binary_search(m).is_ok());
    let mut repaired = Vec::new();
    let mut unverified = Vec::new();
    for (m, w) in traces.iter_mut() {
        if trace_is_valid(prog, target, m, w, config.replay_steps) {
            continue;
        }
        match find_word(&prog.term, target, m, config.replay_steps, config.repair_branches) {
            Some(fixed) => {
                *w = fixed;
                repaired.push(m.clone());
            }
            None => unverified.push(m.clone()),
        }
    }
    let poly = FormalPolynomial::all_one(dim, traces.keys().cloned());
    Ok(SearchResult { derivation, bounds, target, poly, traces, repaired, unverified })
}

/// Whether replaying `word` reaches the numeral `target` with weight `mu`.
pub fn trace_is_valid(prog: &Program, target: u64, mu: &Monomial, word: &ChoiceWord, max_steps: usize) -> bool {
    word.abstraction(prog.params) == *mu
        && matches!(replay(&prog.term, word, max_steps), Ok(nf) if nf.numeral_value() == Some(target))
}

/// The bounds visited by stabilization: (1,1), (2,1), (2,2), (3,2), …
pub fn schedule(rounds: usize) -> Vec<Bounds> {
    (0..rounds as u32).map(|r| Bounds { n: 1 + (r + 1) / 2, p: 1 + r / 2 }).collect()
}

#[derive(Clone, Debug)]
pub struct Stabilization {
    pub result: SearchResult,
    pub stable: bool,
    pub schedule: Vec<Bounds>,
    /// Set when a round ran out of budget; `result` is then from the round before.
    pub exhausted: Option<Bounds>,
}

/// Runs the search along the schedule until the polynomial is unchanged for
/// `window` consecutive rounds or `max_rounds` rounds have run. Rounds whose
/// atom bound is below the target never count towards stability.
pub fn stabilize(
    prog: &Program,
    target: u64,
    window: usize,
    max_rounds: usize,
    config: &SearchConfig,
) -> Result<Stabilization, SearchError> {
    let window = window.max(1);
    let mut visited = Vec::new();
    let mut last: Option<SearchResult> = None;
    let mut run = 0;
    for bounds in schedule(max_rounds.max(1)) {
        let result = match search(prog, target, bounds, config) {
            Ok(r) => r,
            Err(SearchError::Exhausted(b)) => {
                return match last {
                    Some(result) => Ok(Stabilization { result, stable: false, schedule: visited, exhausted: Some(b) }),
                    None => Err(SearchError::Exhausted(b)),
                };
            }
            Err(e) => return Err(e),
        };
        visited.push(bounds);
        run = match &last {
            _ if u64::from(bounds.p) < target => 0,
            Some(prev) if prev.poly == result.poly => run + 1,
            _ => 1,
        };
        last = Some(result);
        if run >= window {
            break;
        }
    }
    let result = last.expect("at least one round");
    Ok(Stabilization { result, stable: run >= window, schedule: visited, exhausted: None })
}
