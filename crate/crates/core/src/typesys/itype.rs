use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use serde::{Serialize, Serializer};

use crate::lang::SimpleType;

/// Intersection type: an atom or `[a1,…,an] -o b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IType {
    Atom(u64),
    Arrow(MSet, Box<IType>),
}

/// Finite multiset of intersection types, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MSet(Vec<IType>);

impl MSet {
    pub fn new(mut items: Vec<IType>) -> Self {
        items.sort();
        MSet(items)
    }

    pub fn empty() -> Self {
        MSet(Vec::new())
    }

    pub fn singleton(t: IType) -> Self {
        MSet(vec![t])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn elements(&self) -> &[IType] {
        &self.0
    }

    pub fn union(&self, other: &MSet) -> MSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MSet::new(v)
    }

    /// Distinct elements with their multiplicities, in order.
    pub fn counts(&self) -> Vec<(&IType, usize)> {
        let mut out: Vec<(&IType, usize)> = Vec::new();
        for t in &self.0 {
            match out.last_mut() {
                Some((last, c)) if *last == t => *c += 1,
                _ => out.push((t, 1)),
            }
        }
        out
    }
}

impl IType {
    pub fn arrow(m: MSet, r: IType) -> IType {
        IType::Arrow(m, Box::new(r))
    }

    pub fn as_atom(&self) -> Option<u64> {
        match self {
            IType::Atom(n) => Some(*n),
            IType::Arrow(..) => None,
        }
    }
}

impl fmt::Display for MSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for IType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IType::Atom(n) => write!(f, "{n}"),
            IType::Arrow(m, r) => write!(f, "{m}-o {r}"),
        }
    }
}

impl Serialize for IType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Typing context: variables mapped to nonempty multisets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ctx(BTreeMap<Rc<str>, MSet>);

impl Ctx {
    pub fn empty() -> Self {
        Ctx(BTreeMap::new())
    }

    pub fn singleton(x: Rc<str>, t: IType) -> Self {
        Ctx(BTreeMap::from([(x, MSet::singleton(t))]))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, x: &str) -> Option<&MSet> {
        self.0.get(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rc<str>, &MSet)> {
        self.0.iter()
    }

    /// Variable-wise multiset union.
    pub fn sum(&self, other: &Ctx) -> Ctx {
        let mut out = self.0.clone();
        for (x, m) in &other.0 {
            let merged = match out.get(x) {
                Some(prev) => prev.union(m),
                None => m.clone(),
            };
            out.insert(x.clone(), merged);
        }
        Ctx(out)
    }

    /// Removes `x`, returning its multiset (empty if absent).
    pub fn take(&self, x: &str) -> (MSet, Ctx) {
        let mut rest = self.0.clone();
        let m = rest.remove(x).unwrap_or_default();
        (m, Ctx(rest))
    }

    pub fn max_len(&self) -> usize {
        self.0.values().map(MSet::len).max().unwrap_or(0)
    }
}

impl fmt::Display for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, m)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}:{m}")?;
        }
        Ok(())
    }
}

impl Serialize for Ctx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(x, m)| (x.to_string(), m.elements().iter().map(|t| t.to_string()).collect::<Vec<_>>())))
    }
}

/// Shape of the types a search demand asks for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pat {
    Any,
    Atom(u64),
    /// An arrow whose argument multiset is fixed when `Some`.
    Arrow(Option<MSet>, Box<Pat>),
}

impl Pat {
    pub fn exact(t: &IType) -> Pat {
        match t {
            IType::Atom(n) => Pat::Atom(*n),
            IType::Arrow(m, r) => Pat::Arrow(Some(m.clone()), Box::new(Pat::exact(r))),
        }
    }

    pub fn returning(result: Pat) -> Pat {
        Pat::Arrow(None, Box::new(result))
    }

    pub fn matches(&self, t: &IType) -> bool {
        match (self, t) {
            (Pat::Any, _) => true,
            (Pat::Atom(n), IType::Atom(k)) => n == k,
            (Pat::Arrow(m, rp), IType::Arrow(m2, r)) => m.as_ref().is_none_or(|m| m == m2) && rp.matches(r),
            _ => false,
        }
    }
}

impl fmt::Display for Pat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pat::Any => f.write_str("_"),
            Pat::Atom(n) => write!(f, "{n}"),
            Pat::Arrow(Some(m), r) => write!(f, "{m}-o {r}"),
            Pat::Arrow(None, r) => write!(f, "_-o {r}"),
        }
    }
}

/// All multisets of exactly `k` elements drawn from `items`, as index vectors.
pub fn combinations_with_repetition(n_items: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n_items, k, &mut cur, &mut out);
    out
}

/// Refinements of simple types under the bound `p`: Bool atoms are 0 and 1,
/// Nat atoms range over 0..=p, argument multisets have at most `p` elements.
pub struct Refiner {
    p: u32,
    limit: u64,
    cache: BTreeMap<SimpleType, Rc<Vec<IType>>>,
    counts: BTreeMap<SimpleType, u64>,
}

/// Raised when a refinement family is larger than the refiner's limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TooManyRefinements;

/// Number of multisets of at most `k` elements drawn from `n` kinds, saturating.
fn multiset_count(n: u64, k: u32) -> u64 {
    let mut total: u64 = 0;
    let mut term: u128 = 1;
    for j in 0..=k as u128 {
        if j > 0 {
            term = term.saturating_mul(n as u128 + j - 1) / j;
        }
        total = total.saturating_add(term.min(u64::MAX as u128) as u64);
    }
    total
}

impl Refiner {
    pub fn new(p: u32) -> Self {
        Self::with_limit(p, u64::MAX)
    }

    /// A refiner refusing to materialize more than `limit` refinements of one type.
    pub fn with_limit(p: u32, limit: u64) -> Self {
        Refiner { p, limit, cache: BTreeMap::new(), counts: BTreeMap::new() }
    }

    /// Number of refinements of `ty`, saturating at `u64::MAX`.
    pub fn count(&mut self, ty: &SimpleType) -> u64 {
        if let Some(&c) = self.counts.get(ty) {
            return c;
        }
        let c = match ty {
            SimpleType::Bool => 2,
            SimpleType::Nat => self.p as u64 + 1,
            SimpleType::Arrow(a, b) => {
                let args = multiset_count(self.count(a), self.p);
                args.saturating_mul(self.count(b))
            }
        };
        self.counts.insert(ty.clone(), c);
        c
    }

    fn check(&mut self, ty: &SimpleType) -> Result<(), TooManyRefinements> {
        if self.count(ty) > self.limit {
            Err(TooManyRefinements)
        } else {
            Ok(())
        }
    }

    pub fn all(&mut self, ty: &SimpleType) -> Result<Rc<Vec<IType>>, TooManyRefinements> {
        if let Some(v) = self.cache.get(ty) {
            return Ok(v.clone());
        }
        self.check(ty)?;
        let out = match ty {
            SimpleType::Bool => vec![IType::Atom(0), IType::Atom(1)],
            SimpleType::Nat => (0..=self.p as u64).map(IType::Atom).collect(),
            SimpleType::Arrow(a, b) => {
                let ms = self.multisets(a)?;
                let rs = self.all(b)?;
                ms.iter().flat_map(|m| rs.iter().map(move |r| IType::arrow(m.clone(), r.clone()))).collect()
            }
        };
        let out = Rc::new(out);
        self.cache.insert(ty.clone(), out.clone());
        Ok(out)
    }

    fn multisets(&mut self, ty: &SimpleType) -> Result<Vec<MSet>, TooManyRefinements> {
        if multiset_count(self.count(ty), self.p) > self.limit {
            return Err(TooManyRefinements);
        }
        let items = self.all(ty)?;
        Ok((0..=self.p as usize)
            .flat_map(|k| combinations_with_repetition(items.len(), k))
            .map(|ix| MSet::new(ix.into_iter().map(|i| items[i].clone()).collect()))
            .collect())
    }

    /// Refinements of `ty` matching `pat`.
    pub fn instances(&mut self, pat: &Pat, ty: &SimpleType) -> Result<Vec<IType>, TooManyRefinements> {
        Ok(match (pat, ty) {
            (Pat::Any, _) => self.all(ty)?.to_vec(),
            (Pat::Atom(n), SimpleType::Bool) => if *n <= 1 { vec![IType::Atom(*n)] } else { vec![] },
            (Pat::Atom(n), SimpleType::Nat) => if *n <= self.p as u64 { vec![IType::Atom(*n)] } else { vec![] },
            (Pat::Arrow(m, rp), SimpleType::Arrow(a, b)) => {
                let ms = match m {
                    Some(m) if m.len() <= self.p as usize => vec![m.clone()],
                    Some(_) => return Ok(vec![]),
                    None => self.multisets(a)?,
                };
                let rs = self.instances(rp, b)?;
                if (ms.len() as u64).saturating_mul(rs.len() as u64) > self.limit {
                    return Err(TooManyRefinements);
                }
                ms.iter().flat_map(|m| rs.iter().map(move |r| IType::arrow(m.clone(), r.clone()))).collect()
            }
            _ => vec![],
        })
    }
}
