use std::collections::{BTreeSet, HashMap};

use serde_json::{json, Value};

use super::deriv::TropDerivation;
use super::search::SearchResult;
use crate::algebra::{FormalPolynomial, Monomial};

type Support = BTreeSet<Monomial>;

struct Replayer {
    dim: usize,
    params: u32,
    memo: HashMap<(*const TropDerivation, usize), Support>,
}

impl Replayer {
    fn entry(&mut self, d: &TropDerivation, idx: usize) -> Support {
        let key = (d as *const TropDerivation, idx);
        if let Some(s) = self.memo.get(&key) {
            return s.clone();
        }
        let mut out = Support::new();
        for src in &d.entries[idx].sources {
            let mut acc: Support = BTreeSet::from([match src.factor {
                Some((i, right)) => Monomial::param(self.params, i, right),
                None => Monomial::one(self.dim),
            }]);
            for &(p, e) in &src.parts {
                let part = self.entry(&d.premises[p], e);
                acc = acc.iter().flat_map(|a| part.iter().map(move |b| a.times(b))).collect();
                if acc.is_empty() {
                    break;
                }
            }
            out.extend(acc);
        }
        self.memo.insert(key, out.clone());
        out
    }
}

/// Unminimized support of entry `idx`: every product and sum of the derivation
/// is replayed in full.
pub fn traj_poly(d: &TropDerivation, idx: usize, params: u32) -> FormalPolynomial {
    let dim = 2 * params as usize;
    let mut r = Replayer { dim, params, memo: HashMap::new() };
    FormalPolynomial::all_one(dim, r.entry(d, idx))
}

/// Unminimized support of the search conclusion.
pub fn traj_root(result: &SearchResult, params: u32) -> FormalPolynomial {
    let dim = 2 * params as usize;
    let mut r = Replayer { dim, params, memo: HashMap::new() };
    let mut all = Support::new();
    for idx in result.root_entries() {
        all.extend(r.entry(&result.derivation, idx));
    }
    FormalPolynomial::all_one(dim, all)
}

/// Derivation as nested JSON. Shared subderivations after their first
/// occurrence are written as `{"ref": id}`.
pub fn derivation_json(d: &TropDerivation) -> Value {
    fn go(d: &TropDerivation, ids: &mut HashMap<*const TropDerivation, usize>) -> Value {
        let ptr = d as *const TropDerivation;
        if let Some(id) = ids.get(&ptr) {
            return json!({ "ref": id });
        }
        let id = ids.len();
        ids.insert(ptr, id);
        let entries: Vec<Value> = d
            .entries
            .iter()
            .map(|e| {
                let traces: serde_json::Map<String, Value> =
                    e.traces.iter().map(|(m, w)| (m.to_string(), Value::String(w.bit_string()))).collect();
                json!({
                    "context": e.ctx,
                    "itype": e.ty,
                    "uses": e.uses,
                    "poly": e.poly.to_string(),
                    "traces": traces,
                })
            })
            .collect();
        let premises: Vec<Value> = d.premises.iter().map(|p| go(p, ids)).collect();
        json!({
            "id": id,
            "rule": d.rule,
            "subject": d.subject.to_string(),
            "pattern": d.pattern.to_string(),
            "conclusion": { "entries": entries },
            "premises": premises,
        })
    }
    go(d, &mut HashMap::new())
}
