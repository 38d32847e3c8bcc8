use std::collections::HashSet;

use super::{Grammar, GrammarError, Slot};
use crate::term::Term;
use crate::value::Value;

/// Every term of exactly `size` nodes derivable from `nt`, with each
/// `(Constant S)` hole ranging over the values of sort S in `pool`.
///
/// Order is deterministic: productions in declaration order (chain rules
/// after the others), then lexicographic child-size splits, then children
/// in their own enumeration order. Duplicates are removed.
pub fn enumerate(g: &Grammar, nt: &str, size: usize, pool: &[Value]) -> Result<Vec<Term>, GrammarError> {
    let idx = g.index_of(nt)?;
    let mut e = Enumerator::new(g, pool.to_vec());
    Ok(e.terms(idx, size).to_vec())
}

/// Size-indexed enumeration with a per-(nonterminal, size) cache.
pub struct Enumerator<'g> {
    g: &'g Grammar,
    pool: Vec<Value>,
    /// `cache[size][nt]`; index 0 is always empty.
    cache: Vec<Vec<Vec<Term>>>,
}

impl<'g> Enumerator<'g> {
    pub fn new(g: &'g Grammar, pool: Vec<Value>) -> Self {
        let empty = vec![Vec::new(); g.nonterminals().len()];
        Enumerator { g, pool, cache: vec![empty] }
    }

    pub fn terms(&mut self, nt: usize, size: usize) -> &[Term] {
        while self.cache.len() <= size {
            let n = self.cache.len();
            let level = self.build_level(n);
            self.cache.push(level);
        }
        &self.cache[size][nt]
    }

    fn build_level(&self, n: usize) -> Vec<Vec<Term>> {
        let g = self.g;
        let count = g.nonterminals().len();
        // Non-chain productions only use strictly smaller children.
        let direct: Vec<Vec<Term>> = (0..count)
            .map(|a| {
                let mut out = Vec::new();
                let mut seen = HashSet::new();
                for p in &g.nonterminal(a).productions {
                    if p.unit_target().is_some() {
                        continue;
                    }
                    self.expand(p, n, &mut |t| {
                        if seen.insert(t.clone()) {
                            out.push(t);
                        }
                    });
                }
                out
            })
            .collect();
        // Chain rules see same-size terms; iterate to a fixpoint.
        let mut level = direct;
        loop {
            let mut changed = false;
            for a in 0..count {
                let mut seen: HashSet<Term> = level[a].iter().cloned().collect();
                for p in &g.nonterminal(a).productions {
                    if let Some(b) = p.unit_target() {
                        let extra: Vec<Term> = level[b].clone();
                        for t in extra {
                            if seen.insert(t.clone()) {
                                level[a].push(t);
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                return level;
            }
        }
    }

    fn expand(&self, p: &super::Production, n: usize, emit: &mut dyn FnMut(Term)) {
        if n < p.cost() {
            return;
        }
        let g = self.g;
        let slots = p.slots();
        for split in size_splits(slots, n - p.cost(), &|s| match s {
            Slot::Hole(_) => Some(1),
            Slot::NonTerminal(b) => g.min_size_of(b),
        }) {
            let choices: Vec<Vec<Term>> = slots
                .iter()
                .zip(&split)
                .map(|(s, &k)| match s {
                    Slot::NonTerminal(b) => self.cache[k][*b].clone(),
                    Slot::Hole(sort) => {
                        self.pool.iter().filter(|v| v.sort() == *sort).cloned().map(Term::lit).collect()
                    }
                })
                .collect();
            for_each_product(&choices, &mut |picked| {
                emit(p.template.instantiate(&mut picked.iter().map(|t| (*t).clone())));
            });
        }
    }
}

/// All ways to give each slot a size so that sizes sum to `total`, in
/// lexicographic order. Holes always take size 1; `min` bounds the rest
/// (`None` = unproductive, no splits).
pub fn size_splits(slots: &[Slot], total: usize, min: &dyn Fn(Slot) -> Option<usize>) -> Vec<Vec<usize>> {
    let mins: Option<Vec<usize>> = slots.iter().map(|s| min(*s)).collect();
    let Some(mins) = mins else { return Vec::new() };
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(slots.len());
    split_rec(slots, &mins, total, &mut cur, &mut out);
    out
}

fn split_rec(slots: &[Slot], mins: &[usize], remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let i = cur.len();
    if i == slots.len() {
        if remaining == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let rest_min: usize = mins[i + 1..].iter().sum();
    if remaining < mins[i] + rest_min {
        return;
    }
    let hi = match slots[i] {
        Slot::Hole(_) => 1,
        Slot::NonTerminal(_) => remaining - rest_min,
    };
    for k in mins[i]..=hi {
        cur.push(k);
        split_rec(slots, mins, remaining - k, cur, out);
        cur.pop();
    }
}

/// Calls `f` on every element of the Cartesian product, first list slowest.
pub fn for_each_product<T>(lists: &[Vec<T>], f: &mut dyn FnMut(&[&T])) {
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; lists.len()];
    loop {
        let picked: Vec<&T> = lists.iter().zip(&idx).map(|(l, &i)| &l[i]).collect();
        f(&picked);
        let mut k = lists.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}
