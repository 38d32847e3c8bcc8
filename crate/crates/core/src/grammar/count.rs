//! Derivation counting and uniform sampling of derivations of exact size.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use super::enumerate::size_splits;
use super::{Grammar, Production, Slot};
use crate::term::Term;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    /// Chain rules forming a cycle give infinitely many derivations per size.
    #[error("chain rules form a cycle through `{0}`")]
    UnitCycle(String),
}

/// A derivation tree: which production was used at each nonterminal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub nt: usize,
    pub prod: usize,
    pub size: usize,
    pub fillers: Vec<Filler>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Filler {
    Sub(Derivation),
    Const(Value),
}

impl Derivation {
    pub fn term(&self, g: &Grammar) -> Term {
        let parts: Vec<Term> = self
            .fillers
            .iter()
            .map(|f| match f {
                Filler::Sub(d) => d.term(g),
                Filler::Const(v) => Term::lit(v.clone()),
            })
            .collect();
        g.nonterminal(self.nt).productions[self.prod].template.instantiate(&mut parts.into_iter())
    }

    /// Sub-derivation at `path` (indices into `fillers`).
    pub fn at(&self, path: &[usize]) -> &Derivation {
        path.iter().fold(self, |d, &i| match &d.fillers[i] {
            Filler::Sub(s) => s,
            Filler::Const(_) => panic!("path runs through a constant"),
        })
    }

    /// Returns a copy with the sub-derivation at `path` replaced.
    pub fn replaced(&self, path: &[usize], with: Derivation) -> Derivation {
        match path.split_first() {
            None => with,
            Some((&i, rest)) => {
                let mut out = self.clone();
                match &mut out.fillers[i] {
                    Filler::Sub(s) => *s = s.replaced(rest, with),
                    Filler::Const(_) => panic!("path runs through a constant"),
                }
                out
            }
        }
    }
}

/// Exact derivation counts per (nonterminal, size) up to a bound, and
/// uniform sampling over the derivations they count.
pub struct Sampler<'g> {
    g: &'g Grammar,
    pool: Vec<Value>,
    /// `prod_counts[size][nt][prod]`.
    prod_counts: Vec<Vec<Vec<BigUint>>>,
    counts: Vec<Vec<BigUint>>,
}

impl<'g> Sampler<'g> {
    pub fn new(g: &'g Grammar, pool: Vec<Value>, max_size: usize) -> Result<Self, SamplerError> {
        let order = unit_order(g)?;
        let n_nt = g.nonterminals().len();
        let mut s = Sampler {
            g,
            pool,
            prod_counts: vec![vec![Vec::new(); n_nt]],
            counts: vec![vec![BigUint::zero(); n_nt]],
        };
        for n in 1..=max_size {
            let mut level_prod: Vec<Vec<BigUint>> =
                (0..n_nt).map(|a| vec![BigUint::zero(); g.nonterminal(a).productions.len()]).collect();
            let mut level: Vec<BigUint> = vec![BigUint::zero(); n_nt];
            for &a in &order {
                for (pi, p) in g.nonterminal(a).productions.iter().enumerate() {
                    let c = match p.unit_target() {
                        Some(b) => level[b].clone(),
                        None => s.production_count(p, n),
                    };
                    level[a] += &c;
                    level_prod[a][pi] = c;
                }
            }
            s.prod_counts.push(level_prod);
            s.counts.push(level);
        }
        Ok(s)
    }

    pub fn max_size(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn grammar(&self) -> &'g Grammar {
        self.g
    }

    /// Number of derivations of exactly `size` nodes from `nt`.
    pub fn count(&self, nt: usize, size: usize) -> BigUint {
        self.counts.get(size).map(|l| l[nt].clone()).unwrap_or_default()
    }

    fn hole_count(&self, sort: crate::value::Sort) -> usize {
        self.pool.iter().filter(|v| v.sort() == sort).count()
    }

    fn slot_count(&self, s: Slot, k: usize) -> BigUint {
        match s {
            Slot::Hole(sort) => BigUint::from(self.hole_count(sort)),
            Slot::NonTerminal(b) => self.counts[k][b].clone(),
        }
    }

    fn splits(&self, p: &Production, n: usize) -> Vec<Vec<usize>> {
        if n < p.cost() {
            return Vec::new();
        }
        let g = self.g;
        size_splits(p.slots(), n - p.cost(), &|s| match s {
            Slot::Hole(_) => Some(1),
            Slot::NonTerminal(b) => g.min_size_of(b),
        })
    }

    fn split_weight(&self, p: &Production, split: &[usize]) -> BigUint {
        p.slots()
            .iter()
            .zip(split)
            .fold(BigUint::one(), |acc, (s, &k)| acc * self.slot_count(*s, k))
    }

    fn production_count(&self, p: &Production, n: usize) -> BigUint {
        self.splits(p, n).iter().map(|sp| self.split_weight(p, sp)).sum()
    }

    /// Uniformly random derivation of exactly `size` nodes from `nt`, or
    /// `None` if there is none (or `size` exceeds the precomputed bound).
    pub fn sample<R: Rng + ?Sized>(&self, nt: usize, size: usize, rng: &mut R) -> Option<Derivation> {
        if size == 0 || size > self.max_size() {
            return None;
        }
        let total = &self.counts[size][nt];
        if total.is_zero() {
            return None;
        }
        let mut pick = rng.gen_biguint_below(total);
        let prods = &self.prod_counts[size][nt];
        let mut chosen = 0;
        for (pi, c) in prods.iter().enumerate() {
            if pick < *c {
                chosen = pi;
                break;
            }
            pick -= c;
        }
        let p = &self.g.nonterminal(nt).productions[chosen];
        if let Some(b) = p.unit_target() {
            let inner = self.sample(b, size, rng)?;
            return Some(Derivation { nt, prod: chosen, size, fillers: vec![Filler::Sub(inner)] });
        }
        // Choose a size split with probability proportional to its weight.
        let mut pick = rng.gen_biguint_below(&prods[chosen]);
        let splits = self.splits(p, size);
        let mut split = splits.last().cloned().unwrap_or_default();
        for sp in &splits {
            let w = self.split_weight(p, sp);
            if pick < w {
                split = sp.clone();
                break;
            }
            pick -= w;
        }
        let mut fillers = Vec::with_capacity(split.len());
        for (s, &k) in p.slots().iter().zip(&split) {
            fillers.push(match *s {
                Slot::Hole(sort) => {
                    let choices: Vec<&Value> = self.pool.iter().filter(|v| v.sort() == sort).collect();
                    Filler::Const(choices[rng.gen_range(0..choices.len())].clone())
                }
                Slot::NonTerminal(b) => Filler::Sub(self.sample(b, k, rng)?),
            });
        }
        Some(Derivation { nt, prod: chosen, size, fillers })
    }
}

/// Nonterminals ordered so that chain-rule targets come before sources.
fn unit_order(g: &Grammar) -> Result<Vec<usize>, SamplerError> {
    let n = g.nonterminals().len();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut order = Vec::with_capacity(n);
    fn visit(g: &Grammar, a: usize, state: &mut [u8], order: &mut Vec<usize>) -> Result<(), SamplerError> {
        match state[a] {
            2 => return Ok(()),
            1 => return Err(SamplerError::UnitCycle(g.nonterminal(a).name.clone())),
            _ => {}
        }
        state[a] = 1;
        for p in &g.nonterminal(a).productions {
            if let Some(b) = p.unit_target() {
                visit(g, b, state, order)?;
            }
        }
        state[a] = 2;
        order.push(a);
        Ok(())
    }
    for a in 0..n {
        visit(g, a, &mut state, &mut order)?;
    }
    Ok(order)
}
