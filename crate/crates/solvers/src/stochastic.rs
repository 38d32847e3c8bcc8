//! Metropolis-Hastings search over derivations of one fixed size at a
//! time, scored by the number of examples a candidate gets wrong.

use std::collections::HashSet;
use std::time::Duration;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use sygus_core::checker::{check_semantic, CheckStrategy, VerificationResult};
use sygus_core::eval::evaluate_with;
use sygus_core::frontend::UnknownFun;
use sygus_core::grammar::{Derivation, Filler, Grammar, Sampler, Template};
use sygus_core::{SynthProblem, Term, Value};

use crate::cegis::{collect_points, constant_pool, count_wrong, count_wrong_pointwise, solution_of, ExampleSet};
use crate::{Deadline, SolveOutcome};

#[derive(Debug, Clone)]
pub struct StochConfig {
    /// Sizes tried in turn, cycling until the budget runs out.
    pub sizes: Vec<usize>,
    pub moves_per_size: usize,
    pub beta: f64,
    pub seed: u64,
    pub budget: Duration,
    pub verifier: CheckStrategy,
}

impl Default for StochConfig {
    fn default() -> Self {
        StochConfig {
            sizes: vec![3, 5, 7, 9, 11],
            moves_per_size: 5000,
            beta: 0.5,
            seed: 0,
            budget: Duration::from_secs(3600),
            verifier: CheckStrategy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutateError {
    #[error("no node of the derivation has an alternative of the same size")]
    NoAlternative,
}

/// `exp(-beta * wrong)`.
pub fn score(wrong: usize, beta: f64) -> f64 {
    (-beta * wrong as f64).exp()
}

/// Number of examples on which `body` (for the only unknown) fails.
pub fn wrong_count(p: &SynthProblem, body: &Term, e: &ExampleSet) -> usize {
    let u = p.unknowns.values().next().expect("one unknown");
    if let Some(points) = collect_points(p, e) {
        let table = &points[u.name.as_str()];
        let sig: Vec<Option<Value>> = table
            .tuples
            .iter()
            .map(|pt| {
                let binds: Vec<(&str, &Value)> = u.params.iter().map(|(n, _)| n.as_str()).zip(pt).collect();
                evaluate_with(body, &binds, &p.defined).ok()
            })
            .collect();
        return count_wrong_pointwise(p, e, &points, &[&sig]);
    }
    match p.substituted_constraints(&solution_of(p, std::slice::from_ref(body))) {
        Ok(cs) => count_wrong(p, &cs, e),
        Err(_) => e.len(),
    }
}

/// One entry per term node: the path of the derivation that a mutation at
/// that node replaces.
fn node_owners(g: &Grammar, d: &Derivation) -> Vec<Vec<usize>> {
    fn walk(g: &Grammar, d: &Derivation, path: &mut Vec<usize>, root_owner: Option<Vec<usize>>, out: &mut Vec<Vec<usize>>) {
        let owner = root_owner.unwrap_or_else(|| path.clone());
        let t = &g.nonterminal(d.nt).productions[d.prod].template;
        let mut slot = 0;
        visit(g, d, t, true, &owner, path, &mut slot, out);
    }
    #[allow(clippy::too_many_arguments)]
    fn visit(
        g: &Grammar,
        d: &Derivation,
        t: &Template,
        at_root: bool,
        owner: &[usize],
        path: &mut Vec<usize>,
        slot: &mut usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        let here = if at_root { owner.to_vec() } else { path.clone() };
        match t {
            Template::NonTerminal(_) => {
                let i = *slot;
                *slot += 1;
                if let Filler::Sub(sub) = &d.fillers[i] {
                    path.push(i);
                    walk(g, sub, path, at_root.then(|| owner.to_vec()), out);
                    path.pop();
                }
            }
            Template::Constant(_) => {
                *slot += 1;
                out.push(here);
            }
            Template::Var(_) | Template::Lit(_) => out.push(here),
            Template::App(_, args) => {
                out.push(here);
                for a in args {
                    visit(g, d, a, false, owner, path, slot, out);
                }
            }
            Template::Let(bs, body) => {
                out.push(here);
                for (_, b) in bs {
                    out.push(path.clone());
                    visit(g, d, b, false, owner, path, slot, out);
                }
                visit(g, d, body, false, owner, path, slot, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(g, d, &mut Vec::new(), None, &mut out);
    out
}

/// Picks a term node uniformly and resamples the derivation owning it at
/// the same nonterminal and size.
pub fn mutate<R: Rng + ?Sized>(d: &Derivation, sampler: &Sampler, rng: &mut R) -> Result<Derivation, MutateError> {
    let owners = node_owners(sampler.grammar(), d);
    let path = &owners[rng.gen_range(0..owners.len())];
    let sub = d.at(path);
    if sampler.count(sub.nt, sub.size) <= 1u32.into() {
        return Err(MutateError::NoAlternative);
    }
    let fresh = sampler.sample(sub.nt, sub.size, rng).ok_or(MutateError::NoAlternative)?;
    Ok(d.replaced(path, fresh))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepEvent {
    pub proposed: Term,
    pub current_wrong: usize,
    pub proposed_wrong: usize,
    pub accept_prob: f64,
    pub accepted: bool,
}

/// A chain over derivations of one size for the problem's only unknown.
pub struct Walk<'a> {
    p: &'a SynthProblem,
    sampler: Sampler<'a>,
    beta: f64,
    current: Derivation,
    term: Term,
    wrong: usize,
}

impl<'a> Walk<'a> {
    /// `None` if the grammar derives nothing of `size`, or has a chain-rule
    /// cycle.
    pub fn new<R: Rng + ?Sized>(
        p: &'a SynthProblem,
        size: usize,
        pool: Vec<Value>,
        beta: f64,
        e: &ExampleSet,
        rng: &mut R,
    ) -> Option<Walk<'a>> {
        let u = only_unknown(p)?;
        let sampler = Sampler::new(&u.grammar, pool, size).ok()?;
        let current = sampler.sample(u.grammar.start(), size, rng)?;
        let term = current.term(&u.grammar);
        let wrong = wrong_count(p, &term, e);
        Some(Walk { p, sampler, beta, current, term, wrong })
    }

    pub fn current(&self) -> &Term {
        &self.term
    }

    pub fn wrong(&self) -> usize {
        self.wrong
    }

    /// Swaps in a larger constant pool and rescores under `e`.
    pub fn refresh(&mut self, pool: Vec<Value>, e: &ExampleSet) {
        let g = self.sampler.grammar();
        if let Ok(s) = Sampler::new(g, pool, self.current.size) {
            self.sampler = s;
        }
        self.wrong = wrong_count(self.p, &self.term, e);
    }

    /// Treats the current candidate as wrong everywhere, pushing the walk on.
    pub fn penalize(&mut self, e: &ExampleSet) {
        self.wrong = e.len() + 1;
    }

    /// One proposal. `NoAlternative` leaves the state unchanged.
    pub fn step<R: Rng + ?Sized>(&mut self, e: &ExampleSet, rng: &mut R) -> Result<StepEvent, MutateError> {
        let next = mutate(&self.current, &self.sampler, rng)?;
        let term = next.term(self.sampler.grammar());
        let proposed_wrong = wrong_count(self.p, &term, e);
        let delta = proposed_wrong as f64 - self.wrong as f64;
        let accept_prob = score(proposed_wrong, self.beta) / score(self.wrong, self.beta);
        let accept_prob = if delta <= 0.0 { 1.0 } else { accept_prob.min(1.0) };
        let accepted = accept_prob >= 1.0 || rng.gen::<f64>() < accept_prob;
        let event = StepEvent { proposed: term.clone(), current_wrong: self.wrong, proposed_wrong, accept_prob, accepted };
        if accepted {
            self.current = next;
            self.term = term;
            self.wrong = proposed_wrong;
        }
        Ok(event)
    }
}

fn only_unknown(p: &SynthProblem) -> Option<&UnknownFun> {
    match p.unknowns.len() {
        1 => p.unknowns.values().next(),
        _ => None,
    }
}

pub fn solve_stochastic(p: &SynthProblem, cfg: &StochConfig) -> SolveOutcome {
    solve_stochastic_traced(p, cfg, &Deadline::new(cfg.budget)).0
}

/// Runs the walk schedule; also returns every candidate sent to the
/// verifier, in order.
pub fn solve_stochastic_traced(p: &SynthProblem, cfg: &StochConfig, deadline: &Deadline) -> (SolveOutcome, Vec<Term>) {
    let mut trace = Vec::new();
    let Some(u) = only_unknown(p) else {
        return (SolveOutcome::Unsupported("stochastic search handles exactly one unknown".into()), trace);
    };
    if let Err(e) = Sampler::new(&u.grammar, Vec::new(), 1) {
        return (SolveOutcome::Unsupported(e.to_string()), trace);
    }
    let max_size = cfg.sizes.iter().copied().max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut e = ExampleSet::new();
    let mut rejected: HashSet<Term> = HashSet::new();
    let mut any_walk = false;
    for (round, &size) in cfg.sizes.iter().cycle().enumerate() {
        if round > 0 && round % cfg.sizes.len() == 0 && !any_walk {
            return (SolveOutcome::Exhausted { max_size }, trace);
        }
        let Some(mut walk) = Walk::new(p, size, constant_pool(p, &e), cfg.beta, &e, &mut rng) else {
            continue;
        };
        any_walk = true;
        for _ in 0..cfg.moves_per_size {
            if deadline.expired() {
                return (SolveOutcome::TimedOut { budget: deadline.budget() }, trace);
            }
            if walk.wrong() == 0 {
                if rejected.contains(walk.current()) {
                    walk.penalize(&e);
                } else {
                    let body = walk.current().clone();
                    trace.push(body.clone());
                    let solution = solution_of(p, std::slice::from_ref(&body));
                    match check_semantic(p, &solution, &cfg.verifier) {
                        Ok(VerificationResult::Valid(_)) => {
                            let sizes = vec![body.size()];
                            return (SolveOutcome::Solved { solution, elapsed: deadline.elapsed(), sizes }, trace);
                        }
                        Ok(VerificationResult::CounterExample { valuation, .. }) => {
                            if e.push(valuation) {
                                walk.refresh(constant_pool(p, &e), &e);
                            } else {
                                rejected.insert(body);
                                walk.penalize(&e);
                            }
                        }
                        Ok(VerificationResult::Unknown(reason)) => {
                            log::warn!("stochastic: verifier gave no verdict ({reason:?}); skipping candidate");
                            rejected.insert(body);
                            walk.penalize(&e);
                        }
                        Err(err) => return (SolveOutcome::Unsupported(err.to_string()), trace),
                    }
                }
            }
            // A proposal with no alternative still uses up a move.
            let _ = walk.step(&e, &mut rng);
        }
    }
    unreachable!("the size schedule cycles forever")
}
