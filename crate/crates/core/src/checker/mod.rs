//! Solution checking: grammar adherence first, then semantic validity by
//! bounded evaluation or an external SMT solver.

mod features;
mod smtlib;

pub use features::{classify_features, FeatureSet, Invocation};
pub use smtlib::{emit_smtlib, parse_model, run_smt, SmtAnswer};

use std::collections::BTreeMap;
use std::time::Duration;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eval::evaluate;
use crate::frontend::{CandidateSolution, FrontendError, SynthProblem};
use crate::grammar::derives;
use crate::term::Term;
use crate::value::{Sort, Valuation, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error("no SMT-LIB logic for `{0}`")]
    UnsupportedLogic(String),
}

/// How much a `Valid` verdict is worth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assurance {
    /// Certified by an SMT solver, or by evaluation over the entire domain.
    Proved,
    /// Held on every point tried, but the points did not cover the domain.
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownReason {
    Budget,
    ExternalSolverUnavailable(String),
    ExternalSolverUnknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerificationResult {
    Valid(Assurance),
    /// `constraint` indexes the problem's constraints.
    CounterExample { valuation: Valuation, constraint: usize },
    Unknown(UnknownReason),
}

impl VerificationResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, VerificationResult::Valid(_))
    }

    /// Short label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            VerificationResult::Valid(Assurance::Proved) => "valid",
            VerificationResult::Valid(Assurance::Bounded) => "valid-on-budget",
            VerificationResult::CounterExample { .. } => "counterexample",
            VerificationResult::Unknown(_) => "unknown",
        }
    }
}

/// Finite evaluation domains for the universals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub int_lo: i64,
    pub int_hi: i64,
    /// Bit-vectors up to this width are enumerated completely; wider ones
    /// are sampled.
    pub max_exhaustive_bv_width: u32,
    /// Explicit value lists for particular variables.
    pub overrides: BTreeMap<String, Vec<Value>>,
    /// Largest grid evaluated exhaustively for one constraint; bigger
    /// grids are sampled with `fallback_samples` points instead.
    pub max_points: usize,
    pub fallback_samples: usize,
    pub fallback_seed: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            int_lo: -8,
            int_hi: 8,
            max_exhaustive_bv_width: 10,
            overrides: BTreeMap::new(),
            max_points: 200_000,
            fallback_samples: 20_000,
            fallback_seed: 0,
        }
    }
}

impl Bounds {
    pub fn int_range(lo: i64, hi: i64) -> Self {
        Bounds { int_lo: lo, int_hi: hi, ..Bounds::default() }
    }

    pub fn with_override(mut self, var: &str, values: Vec<Value>) -> Self {
        self.overrides.insert(var.to_string(), values);
        self
    }

    /// Every value of `var`, or `None` if it must be sampled.
    fn grid(&self, var: &str, sort: Sort) -> Option<(Vec<Value>, bool)> {
        if let Some(vs) = self.overrides.get(var) {
            return Some((vs.clone(), false));
        }
        match sort {
            Sort::Bool => Some((vec![Value::Bool(false), Value::Bool(true)], true)),
            Sort::Int => Some(((self.int_lo..=self.int_hi).map(Value::int).collect(), false)),
            Sort::BitVec(w) if w <= self.max_exhaustive_bv_width => {
                Some(((0..1u64 << w).map(|b| Value::bv(w, b)).collect(), true))
            }
            Sort::BitVec(_) => None,
        }
    }

    fn sample<R: Rng>(&self, var: &str, sort: Sort, rng: &mut R) -> Value {
        if let Some(vs) = self.overrides.get(var) {
            return vs[rng.gen_range(0..vs.len())].clone();
        }
        match sort {
            Sort::Bool => Value::Bool(rng.gen()),
            Sort::Int => Value::int(rng.gen_range(self.int_lo..=self.int_hi)),
            Sort::BitVec(w) => Value::bv(w, rng.gen()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStrategy {
    ExhaustiveSmall(Bounds),
    RandomSample { count: usize, seed: u64, bounds: Bounds },
    /// `command` is split on whitespace; the script goes to its stdin.
    ExternalSmt { command: String, timeout: Duration },
    Layered(Vec<CheckStrategy>),
}

impl Default for CheckStrategy {
    fn default() -> Self {
        CheckStrategy::ExhaustiveSmall(Bounds::default())
    }
}

/// Grammar adherence of each unknown's body, in the problem's order.
/// An unknown without a definition is reported as `false`.
pub fn check_syntactic(p: &SynthProblem, s: &CandidateSolution) -> IndexMap<String, bool> {
    p.unknowns
        .values()
        .map(|u| {
            let ok = s
                .get(&u.name)
                .map(|d| derives(&u.grammar, u.grammar.start_name(), &d.body).unwrap_or(false))
                .unwrap_or(false);
            (u.name.clone(), ok)
        })
        .collect()
}

/// Checks the substituted constraints under `strat`.
pub fn check_semantic(
    p: &SynthProblem,
    s: &CandidateSolution,
    strat: &CheckStrategy,
) -> Result<VerificationResult, CheckError> {
    let constraints = p.substituted_constraints(s)?;
    check_constraints(p, &constraints, strat)
}

/// Like [`check_semantic`] on constraints the caller already substituted.
pub fn check_constraints(
    p: &SynthProblem,
    constraints: &[Term],
    strat: &CheckStrategy,
) -> Result<VerificationResult, CheckError> {
    Ok(match strat {
        CheckStrategy::ExhaustiveSmall(b) => exhaustive(p, constraints, b),
        CheckStrategy::RandomSample { count, seed, bounds } => random(p, constraints, bounds, *count, *seed),
        CheckStrategy::ExternalSmt { command, timeout } => external(p, constraints, command, *timeout)?,
        CheckStrategy::Layered(stages) => {
            let mut fallback = VerificationResult::Unknown(UnknownReason::Budget);
            let mut bounded = false;
            for st in stages {
                match check_constraints(p, constraints, st)? {
                    r @ (VerificationResult::CounterExample { .. } | VerificationResult::Valid(Assurance::Proved)) => {
                        return Ok(r)
                    }
                    VerificationResult::Valid(Assurance::Bounded) => bounded = true,
                    u @ VerificationResult::Unknown(_) => fallback = u,
                }
            }
            if bounded {
                VerificationResult::Valid(Assurance::Bounded)
            } else {
                fallback
            }
        }
    })
}

/// True if constraint `t` fails at `v`. Evaluation errors count as failure.
pub fn falsifies(p: &SynthProblem, t: &Term, v: &Valuation) -> bool {
    !matches!(evaluate(t, v, &p.defined), Ok(Value::Bool(true)))
}

/// Index of the first constraint `v` falsifies.
pub fn first_violation(p: &SynthProblem, constraints: &[Term], v: &Valuation) -> Option<usize> {
    constraints.iter().position(|c| falsifies(p, c, v))
}

/// A valuation of every universal at its sort's default value.
pub fn default_valuation(p: &SynthProblem) -> Valuation {
    p.universals.iter().map(|(n, s)| (n.clone(), Value::default_of(*s))).collect()
}

fn exhaustive(p: &SynthProblem, constraints: &[Term], b: &Bounds) -> VerificationResult {
    let mut complete = true;
    for (k, c) in constraints.iter().enumerate() {
        let fv = c.free_vars();
        let vars: Vec<(String, Sort)> = p
            .universals
            .iter()
            .filter(|(n, _)| fv.contains(*n))
            .map(|(n, s)| (n.clone(), *s))
            .collect();
        let grids: Option<Vec<(Vec<Value>, bool)>> = vars.iter().map(|(n, s)| b.grid(n, *s)).collect();
        let points = grids
            .as_ref()
            .map(|g| g.iter().try_fold(1usize, |acc, (vs, _)| acc.checked_mul(vs.len())));
        let mut base = default_valuation(p);
        match (grids, points) {
            (Some(grids), Some(Some(n))) if n <= b.max_points => {
                complete &= grids.iter().all(|(_, full)| *full);
                let lists: Vec<Vec<Value>> = grids.into_iter().map(|(vs, _)| vs).collect();
                let mut found = None;
                crate::grammar::for_each_product(&lists, &mut |vals: &[&Value]| {
                    if found.is_some() {
                        return;
                    }
                    for ((n, _), v) in vars.iter().zip(vals) {
                        base.insert(n.clone(), (*v).clone());
                    }
                    if falsifies(p, c, &base) {
                        found = Some(base.clone());
                    }
                });
                if let Some(valuation) = found {
                    return VerificationResult::CounterExample { valuation, constraint: k };
                }
            }
            _ => {
                complete = false;
                let mut rng = ChaCha8Rng::seed_from_u64(b.fallback_seed ^ k as u64);
                for _ in 0..b.fallback_samples {
                    for (n, s) in &vars {
                        base.insert(n.clone(), b.sample(n, *s, &mut rng));
                    }
                    if falsifies(p, c, &base) {
                        return VerificationResult::CounterExample { valuation: base, constraint: k };
                    }
                }
            }
        }
    }
    VerificationResult::Valid(if complete { Assurance::Proved } else { Assurance::Bounded })
}

fn random(p: &SynthProblem, constraints: &[Term], b: &Bounds, count: usize, seed: u64) -> VerificationResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = default_valuation(p);
    for _ in 0..count {
        for (n, s) in &p.universals {
            v.insert(n.clone(), b.sample(n, *s, &mut rng));
        }
        if let Some(k) = first_violation(p, constraints, &v) {
            return VerificationResult::CounterExample { valuation: v, constraint: k };
        }
    }
    VerificationResult::Valid(Assurance::Bounded)
}

fn external(p: &SynthProblem, constraints: &[Term], command: &str, timeout: Duration) -> Result<VerificationResult, CheckError> {
    let script = smtlib::script(p, constraints)?;
    Ok(match run_smt(command, &script, timeout) {
        Err(reason) => VerificationResult::Unknown(reason),
        Ok(SmtAnswer::Unsat) => VerificationResult::Valid(Assurance::Proved),
        Ok(SmtAnswer::Unknown(why)) => VerificationResult::Unknown(UnknownReason::ExternalSolverUnknown(why)),
        Ok(SmtAnswer::Sat(model)) => {
            let mut v = default_valuation(p);
            v.extend(model.into_iter().filter(|(n, _)| p.universals.contains_key(n)));
            // Only report what evaluation confirms.
            match first_violation(p, constraints, &v) {
                Some(k) => VerificationResult::CounterExample { valuation: v, constraint: k },
                None => VerificationResult::Unknown(UnknownReason::ExternalSolverUnknown(
                    "model does not falsify any constraint".into(),
                )),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_problem_str, parse_solution};

    const MAX2: &str = "(set-logic LIA) (synth-fun max2 ((x Int) (y Int)) Int) (declare-var x Int) (declare-var y Int)
        (constraint (>= (max2 x y) x)) (constraint (>= (max2 x y) y))
        (constraint (or (= x (max2 x y)) (or (= y (max2 x y))))) (check-synth)";

    fn sol(p: &SynthProblem, body: &str) -> CandidateSolution {
        parse_solution(&format!("(define-fun max2 ((x Int) (y Int)) Int {body})"), p).unwrap()
    }

    #[test]
    fn max2_exhaustive() {
        let p = parse_problem_str(MAX2).unwrap();
        let good = sol(&p, "(ite (>= x y) x y)");
        assert_eq!(check_syntactic(&p, &good)["max2"], true);
        let r = check_semantic(&p, &good, &CheckStrategy::default()).unwrap();
        assert_eq!(r, VerificationResult::Valid(Assurance::Bounded));
        let bad = sol(&p, "x");
        match check_semantic(&p, &bad, &CheckStrategy::default()).unwrap() {
            VerificationResult::CounterExample { valuation, constraint } => {
                assert_eq!(constraint, 1);
                assert!(valuation["y"].as_int() > valuation["x"].as_int());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_sampling_is_deterministic() {
        let p = parse_problem_str(MAX2).unwrap();
        let bad = sol(&p, "(+ x 1)");
        let strat = CheckStrategy::RandomSample { count: 100, seed: 3, bounds: Bounds::default() };
        let a = check_semantic(&p, &bad, &strat).unwrap();
        let b = check_semantic(&p, &bad, &strat).unwrap();
        assert_eq!(a, b);
        assert!(matches!(a, VerificationResult::CounterExample { constraint: 1 | 2, .. }));
    }

    #[test]
    fn full_bitvector_domain_is_proof() {
        let text = "(set-logic BV) (synth-fun f ((x (BitVec 4))) (BitVec 4) ((Start (BitVec 4) (x (bvnot Start)))))
            (declare-var x (BitVec 4)) (constraint (= (f (f x)) x)) (check-synth)";
        let p = parse_problem_str(text).unwrap();
        let s = parse_solution("(define-fun f ((x (BitVec 4))) (BitVec 4) (bvnot x))", &p).unwrap();
        assert_eq!(check_semantic(&p, &s, &CheckStrategy::default()).unwrap(), VerificationResult::Valid(Assurance::Proved));
    }

    #[test]
    fn division_by_zero_falsifies() {
        let text = "(set-logic LIA) (synth-fun f ((x Int)) Int) (declare-var x Int)
            (constraint (>= (f x) 0)) (check-synth)";
        let p = parse_problem_str(text).unwrap();
        let s = parse_solution("(define-fun f ((x Int)) Int (div 1 x))", &p).unwrap();
        match check_semantic(&p, &s, &CheckStrategy::default()).unwrap() {
            VerificationResult::CounterExample { valuation, .. } => assert!(valuation["x"].as_int().unwrap() <= &0.into()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn layered_stops_at_counterexample_and_keeps_bounded() {
        let p = parse_problem_str(MAX2).unwrap();
        let missing = CheckStrategy::ExternalSmt { command: "/nonexistent/solver".into(), timeout: Duration::from_secs(1) };
        let strat = CheckStrategy::Layered(vec![CheckStrategy::default(), missing.clone()]);
        assert_eq!(
            check_semantic(&p, &sol(&p, "(ite (>= x y) x y)"), &strat).unwrap(),
            VerificationResult::Valid(Assurance::Bounded)
        );
        assert!(matches!(
            check_semantic(&p, &sol(&p, "y"), &strat).unwrap(),
            VerificationResult::CounterExample { .. }
        ));
        assert!(matches!(
            check_semantic(&p, &sol(&p, "y"), &missing).unwrap(),
            VerificationResult::Unknown(UnknownReason::ExternalSolverUnavailable(_))
        ));
    }
}
