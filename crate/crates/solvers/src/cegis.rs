//! Pieces shared by both solvers: the example set, the constant pool, the
//! points at which unknowns are observed, and consistency checks.

use std::collections::{BTreeSet, HashMap};

use indexmap::IndexMap;
use sygus_core::checker::falsifies;
use sygus_core::eval::{apply_function, evaluate};
use sygus_core::frontend::SynthProblem;
use sygus_core::term::{FunDef, TermKind};
use sygus_core::{CandidateSolution, Sort, Term, Valuation, Value};

/// Counterexamples gathered so far, without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExampleSet {
    examples: Vec<Valuation>,
}

impl ExampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v` unless already present; returns whether it was added.
    pub fn push(&mut self, v: Valuation) -> bool {
        if self.examples.contains(&v) {
            return false;
        }
        self.examples.push(v);
        true
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Valuation> {
        self.examples.iter()
    }

    pub fn as_slice(&self) -> &[Valuation] {
        &self.examples
    }
}

impl FromIterator<Valuation> for ExampleSet {
    fn from_iter<I: IntoIterator<Item = Valuation>>(iter: I) -> Self {
        let mut e = ExampleSet::new();
        for v in iter {
            e.push(v);
        }
        e
    }
}

/// Integer literals of the problem, {-1, 0, 1, 2}, and every value seen in
/// an example. Bit-vector holes get 0, 1, all-ones and the literals and
/// example values of their width. Sorted and duplicate-free.
pub fn constant_pool(p: &SynthProblem, e: &ExampleSet) -> Vec<Value> {
    let mut pool: BTreeSet<Value> = [-1, 0, 1, 2].into_iter().map(Value::int).collect();
    let mut widths = BTreeSet::new();
    let mut note = |s: Sort| {
        if let Sort::BitVec(w) = s {
            widths.insert(w);
        }
    };
    for u in p.unknowns.values() {
        note(u.ret);
        u.params.iter().for_each(|(_, s)| note(*s));
        u.grammar.nonterminals().iter().for_each(|nt| note(nt.sort));
    }
    p.universals.values().for_each(|s| note(*s));
    for w in widths {
        pool.insert(Value::bv(w, 0));
        pool.insert(Value::bv(w, 1));
        pool.insert(Value::bv(w, u64::MAX));
    }
    pool.extend(p.literals().into_iter().filter(|v| !matches!(v, Value::Bool(_))));
    for v in e.iter() {
        pool.extend(v.values().filter(|v| !matches!(v, Value::Bool(_))).cloned());
    }
    pool.insert(Value::Bool(false));
    pool.insert(Value::Bool(true));
    pool.into_iter().collect()
}

/// Distinct argument tuples at which one unknown is applied over the
/// examples.
#[derive(Debug, Clone, Default)]
pub struct PointTable {
    pub tuples: Vec<Vec<Value>>,
    index: HashMap<Vec<Value>, usize>,
}

impl PointTable {
    fn add(&mut self, t: Vec<Value>) {
        if !self.index.contains_key(&t) {
            self.index.insert(t.clone(), self.tuples.len());
            self.tuples.push(t);
        }
    }

    pub fn index_of(&self, t: &[Value]) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// Points per unknown, in problem order.
pub type Points = IndexMap<String, PointTable>;

/// Collects the points of every unknown. Returns `None` when some unknown
/// is applied to an argument that itself mentions an unknown, since such
/// points depend on the candidate.
pub fn collect_points(p: &SynthProblem, e: &ExampleSet) -> Option<Points> {
    let mut out: Points = p.unknowns.keys().map(|k| (k.clone(), PointTable::default())).collect();
    for c in &p.constraints {
        let mut apps = Vec::new();
        for f in p.unknowns.keys() {
            c.applications_of(f, &mut apps);
        }
        for app in apps {
            let TermKind::App(f, args) = app.kind() else { unreachable!() };
            if args.iter().any(|a| a.mentions_function(&|op| p.is_unknown(op))) {
                return None;
            }
            for v in e.iter() {
                let vals: Result<Vec<Value>, _> = args.iter().map(|a| evaluate(a, v, &p.defined)).collect();
                if let Ok(vals) = vals {
                    out[f.as_str()].add(vals);
                }
            }
        }
    }
    Some(out)
}

/// Evaluates a constraint with unknown applications answered by `lookup`.
/// `None` stands for an evaluation error.
pub fn eval_pointwise(
    t: &Term,
    v: &Valuation,
    p: &SynthProblem,
    lookup: &dyn Fn(&str, &[Value]) -> Option<Value>,
) -> Option<Value> {
    match t.kind() {
        TermKind::Lit(x) => Some(x.clone()),
        TermKind::Var(x) => v.get(x).cloned(),
        TermKind::App(op, args) => {
            if op == "ite" && args.len() == 3 {
                return match eval_pointwise(&args[0], v, p, lookup)? {
                    Value::Bool(true) => eval_pointwise(&args[1], v, p, lookup),
                    _ => eval_pointwise(&args[2], v, p, lookup),
                };
            }
            let vals = args.iter().map(|a| eval_pointwise(a, v, p, lookup)).collect::<Option<Vec<_>>>()?;
            if p.is_unknown(op) {
                lookup(op, &vals)
            } else {
                apply_function(op, &vals, &p.defined).ok()
            }
        }
        TermKind::Let(..) => {
            // Constraints are let-free after parsing.
            evaluate(t, v, &p.defined).ok()
        }
    }
}

/// Output of each unknown at its points, `None` where evaluation failed.
pub type Signature = [Option<Value>];

/// True if the unknowns, given by their signatures, satisfy every
/// constraint at every example.
pub fn consistent_pointwise(p: &SynthProblem, e: &ExampleSet, points: &Points, sigs: &[&Signature]) -> bool {
    let lookup = |f: &str, args: &[Value]| -> Option<Value> {
        let (i, _, table) = points.get_full(f)?;
        sigs[i][table.index_of(args)?].clone()
    };
    e.iter()
        .all(|v| p.constraints.iter().all(|c| eval_pointwise(c, v, p, &lookup) == Some(Value::Bool(true))))
}

/// Number of examples at which some constraint fails, unknowns answered
/// from their signatures.
pub fn count_wrong_pointwise(p: &SynthProblem, e: &ExampleSet, points: &Points, sigs: &[&Signature]) -> usize {
    let lookup = |f: &str, args: &[Value]| -> Option<Value> {
        let (i, _, table) = points.get_full(f)?;
        sigs[i][table.index_of(args)?].clone()
    };
    e.iter()
        .filter(|v| !p.constraints.iter().all(|c| eval_pointwise(c, v, p, &lookup) == Some(Value::Bool(true))))
        .count()
}

/// Number of examples at which some substituted constraint fails.
pub fn count_wrong(p: &SynthProblem, substituted: &[Term], e: &ExampleSet) -> usize {
    e.iter().filter(|v| substituted.iter().any(|c| falsifies(p, c, v))).count()
}

/// Packs bodies (in unknown order) into a solution.
pub fn solution_of(p: &SynthProblem, bodies: &[Term]) -> CandidateSolution {
    p.unknowns
        .values()
        .zip(bodies)
        .map(|(u, b)| FunDef { name: u.name.clone(), params: u.params.clone(), ret: u.ret, body: b.clone() })
        .collect()
}
