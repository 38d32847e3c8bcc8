//! Size-ordered enumerative CEGIS. Terms are built bottom-up per
//! nonterminal; within a nonterminal only the first term of each output
//! vector (its signature over the current points) is kept.

use std::collections::HashSet;
use std::rc::Rc;
use std::time::Duration;

use sygus_core::checker::{check_semantic, CheckStrategy, VerificationResult};
use sygus_core::eval::{apply_function, evaluate_with};
use sygus_core::grammar::{size_splits, Grammar, Slot, Template};
use sygus_core::term::{FunDefs, TermKind};
use sygus_core::{Sort, SynthProblem, Term, Value};

use crate::cegis::{collect_points, consistent_pointwise, constant_pool, count_wrong, solution_of, ExampleSet, Points};
use crate::{Deadline, SolveOutcome};

#[derive(Debug, Clone)]
pub struct EnumConfig {
    /// Bound on the total size of all bodies.
    pub max_size: usize,
    pub budget: Duration,
    pub verifier: CheckStrategy,
    /// Keep one term per signature. Off means every derivable term is tried.
    pub prune: bool,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { max_size: 24, budget: Duration::from_secs(3600), verifier: CheckStrategy::default(), prune: true }
    }
}

/// Output of `t` at each point, binding `params` positionally; `None`
/// marks an evaluation error.
pub fn signature(t: &Term, params: &[(String, Sort)], points: &[Vec<Value>], defined: &FunDefs) -> Vec<Option<Value>> {
    points
        .iter()
        .map(|pt| {
            let binds: Vec<(&str, &Value)> = params.iter().map(|(n, _)| n.as_str()).zip(pt).collect();
            evaluate_with(t, &binds, defined).ok()
        })
        .collect()
}

/// Parameter tuples read off the examples by parameter name.
pub fn example_points(params: &[(String, Sort)], e: &ExampleSet) -> Vec<Vec<Value>> {
    let mut out: Vec<Vec<Value>> = Vec::new();
    for v in e.iter() {
        let pt: Vec<Value> = params.iter().map(|(n, s)| v.get(n).cloned().unwrap_or(Value::default_of(*s))).collect();
        if !out.contains(&pt) {
            out.push(pt);
        }
    }
    out
}

/// Representatives per size and nonterminal (`[size][nt]`) up to
/// `size_limit`, for a grammar over `params` observed at the examples.
pub fn grow(
    g: &Grammar,
    params: &[(String, Sort)],
    defined: &FunDefs,
    e: &ExampleSet,
    size_limit: usize,
    pool: &[Value],
) -> Vec<Vec<Vec<Term>>> {
    let mut bank = Bank::new(g, params, defined, Some(example_points(params, e)), pool, true);
    bank.grow_to(size_limit, &Deadline::new(Duration::MAX));
    (0..=size_limit)
        .map(|k| (0..g.nonterminals().len()).map(|nt| bank.terms(nt, k).cloned().collect()).collect())
        .collect()
}

type Sig = Rc<Vec<Option<Value>>>;

#[derive(Debug, Clone)]
struct Entry {
    term: Term,
    sig: Sig,
}

/// Bottom-up term bank for one grammar.
pub struct Bank<'a> {
    g: &'a Grammar,
    params: &'a [(String, Sort)],
    defined: &'a FunDefs,
    /// `None` disables signatures (and therefore pruning).
    points: Option<Vec<Vec<Value>>>,
    prune: bool,
    consts: Vec<(Sort, Vec<Entry>)>,
    levels: Vec<Vec<Vec<Entry>>>,
    seen: Vec<HashSet<Sig>>,
}

impl<'a> Bank<'a> {
    pub fn new(
        g: &'a Grammar,
        params: &'a [(String, Sort)],
        defined: &'a FunDefs,
        points: Option<Vec<Vec<Value>>>,
        pool: &[Value],
        prune: bool,
    ) -> Self {
        let n_pts = points.as_ref().map_or(0, Vec::len);
        let mut consts: Vec<(Sort, Vec<Entry>)> = Vec::new();
        for v in pool {
            let sig = Rc::new(vec![Some(v.clone()); n_pts]);
            let entry = Entry { term: Term::lit(v.clone()), sig };
            match consts.iter_mut().find(|(s, _)| *s == v.sort()) {
                Some((_, list)) => list.push(entry),
                None => consts.push((v.sort(), vec![entry])),
            }
        }
        let n = g.nonterminals().len();
        Bank {
            g,
            params,
            defined,
            prune: prune && points.is_some(),
            points,
            consts,
            levels: vec![vec![Vec::new(); n]],
            seen: vec![HashSet::new(); n],
        }
    }

    /// Terms kept at exactly `size` for nonterminal `nt`.
    pub fn terms(&self, nt: usize, size: usize) -> impl Iterator<Item = &Term> {
        self.levels.get(size).map(|l| l[nt].as_slice()).unwrap_or(&[]).iter().map(|e| &e.term)
    }

    fn entries(&self, nt: usize, size: usize) -> &[Entry] {
        &self.levels[size][nt]
    }

    /// Builds levels up to `size`; false if the deadline passed first.
    pub fn grow_to(&mut self, size: usize, deadline: &Deadline) -> bool {
        while self.levels.len() <= size {
            if deadline.expired() {
                return false;
            }
            let n = self.levels.len();
            match self.build_level(n, deadline) {
                Some(level) => self.levels.push(level),
                None => return false,
            }
        }
        true
    }

    fn build_level(&mut self, n: usize, deadline: &Deadline) -> Option<Vec<Vec<Entry>>> {
        let g = self.g;
        let count = g.nonterminals().len();
        if self.points.as_ref().is_some_and(Vec::is_empty) {
            // With no points every signature is empty; keep one per size.
            self.seen.iter_mut().for_each(HashSet::clear);
        }
        let mut level: Vec<Vec<Entry>> = vec![Vec::new(); count];
        let mut structural: Vec<HashSet<Term>> = vec![HashSet::new(); count];
        for a in 0..count {
            for p in &g.nonterminal(a).productions {
                if p.unit_target().is_some() || n < p.cost() {
                    continue;
                }
                let slots = p.slots();
                let splits = size_splits(slots, n - p.cost(), &|s| match s {
                    Slot::Hole(_) => Some(1),
                    Slot::NonTerminal(b) => g.min_derivable_size(&g.nonterminal(b).name),
                });
                for split in splits {
                    if deadline.expired() {
                        return None;
                    }
                    let choices: Vec<&[Entry]> = slots
                        .iter()
                        .zip(&split)
                        .map(|(s, &k)| match s {
                            Slot::NonTerminal(b) => self.entries(*b, k),
                            Slot::Hole(sort) => {
                                self.consts.iter().find(|(s, _)| s == sort).map_or(&[][..], |(_, l)| l.as_slice())
                            }
                        })
                        .collect();
                    let mut fresh = Vec::new();
                    product(&choices, &mut |picked| {
                        let term = p.template.instantiate(&mut picked.iter().map(|e| e.term.clone()));
                        if divides_by_zero(&term) {
                            return;
                        }
                        let sig = self.template_signature(&p.template, picked);
                        fresh.push(Entry { term, sig: Rc::new(sig) });
                    });
                    for e in fresh {
                        self.admit(a, e, &mut level, &mut structural);
                    }
                }
            }
        }
        // Chain rules pass same-size entries along until nothing changes.
        loop {
            let mut changed = false;
            for a in 0..count {
                for p in &g.nonterminal(a).productions {
                    if let Some(b) = p.unit_target() {
                        let from: Vec<Entry> = level[b].clone();
                        for e in from {
                            changed |= self.admit(a, e, &mut level, &mut structural);
                        }
                    }
                }
            }
            if !changed {
                return Some(level);
            }
        }
    }

    fn admit(&mut self, nt: usize, e: Entry, level: &mut [Vec<Entry>], structural: &mut [HashSet<Term>]) -> bool {
        if self.prune {
            if !self.seen[nt].insert(e.sig.clone()) {
                return false;
            }
        } else if !structural[nt].insert(e.term.clone()) {
            return false;
        }
        level[nt].push(e);
        true
    }

    fn template_signature(&self, t: &Template, fill: &[&Entry]) -> Vec<Option<Value>> {
        let Some(points) = &self.points else { return Vec::new() };
        (0..points.len())
            .map(|k| {
                let mut cursor = 0;
                let mut scope = Vec::new();
                self.eval_template(t, fill, k, &points[k], &mut cursor, &mut scope)
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn eval_template(
        &self,
        t: &Template,
        fill: &[&Entry],
        k: usize,
        point: &[Value],
        cursor: &mut usize,
        scope: &mut Vec<(String, Option<Value>)>,
    ) -> Option<Value> {
        match t {
            Template::NonTerminal(_) | Template::Constant(_) => {
                let v = fill[*cursor].sig[k].clone();
                *cursor += 1;
                v
            }
            Template::Lit(v) => Some(v.clone()),
            Template::Var(x) => match scope.iter().rev().find(|(n, _)| n == x) {
                Some((_, v)) => v.clone(),
                None => self.params.iter().position(|(n, _)| n == x).map(|i| point[i].clone()),
            },
            Template::App(op, args) => {
                // Every argument is visited so the cursor stays in step.
                let vals: Vec<Option<Value>> =
                    args.iter().map(|a| self.eval_template(a, fill, k, point, cursor, scope)).collect();
                if op == "ite" && vals.len() == 3 {
                    return match vals[0] {
                        Some(Value::Bool(true)) => vals[1].clone(),
                        Some(Value::Bool(false)) => vals[2].clone(),
                        _ => None,
                    };
                }
                let vals: Vec<Value> = vals.into_iter().collect::<Option<_>>()?;
                apply_function(op, &vals, self.defined).ok()
            }
            Template::Let(bs, body) => {
                let vals: Vec<Option<Value>> =
                    bs.iter().map(|(_, d)| self.eval_template(d, fill, k, point, cursor, scope)).collect();
                let n = scope.len();
                scope.extend(bs.iter().map(|(x, _)| x.clone()).zip(vals));
                let r = self.eval_template(body, fill, k, point, cursor, scope);
                scope.truncate(n);
                r
            }
        }
    }
}

fn divides_by_zero(t: &Term) -> bool {
    match t.kind() {
        TermKind::App(op, args) if (op == "div" || op == "mod") && args.len() == 2 => {
            matches!(args[1].as_lit(), Some(Value::Int(z)) if z == &0.into())
        }
        _ => false,
    }
}

/// Calls `f` on every tuple of the product; `f` returning is not an exit.
fn product<T>(lists: &[&[T]], f: &mut dyn FnMut(&[&T])) {
    let _ = product_until(lists, &mut |picked| {
        f(picked);
        false
    });
}

/// Odometer over the product, first list slowest; stops when `f` is true.
fn product_until<T>(lists: &[&[T]], f: &mut dyn FnMut(&[&T]) -> bool) -> bool {
    if lists.iter().any(|l| l.is_empty()) {
        return false;
    }
    let mut idx = vec![0usize; lists.len()];
    let mut picked: Vec<&T> = lists.iter().map(|l| &l[0]).collect();
    loop {
        if f(&picked) {
            return true;
        }
        let mut k = lists.len();
        loop {
            if k == 0 {
                return false;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                picked[k] = &lists[k][idx[k]];
                break;
            }
            idx[k] = 0;
            picked[k] = &lists[k][0];
        }
    }
}

/// Compositions of `total` into parts with the given lower bounds, in
/// lexicographic order.
fn compositions(total: usize, mins: &[usize]) -> Vec<Vec<usize>> {
    fn rec(total: usize, mins: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        match mins {
            [] => {
                if total == 0 {
                    out.push(cur.clone());
                }
            }
            [m, rest @ ..] => {
                let rest_min: usize = rest.iter().sum();
                if total < m + rest_min {
                    return;
                }
                let hi = if rest.is_empty() { total } else { total - rest_min };
                for k in *m..=hi {
                    if rest.is_empty() && k != total {
                        continue;
                    }
                    cur.push(k);
                    rec(total - k, rest, cur, out);
                    cur.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(total, mins, &mut Vec::new(), &mut out);
    out
}

enum Search {
    Found(Vec<Term>),
    Exhausted,
    TimedOut,
}

fn search(
    p: &SynthProblem,
    cfg: &EnumConfig,
    e: &ExampleSet,
    rejected: &HashSet<Vec<Term>>,
    deadline: &Deadline,
) -> Search {
    let pool = constant_pool(p, e);
    let points: Option<Points> = collect_points(p, e);
    let unknowns: Vec<_> = p.unknowns.values().collect();
    let mut banks: Vec<Bank> = unknowns
        .iter()
        .map(|u| {
            let pts = points.as_ref().map(|pts| pts[u.name.as_str()].tuples.clone());
            Bank::new(&u.grammar, &u.params, &p.defined, pts, &pool, cfg.prune)
        })
        .collect();
    let mut mins = Vec::with_capacity(unknowns.len());
    for u in &unknowns {
        match u.grammar.min_derivable_size(u.grammar.start_name()) {
            Some(m) => mins.push(m),
            None => return Search::Exhausted,
        }
    }
    let min_total: usize = mins.iter().sum();
    let mut tried = 0usize;
    for total in min_total..=cfg.max_size {
        for (i, b) in banks.iter_mut().enumerate() {
            if !b.grow_to(total - (min_total - mins[i]), deadline) {
                return Search::TimedOut;
            }
        }
        for comp in compositions(total, &mins) {
            let lists: Vec<&[Entry]> = comp
                .iter()
                .enumerate()
                .map(|(i, &k)| banks[i].entries(unknowns[i].grammar.start(), k))
                .collect();
            let mut timed_out = false;
            let mut found = None;
            product_until(&lists, &mut |picked| {
                tried += 1;
                if tried % 256 == 0 && deadline.expired() {
                    timed_out = true;
                    return true;
                }
                let ok = match &points {
                    Some(pts) => {
                        let sigs: Vec<&[Option<Value>]> = picked.iter().map(|e| e.sig.as_slice()).collect();
                        consistent_pointwise(p, e, pts, &sigs)
                    }
                    None => {
                        let bodies: Vec<Term> = picked.iter().map(|e| e.term.clone()).collect();
                        match p.substituted_constraints(&solution_of(p, &bodies)) {
                            Ok(cs) => count_wrong(p, &cs, e) == 0,
                            Err(_) => false,
                        }
                    }
                };
                if ok {
                    let bodies: Vec<Term> = picked.iter().map(|e| e.term.clone()).collect();
                    if !rejected.contains(&bodies) {
                        found = Some(bodies);
                        return true;
                    }
                }
                false
            });
            if timed_out {
                return Search::TimedOut;
            }
            if let Some(b) = found {
                return Search::Found(b);
            }
        }
    }
    Search::Exhausted
}

pub fn solve_enumerative(p: &SynthProblem, cfg: &EnumConfig) -> SolveOutcome {
    solve_enumerative_until(p, cfg, &Deadline::new(cfg.budget))
}

/// CEGIS loop: search from size one under the current examples, verify,
/// and restart with each new counterexample.
pub fn solve_enumerative_until(p: &SynthProblem, cfg: &EnumConfig, deadline: &Deadline) -> SolveOutcome {
    let mut e = ExampleSet::new();
    let mut rejected: HashSet<Vec<Term>> = HashSet::new();
    loop {
        let bodies = match search(p, cfg, &e, &rejected, deadline) {
            Search::Found(b) => b,
            Search::Exhausted => return SolveOutcome::Exhausted { max_size: cfg.max_size },
            Search::TimedOut => return SolveOutcome::TimedOut { budget: deadline.budget() },
        };
        let solution = solution_of(p, &bodies);
        log::debug!("enumerative: candidate {:?} with {} examples", bodies, e.len());
        match check_semantic(p, &solution, &cfg.verifier) {
            Ok(VerificationResult::Valid(_)) => {
                let sizes = bodies.iter().map(Term::size).collect();
                return SolveOutcome::Solved { solution, elapsed: deadline.elapsed(), sizes };
            }
            Ok(VerificationResult::CounterExample { valuation, .. }) => {
                if !e.push(valuation) {
                    rejected.insert(bodies);
                }
            }
            Ok(VerificationResult::Unknown(reason)) => {
                log::warn!("enumerative: verifier gave no verdict ({reason:?}); skipping candidate");
                rejected.insert(bodies);
            }
            Err(err) => return SolveOutcome::Unsupported(err.to_string()),
        }
        if deadline.expired() {
            return SolveOutcome::TimedOut { budget: deadline.budget() };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sygus_core::frontend::default_grammar;
    use sygus_core::parse_problem_str;
    use sygus_core::Valuation;

    fn xy() -> Vec<(String, Sort)> {
        vec![("x".into(), Sort::Int), ("y".into(), Sort::Int)]
    }

    fn ex(pairs: &[(i64, i64)]) -> ExampleSet {
        pairs
            .iter()
            .map(|(x, y)| -> Valuation { [("x".into(), Value::int(*x)), ("y".into(), Value::int(*y))].into() })
            .collect()
    }

    #[test]
    fn signatures() {
        let e = ex(&[(1, 2), (3, 0)]);
        let pts = example_points(&xy(), &e);
        let t = |s| sygus_core::frontend::parse_term_str(s).unwrap();
        let d = FunDefs::new();
        assert_eq!(signature(&t("x"), &xy(), &pts, &d), vec![Some(Value::int(1)), Some(Value::int(3))]);
        assert_eq!(signature(&t("(div x 0)"), &xy(), &pts, &d), vec![None, None]);
        assert_eq!(signature(&t("(+ x y)"), &xy(), &pts, &d), signature(&t("(+ y x)"), &xy(), &pts, &d));
    }

    #[test]
    fn size_one_bank_merges_constants() {
        let g = default_grammar(&xy(), Sort::Int).unwrap();
        let banks = grow(&g, &xy(), &FunDefs::new(), &ex(&[(0, 1)]), 1, &[Value::int(0), Value::int(1)]);
        let start = g.start();
        let names: Vec<String> = banks[1][start].iter().map(Term::to_string).collect();
        assert_eq!(names, ["x", "y"]);
    }

    #[test]
    fn empty_examples_keep_one_per_size() {
        let g = default_grammar(&xy(), Sort::Int).unwrap();
        let banks = grow(&g, &xy(), &FunDefs::new(), &ExampleSet::new(), 5, &[Value::int(0), Value::int(1)]);
        for k in 1..=5 {
            for nt in 0..g.nonterminals().len() {
                assert!(banks[k][nt].len() <= 1, "size {k} nt {nt}");
            }
        }
        assert_eq!(banks[3][g.start()].len(), 1);
    }

    #[test]
    fn compositions_are_lexicographic() {
        assert_eq!(compositions(4, &[1, 1]), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(compositions(2, &[1, 2]), Vec::<Vec<usize>>::new());
    }

    #[test]
    fn contradictory_spec_is_exhausted() {
        let p = parse_problem_str(
            "(set-logic LIA) (synth-fun f ((x Int)) Int) (declare-var x Int)
             (constraint (= (f x) (+ x 1))) (constraint (= (f x) x)) (check-synth)",
        )
        .unwrap();
        let cfg = EnumConfig { max_size: 5, ..EnumConfig::default() };
        assert_eq!(solve_enumerative(&p, &cfg), SolveOutcome::Exhausted { max_size: 5 });
    }

    #[test]
    fn tiny_budget_times_out() {
        let p = parse_problem_str(
            "(set-logic LIA) (synth-fun f ((x Int)) Int) (declare-var x Int)
             (constraint (= (f x) (+ x 1))) (constraint (= (f x) x)) (check-synth)",
        )
        .unwrap();
        let cfg = EnumConfig { max_size: 1000, budget: Duration::from_millis(1), ..EnumConfig::default() };
        assert!(matches!(solve_enumerative(&p, &cfg), SolveOutcome::TimedOut { .. }));
    }
}
