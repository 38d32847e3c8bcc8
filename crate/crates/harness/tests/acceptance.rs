//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so
//! the lines are always printed.
//!
//! Criteria 3 and 6 are known to fail: the listed lowest-zero problem asks
//! for a set bit of (bvnot x), which is zero at x = all-ones. They are run
//! verbatim and reported; the process fails only on other criteria.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use sygus_core::checker::{check_semantic, falsifies, Bounds, CheckStrategy, VerificationResult};
use sygus_core::eval::evaluate;
use sygus_core::frontend::parse_term_str;
use sygus_core::grammar::{derives, enumerate};
use sygus_core::term::FunDef;
use sygus_core::{
    parse_problem_str, parse_solution, print_problem, print_solution, CandidateSolution, SynthProblem, Term,
    Valuation, Value,
};
use sygus_harness::run::OutcomeKind;
use sygus_harness::{run_suite, Buckets, Limits, Solver, SuiteReport};
use sygus_solvers::stochastic::solve_stochastic_traced;
use sygus_solvers::{solve_enumerative, Deadline, EnumConfig, SolveOutcome, StochConfig};

const KNOWN_FAILING: [u32; 2] = [3, 6];

const BV_LOWEST_ZERO: &str = "(set-logic BV)

(synth-fun f ((x (BitVec 32))) (BitVec 32)
             ((Start (BitVec 32) (x 0 1
                                 (bvand Start Start)
                                 (bvor Start Start)
                                 (bvnot Start)
                                 (bvadd Start Start)))))

(declare-var x (BitVec 32))
(declare-var y (BitVec 32))

(constraint (=> (bvult 0 x) (bvult 0 (bvand (f x) (bvnot x)))))
(constraint (=> (bvult 0 y) (= 0 (bvand (bvshr (f x) y) (bvnot x)))))

(check-synth)
";

const MAX2: &str = "(set-logic LIA)
(synth-fun max2 ((x Int) (y Int)) Int)
(declare-var x Int)
(declare-var y Int)
(constraint (>= (max2 x y) x))
(constraint (>= (max2 x y) y))
(constraint (or (= x (max2 x y)) (or (= y (max2 x y)))))
(check-synth)
";

const INV: &str = "(set-logic LIA)

(synth-inv inv-f ((i Int) (j Int) (i0 Int) (j0 Int)))

(declare-primed-var i0 Int)
(declare-primed-var j0 Int)
(declare-primed-var i  Int)
(declare-primed-var j  Int)

(define-fun pre-f ((i Int) (j Int) (i0 Int) (j0 Int)) Bool
                  (and (>= i 0) (and (= i i0) (= j j0))))

(define-fun trans-f ((i Int) (j Int) (i0 Int) (j0 Int)
                     (i! Int) (j! Int) (i0! Int) (j0! Int)) Bool
                     (and (and (= i! (- i 1)) (= j! (+ j 1)))
                          (and (= i0! i0) (= j0! j0))))

(define-fun post-f ((i Int) (j Int) (i0 Int) (j0 Int)) Bool
                   (= j (+ j0 i0)))

(inv-constraint inv-f pre-f trans-f post-f)

(check-synth)
";

const QM_LOOP: &str = "(set-logic LIA)

(define-fun qm ((a Int) (b Int)) Int (ite (< a 0) b a))

(synth-fun qm-loop ((x Int)) Int
    ((Start Int (x 0 1 3
                 (- Start Start)
                 (+ Start Start)
                 (qm Start Start)))))

(declare-var x Int)

(constraint (= (qm-loop x) (ite (<= x 0) 3 (- x 1))))

(check-synth)
";

const HD17_D0: &str = "(synth-fun f ((x (BitVec 32))) (BitVec 32)
    ((Start (BitVec 32) ((bvand Start Start)
                         (bvadd Start Start)
                         (bvsub Start Start)
                         (bvor Start Start)
                          x
                         #x00000001))))";

const HD17_D1: &str = "(synth-fun f ((x (BitVec 32))) (BitVec 32)
    ((Start (BitVec 32) ((bvand Start Start)
                         (bvadd Start Start)
                         (bvxor Start Start)
                         (bvsub Start Start)
                         (bvor Start Start)
                         (bvnot Start)
                         (bvneg Start)
                         x
                         #x00000001
                         #x00000000
                         #xFFFFFFFF))))";

const HD17_D5: &str = "(synth-fun f ((x (BitVec 32))) (BitVec 32)
    ((Start (BitVec 32) ((bvnot Start)
                         (bvxor Start Start)
                         (bvand Start Start)
                         (bvor Start Start)
                         (bvneg Start)
                         (bvadd Start Start)
                         (bvmul Start Start)
                         (bvudiv Start Start)
                         (bvurem Start Start)
                         (bvlshr Start Start)
                         (bvashr Start Start)
                         (bvshl Start Start)
                         (bvsdiv Start Start)
                         (bvsrem Start Start)
                         (bvsub Start Start)
                         x
                         #x0000001F
                         #x00000001
                         #x00000000
                         #xFFFFFFFF))))";

/// A grammar listing wrapped into a problem: turn off the rightmost
/// contiguous run of 1 bits.
fn hd17(grammar: &str, width: u32) -> String {
    let g = if width == 32 {
        grammar.to_string()
    } else {
        grammar
            .replace("BitVec 32", &format!("BitVec {width}"))
            .replace("#x00000001", "#x01")
            .replace("#x00000000", "#x00")
            .replace("#xFFFFFFFF", "#xFF")
            .replace("#x0000001F", "#x1F")
    };
    let (one, s) = if width == 32 { ("#x00000001", 32) } else { ("#x01", width) };
    format!(
        "(set-logic BV)\n{g}\n(declare-var x (BitVec {s}))\n\
         (constraint (= (f x) (bvand (bvadd (bvor x (bvsub x {one})) {one}) x)))\n(check-synth)\n"
    )
}

fn inv_corrected() -> String {
    INV.replace(
        "(and (and (= i! (- i 1)) (= j! (+ j 1)))",
        "(and (and (> i 0) (and (= i! (- i 1)) (= j! (+ j 1))))",
    )
    .replace("(= j (+ j0 i0)))", "(=> (<= i 0) (= j (+ j0 i0))))")
}

fn smt_command() -> Option<String> {
    if let Ok(c) = std::env::var("SYGUS_SMT") {
        return Some(c);
    }
    let found = std::env::var_os("PATH")
        .is_some_and(|paths| std::env::split_paths(&paths).any(|d| d.join("z3").is_file()));
    found.then(|| "z3 -in".to_string())
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---------------------------------------------------------------- 1

fn round_trip_all() -> Vec<(String, String)> {
    vec![
        ("bv lowest zero".into(), BV_LOWEST_ZERO.into()),
        ("max2".into(), MAX2.into()),
        ("inv".into(), INV.into()),
        ("qm_loop_1".into(), QM_LOOP.into()),
        ("hd-17-d0".into(), hd17(HD17_D0, 32)),
        ("hd-17-d1".into(), hd17(HD17_D1, 32)),
        ("hd-17-d5".into(), hd17(HD17_D5, 32)),
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    for (name, text) in round_trip_all() {
        let p = match parse_problem_str(&text) {
            Ok(p) => p,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        let printed = print_problem(&p);
        match parse_problem_str(&printed) {
            Ok(q) if q == p => {}
            Ok(_) => return outcome(false, format!("{name}: re-parsed problem differs")),
            Err(e) => return outcome(false, format!("{name}: printed form does not parse: {e}")),
        }
    }
    let t = start.elapsed();
    outcome(t < Duration::from_secs(1), format!("7 programs round-trip in {:.3}s (limit 1s)", t.as_secs_f64()))
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let p = match parse_problem_str(INV) {
        Ok(p) => p,
        Err(e) => return outcome(false, e.to_string()),
    };
    if p.constraints.len() != 3 || p.universals.len() != 8 {
        return outcome(false, format!("{} constraints, {} universals", p.constraints.len(), p.universals.len()));
    }
    let q = parse_problem_str(&inv_corrected()).expect("corrected variant parses");
    let s = parse_solution(
        "(define-fun inv-f ((i Int) (j Int) (i0 Int) (j0 Int)) Bool (and (>= i 0) (= (+ i j) (+ i0 j0))))",
        &q,
    )
    .expect("invariant parses");
    let sampled =
        check_semantic(&q, &s, &CheckStrategy::RandomSample { count: 100_000, seed: 7, bounds: Bounds::default() });
    if !matches!(sampled, Ok(VerificationResult::Valid(_))) {
        return outcome(false, format!("sampling verdict {sampled:?}"));
    }
    let smt = match smt_command() {
        Some(command) => {
            let v = check_semantic(&q, &s, &CheckStrategy::ExternalSmt { command: command.clone(), timeout: Duration::from_secs(60) });
            if !matches!(v, Ok(VerificationResult::Valid(_))) {
                return outcome(false, format!("SMT verdict {v:?}"));
            }
            format!("; `{command}` proves it")
        }
        None => "; no SMT solver configured".to_string(),
    };
    outcome(true, format!("3 constraints, 8 universals; 1e5 samples (seed 7) find no counterexample{smt}"))
}

// ---------------------------------------------------------------- 3

/// Lowest clear bit of x, computed natively.
fn oracle_f(x: u8) -> u8 {
    !x & x.wrapping_add(1)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let p = parse_problem_str(&BV_LOWEST_ZERO.replace("32", "8")).expect("width-8 variant parses");
    let s = parse_solution("(define-fun f ((x (BitVec 8))) (BitVec 8) (bvand (bvnot x) (bvadd x 1)))", &p)
        .expect("reference body parses");
    let cs = p.substituted_constraints(&s).expect("substitution");
    let mut disagreements = 0;
    let mut violations = Vec::new();
    for x in 0..=255u8 {
        let f = oracle_f(x);
        let body = evaluate(
            &s.get("f").unwrap().body,
            &[("x".to_string(), Value::bv(8, x as u64))].into_iter().collect(),
            &p.defined,
        );
        if body != Ok(Value::bv(8, f as u64)) {
            disagreements += 1;
        }
        for y in 1..=8u32 {
            let v: Valuation =
                [("x".to_string(), Value::bv(8, x as u64)), ("y".to_string(), Value::bv(8, y as u64))].into();
            let c1 = x == 0 || (f & !x) != 0;
            let c2 = (f.checked_shr(y).unwrap_or(0) & !x) == 0;
            for (k, (c, native)) in cs.iter().zip([c1, c2]).enumerate() {
                let evaluated = evaluate(c, &v, &p.defined) == Ok(Value::Bool(true));
                if evaluated != native {
                    disagreements += 1;
                }
                if !evaluated && violations.len() < 3 {
                    violations.push(format!("x=#x{x:02x} y={y} breaks constraint {k}"));
                }
            }
        }
    }
    let t = start.elapsed();
    let pass = violations.is_empty() && disagreements == 0 && t < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "evaluator matches native u8 oracle on {} of 4352 checks in {:.3}s; violations: {}",
            4352 - disagreements,
            t.as_secs_f64(),
            if violations.is_empty() { "none".to_string() } else { violations.join(", ") }
        ),
    )
}

// ---------------------------------------------------------------- 4

/// All terms of exactly `size` nodes over leaves and binary operators.
fn brute_terms(leaves: &[&str], ops: &[&str], size: usize, memo: &mut HashMap<usize, Vec<String>>) -> Vec<String> {
    if let Some(v) = memo.get(&size) {
        return v.clone();
    }
    let mut out = Vec::new();
    if size == 1 {
        out.extend(leaves.iter().map(|l| l.to_string()));
    } else if size >= 3 {
        for a in 1..size - 1 {
            let b = size - 1 - a;
            let left = brute_terms(leaves, ops, a, memo);
            let right = brute_terms(leaves, ops, b, memo);
            for op in ops {
                for l in &left {
                    for r in &right {
                        out.push(format!("({op} {l} {r})"));
                    }
                }
            }
        }
    }
    memo.insert(size, out.clone());
    out
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let qm = parse_problem_str(QM_LOOP).unwrap();
    let hd = parse_problem_str(&hd17(HD17_D0, 32)).unwrap();
    let cases = [
        ("qm_loop_1", &qm, vec!["x", "0", "1", "3"], vec!["-", "+", "qm"]),
        ("hd-17-d0", &hd, vec!["x", "#x00000001"], vec!["bvand", "bvadd", "bvsub", "bvor"]),
    ];
    let mut checked = 0usize;
    for (name, p, leaves, ops) in &cases {
        let g = &p.unknowns.values().next().unwrap().grammar;
        let mut memo = HashMap::new();
        for size in 1..=7 {
            let oracle: BTreeSet<String> = brute_terms(leaves, ops, size, &mut memo).into_iter().collect();
            let engine: BTreeSet<String> =
                enumerate(g, "Start", size, &[]).unwrap().iter().map(Term::to_string).collect();
            if oracle != engine {
                return outcome(false, format!("{name} size {size}: enumerate gives {} terms, oracle {}", engine.len(), oracle.len()));
            }
            for t in &oracle {
                let term = parse_term_str(t).unwrap();
                if !derives(g, "Start", &term).unwrap() {
                    return outcome(false, format!("{name}: derives rejects {t}"));
                }
                checked += 1;
            }
        }
    }
    // Terms of one grammar are not derivable in the other, nor are these.
    let g_qm = &qm.unknowns["qm-loop"].grammar;
    let g_hd = &hd.unknowns["f"].grammar;
    let mut memo = HashMap::new();
    for size in [1, 3, 5] {
        for t in brute_terms(&["x", "#x00000001"], &["bvand", "bvadd", "bvsub", "bvor"], size, &mut memo) {
            if t != "x" && derives(g_qm, "Start", &parse_term_str(&t).unwrap()).unwrap() {
                return outcome(false, format!("qm grammar accepts {t}"));
            }
        }
    }
    for (g, t) in [(g_qm, "(* x x)"), (g_qm, "(+ x 2)"), (g_hd, "(bvxor x x)"), (g_hd, "(bvand x #x00000002)")] {
        if derives(g, "Start", &parse_term_str(t).unwrap()).unwrap() {
            return outcome(false, format!("derives accepts {t}"));
        }
    }
    let t = start.elapsed();
    outcome(
        t < Duration::from_secs(30),
        format!("enumerate = oracle for sizes 1..=7, derives accepts all {checked} oracle terms; {:.1}s (limit 30s)", t.as_secs_f64()),
    )
}

// ---------------------------------------------------------------- 5

/// Brute-force model of the default integer grammar with its own evaluator.
#[derive(Clone)]
enum E {
    X,
    Y,
    C(i64),
    T,
    F,
    Op(&'static str, Vec<E>),
}

fn eval_int(e: &E, x: i64, y: i64) -> Option<i64> {
    Some(match e {
        E::X => x,
        E::Y => y,
        E::C(c) => *c,
        E::Op(op, a) => match *op {
            "+" => eval_int(&a[0], x, y)?.checked_add(eval_int(&a[1], x, y)?)?,
            "-" => eval_int(&a[0], x, y)?.checked_sub(eval_int(&a[1], x, y)?)?,
            "*" => eval_int(&a[0], x, y)?.checked_mul(eval_int(&a[1], x, y)?)?,
            "div" | "mod" => {
                let (n, d) = (eval_int(&a[0], x, y)?, eval_int(&a[1], x, y)?);
                if d == 0 {
                    return None;
                }
                if *op == "div" { n.div_euclid(d) } else { n.rem_euclid(d) }
            }
            "ite" => {
                if eval_bool(&a[0], x, y)? { eval_int(&a[1], x, y)? } else { eval_int(&a[2], x, y)? }
            }
            _ => unreachable!(),
        },
        _ => unreachable!(),
    })
}

fn eval_bool(e: &E, x: i64, y: i64) -> Option<bool> {
    Some(match e {
        E::T => true,
        E::F => false,
        E::Op(op, a) => {
            if let [b] = a.as_slice() {
                return Some(!eval_bool(b, x, y)?);
            }
            if matches!(*op, "<=" | "<" | ">=" | ">" | "=i") {
                let (l, r) = (eval_int(&a[0], x, y)?, eval_int(&a[1], x, y)?);
                return Some(match *op {
                    "<=" => l <= r,
                    "<" => l < r,
                    ">=" => l >= r,
                    ">" => l > r,
                    _ => l == r,
                });
            }
            let (l, r) = (eval_bool(&a[0], x, y)?, eval_bool(&a[1], x, y)?);
            match *op {
                "and" => l && r,
                "or" => l || r,
                "=>" => !l || r,
                "xor" => l != r,
                "xnor" | "iff" | "=b" => l == r,
                "nand" => !(l && r),
                "nor" => !(l || r),
                _ => unreachable!(),
            }
        }
        _ => unreachable!(),
    })
}

struct DefaultGrammarOracle {
    pool: Vec<i64>,
    ints: HashMap<usize, Vec<E>>,
    bools: HashMap<usize, Vec<E>>,
}

impl DefaultGrammarOracle {
    fn ints(&mut self, n: usize) -> Vec<E> {
        if let Some(v) = self.ints.get(&n) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend([E::X, E::Y]);
            out.extend(self.pool.iter().map(|c| E::C(*c)));
        }
        for a in 1..n.saturating_sub(1) {
            let b = n - 1 - a;
            for l in self.ints(a) {
                for r in self.ints(b) {
                    out.push(E::Op("+", vec![l.clone(), r.clone()]));
                    out.push(E::Op("-", vec![l.clone(), r]));
                }
            }
        }
        if n >= 3 {
            for s in self.ints(n - 2) {
                for c in self.pool.clone() {
                    out.push(E::Op("*", vec![s.clone(), E::C(c)]));
                    out.push(E::Op("*", vec![E::C(c), s.clone()]));
                    out.push(E::Op("div", vec![s.clone(), E::C(c)]));
                    out.push(E::Op("mod", vec![s.clone(), E::C(c)]));
                }
            }
        }
        for a in 1..n {
            for b in 1..n {
                if a + b + 1 >= n {
                    continue;
                }
                let c = n - 1 - a - b;
                for g in self.bools(a) {
                    for t in self.ints(b) {
                        for e in self.ints(c) {
                            out.push(E::Op("ite", vec![g.clone(), t.clone(), e]));
                        }
                    }
                }
            }
        }
        self.ints.insert(n, out.clone());
        out
    }

    fn bools(&mut self, n: usize) -> Vec<E> {
        if let Some(v) = self.bools.get(&n) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend([E::T, E::F]);
        }
        if n >= 2 {
            out.extend(self.bools(n - 1).into_iter().map(|b| E::Op("not", vec![b])));
        }
        for a in 1..n.saturating_sub(1) {
            let b = n - 1 - a;
            for l in self.bools(a) {
                for r in self.bools(b) {
                    for op in ["and", "or", "=>", "xor", "xnor", "nand", "nor", "iff", "=b"] {
                        out.push(E::Op(op, vec![l.clone(), r.clone()]));
                    }
                }
            }
            for l in self.ints(a) {
                for r in self.ints(b) {
                    for op in ["<=", "=i", ">=", ">", "<"] {
                        out.push(E::Op(op, vec![l.clone(), r.clone()]));
                    }
                }
            }
        }
        self.bools.insert(n, out.clone());
        out
    }
}

fn is_max(e: &E) -> bool {
    (-8..=8).all(|x| {
        (-8..=8).all(|y| eval_int(e, x, y).is_some_and(|m| m >= x && m >= y && (m == x || m == y)))
    })
}

fn criterion_5() -> Outcome {
    let p = parse_problem_str(MAX2).unwrap();
    let start = Instant::now();
    let pruned = solve_enumerative(&p, &EnumConfig { budget: Duration::from_secs(10), ..EnumConfig::default() });
    let t = start.elapsed();
    let Some(s) = pruned.solution() else { return outcome(false, format!("pruned run: {pruned:?}")) };
    let verified = check_semantic(&p, s, &CheckStrategy::default()).is_ok_and(|v| v.is_valid());
    let size = s.total_size();
    let unpruned =
        solve_enumerative(&p, &EnumConfig { prune: false, budget: Duration::from_secs(60), ..EnumConfig::default() });
    let mut oracle = DefaultGrammarOracle { pool: vec![-1, 0, 1, 2], ints: HashMap::new(), bools: HashMap::new() };
    let mut counted = 0;
    let mut smaller = None;
    for n in 1..=5 {
        for e in oracle.ints(n) {
            counted += 1;
            if is_max(&e) {
                smaller = Some(n);
            }
        }
    }
    let pass = verified
        && size <= 6
        && t < Duration::from_secs(10)
        && smaller.is_none()
        && unpruned.total_size() == Some(size);
    outcome(
        pass,
        format!(
            "size {size} `{}` in {:.2}s (limit 10s), verified {verified}; oracle: {counted} terms of size <= 5, {}; unpruned size {:?}",
            s.get("max2").unwrap().body,
            t.as_secs_f64(),
            match smaller {
                None => "none is a solution".to_string(),
                Some(n) => format!("a size-{n} term is a solution"),
            },
            unpruned.total_size()
        ),
    )
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let p = parse_problem_str(&BV_LOWEST_ZERO.replace("32", "8")).unwrap();
    let start = Instant::now();
    let out = solve_enumerative(&p, &EnumConfig { budget: Duration::from_secs(120), ..EnumConfig::default() });
    let t = start.elapsed();
    let verbatim = match &out {
        SolveOutcome::Solved { .. } => {
            let ok = check_semantic(&p, out.solution().unwrap(), &CheckStrategy::default()).is_ok_and(|v| v.is_valid());
            let size = out.total_size().unwrap();
            return outcome(ok && size == 6 && t < Duration::from_secs(120), format!("size {size} in {:.1}s", t.as_secs_f64()));
        }
        other => format!("{other:?} after {:.1}s", t.as_secs_f64()),
    };
    let guarded = p_guarded_width8();
    let g = solve_enumerative(&guarded, &EnumConfig { budget: Duration::from_secs(120), ..EnumConfig::default() });
    outcome(
        false,
        format!(
            "listed problem: {verbatim}; with x < #xff added to constraint 1: size {:?} `{}`",
            g.total_size(),
            g.solution().map_or(String::new(), |s| s.get("f").unwrap().body.to_string())
        ),
    )
}

fn p_guarded_width8() -> SynthProblem {
    let text = BV_LOWEST_ZERO
        .replace("32", "8")
        .replace("(=> (bvult 0 x) (bvult 0 (bvand", "(=> (and (bvult 0 x) (bvult x #xff)) (bvult 0 (bvand");
    parse_problem_str(&text).unwrap()
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let p = parse_problem_str(MAX2).unwrap();
    let mut solved = Vec::new();
    let mut times = Vec::new();
    for seed in 1..=10u64 {
        let cfg = StochConfig { seed, budget: Duration::from_secs(60), ..StochConfig::default() };
        let start = Instant::now();
        let (out, _) = solve_stochastic_traced(&p, &cfg, &Deadline::new(cfg.budget));
        times.push(start.elapsed().as_secs_f64());
        let ok = out.solution().is_some_and(|s| check_semantic(&p, s, &CheckStrategy::default()).is_ok_and(|v| v.is_valid()));
        if ok {
            solved.push(seed);
        }
    }
    let cfg = StochConfig { seed: 1, budget: Duration::from_secs(60), ..StochConfig::default() };
    let a = solve_stochastic_traced(&p, &cfg, &Deadline::new(cfg.budget));
    let b = solve_stochastic_traced(&p, &cfg, &Deadline::new(cfg.budget));
    let same = a.0.solution() == b.0.solution() && a.1 == b.1;
    let slowest = times.iter().copied().fold(0.0, f64::max);
    outcome(
        solved.len() >= 8 && same,
        format!(
            "{}/10 seeds solved (need 8), slowest {slowest:.1}s (limit 60s each); seed 1 twice: identical transcript {same} ({} submissions)",
            solved.len(),
            a.1.len()
        ),
    )
}

// ---------------------------------------------------------------- 8

fn wrong_candidates() -> Vec<(String, String, String, CheckStrategy)> {
    let mut out = Vec::new();
    let sample = |seed| CheckStrategy::RandomSample { count: 20_000, seed, bounds: Bounds::default() };
    let max2_bodies = [
        "x", "y", "0", "1", "(+ x y)", "(- x y)", "(+ x 1)", "(* 2 x)", "(ite (<= x y) x y)", "(ite (< x y) x y)",
        "(ite (>= x 0) x y)", "(ite (= x y) x y)", "(ite (> x y) y x)", "(- 0 x)", "(div (+ x y) 2)", "(mod x 2)",
        "(ite (>= y 0) y x)", "(+ (ite (>= x y) x y) 1)", "(ite (>= x y) y x)", "(ite (> x 3) x y)",
    ];
    for (k, b) in max2_bodies.iter().enumerate() {
        let strat = match k % 3 {
            0 => CheckStrategy::default(),
            1 => sample(k as u64),
            _ => match smt_command() {
                Some(command) => CheckStrategy::ExternalSmt { command, timeout: Duration::from_secs(30) },
                None => CheckStrategy::default(),
            },
        };
        out.push((MAX2.to_string(), "max2 ((x Int) (y Int)) Int".to_string(), b.to_string(), strat));
    }
    let hd8 = hd17(HD17_D0, 8);
    let hd_bodies = [
        "x", "#x01", "(bvand x x)", "(bvadd x #x01)", "(bvsub x #x01)", "(bvor x #x01)", "(bvand x (bvsub x #x01))",
        "(bvadd x x)", "(bvor x (bvsub x #x01))", "(bvand x (bvadd x #x01))", "(bvsub x x)", "(bvadd (bvor x (bvsub x #x01)) #x01)",
        "(bvand (bvadd x #x01) x)", "(bvor x (bvadd x #x01))", "(bvsub (bvand x x) #x01)",
    ];
    for b in hd_bodies {
        out.push((hd8.clone(), "f ((x (BitVec 8))) (BitVec 8)".to_string(), b.to_string(), CheckStrategy::default()));
    }
    let inv = inv_corrected();
    let mut inv_bodies: Vec<String> = (0..5).map(|k| format!("(>= i {k})")).collect();
    inv_bodies.extend((1..6).map(|k| format!("(< i {k})")));
    inv_bodies.extend((0..5).map(|k| format!("(= j (+ j0 {k}))")));
    for (k, b) in inv_bodies.into_iter().enumerate() {
        let strat = if k % 2 == 0 { CheckStrategy::default() } else { sample(100 + k as u64) };
        out.push((inv.clone(), "inv-f ((i Int) (j Int) (i0 Int) (j0 Int)) Bool".to_string(), b, strat));
    }
    out
}

fn criterion_8() -> Outcome {
    let cases = wrong_candidates();
    let (mut returned, mut honest) = (0, 0);
    let mut problems = Vec::new();
    for (text, sig, body, strat) in &cases {
        let p = parse_problem_str(text).unwrap();
        let s = parse_solution(&format!("(define-fun {sig} {body})"), &p).unwrap();
        match check_semantic(&p, &s, strat) {
            Ok(VerificationResult::CounterExample { valuation, constraint }) => {
                returned += 1;
                let cs = p.substituted_constraints(&s).unwrap();
                if falsifies(&p, &cs[constraint], &valuation) {
                    honest += 1;
                } else {
                    problems.push(format!("{body}: cited constraint {constraint} holds"));
                }
            }
            other => problems.push(format!("{body}: {other:?}")),
        }
    }
    outcome(
        returned == cases.len() && honest == returned,
        format!(
            "{} wrong candidates, {returned} counterexamples, {honest} re-evaluate to false{}",
            cases.len(),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

// ---------------------------------------------------------------- 9

const STUB_PROBLEM: &str = "(set-logic LIA)
(synth-fun f ((x Int)) Int ((Start Int (x 1 (+ Start Start)))))
(declare-var x Int)
(constraint (>= (f x) x))
(check-synth)
";

enum Script {
    Body(&'static str, f64),
    /// x plus (size - 1) / 2 ones.
    Sized(usize, f64),
    Fail(SolveOutcome),
}

struct Stub {
    id: &'static str,
    plan: HashMap<&'static str, Script>,
}

impl Solver for Stub {
    fn id(&self) -> &str {
        self.id
    }

    fn solve(&self, p: &SynthProblem, _: &Deadline) -> SolveOutcome {
        // The benchmark is identified by the marker constant in its text.
        let key = p.literals().iter().find_map(|v| match v {
            Value::Int(n) if *n >= 100.into() => Some(n.to_string()),
            _ => None,
        });
        let name = match key.as_deref() {
            Some("101") => "b1",
            Some("102") => "b2",
            Some("103") => "b3",
            Some("104") => "b4",
            Some("105") => "b5",
            _ => "b6",
        };
        let (body, secs) = match &self.plan[name] {
            Script::Fail(o) => return o.clone(),
            Script::Body(b, t) => (b.to_string(), *t),
            Script::Sized(n, t) => ((0..(n - 1) / 2).fold("x".to_string(), |acc, _| format!("(+ {acc} 1)")), *t),
        };
        let u = p.unknowns.values().next().unwrap();
        let def = FunDef { name: u.name.clone(), params: u.params.clone(), ret: u.ret, body: parse_term_str(&body).unwrap() };
        let solution: CandidateSolution = [def].into_iter().collect();
        let sizes = vec![solution.total_size()];
        SolveOutcome::Solved { solution, elapsed: Duration::from_secs_f64(secs), sizes }
    }
}

fn mini_suite() -> SuiteReport {
    let dir = tempfile::tempdir().unwrap();
    for (cat, b, marker) in
        [("alpha", "b1", 101), ("alpha", "b2", 102), ("alpha", "b3", 103), ("beta", "b4", 104), ("beta", "b5", 105), ("beta", "b6", 106)]
    {
        let d = dir.path().join(cat);
        std::fs::create_dir_all(&d).unwrap();
        let text = STUB_PROBLEM.replace("(check-synth)", &format!("(constraint (<= x (+ x {marker})))\n(check-synth)"));
        std::fs::write(d.join(format!("{b}.sl")), text).unwrap();
    }
    let a = Stub {
        id: "A",
        plan: HashMap::from([
            ("b1", Script::Sized(5, 0.4)),
            ("b2", Script::Sized(3, 2.0)),
            ("b3", Script::Sized(13, 40.0)),
            ("b4", Script::Fail(SolveOutcome::Exhausted { max_size: 9 })),
            ("b5", Script::Body("(* x 1)", 0.1)),
            ("b6", Script::Body("(+ x x)", 0.3)),
        ]),
    };
    let b = Stub {
        id: "B",
        plan: HashMap::from([
            ("b1", Script::Sized(9, 0.9)),
            ("b2", Script::Fail(SolveOutcome::TimedOut { budget: Duration::from_secs(5) })),
            ("b3", Script::Sized(41, 12.0)),
            ("b4", Script::Fail(SolveOutcome::Unsupported("stub".into()))),
            ("b5", Script::Sized(3, 5.0)),
            ("b6", Script::Sized(7, 0.2)),
        ]),
    };
    let solvers: Vec<Arc<dyn Solver>> = vec![Arc::new(a), Arc::new(b)];
    let limits = Limits { wallclock: Duration::from_secs(30), ..Limits::default() };
    run_suite(dir.path(), &solvers, &limits, 3, &Buckets::default()).unwrap()
}

type Row = (usize, Option<f64>, Option<f64>, Option<usize>, Option<usize>, Vec<&'static str>, Vec<&'static str>);

fn criterion_9() -> Outcome {
    let r = mini_suite();
    let expected: [(&str, Row); 6] = [
        ("b1", (2, Some(0.4), Some(0.9), Some(5), Some(9), vec!["A", "B"], vec!["A", "B"])),
        ("b2", (1, Some(2.0), None, Some(3), Some(3), vec!["A"], vec!["A"])),
        ("b3", (2, Some(12.0), Some(40.0), Some(13), Some(41), vec!["B"], vec!["A"])),
        ("b4", (0, None, None, None, None, vec![], vec![])),
        ("b5", (1, Some(5.0), None, Some(3), Some(3), vec!["B"], vec!["B"])),
        ("b6", (1, Some(0.2), None, Some(7), Some(7), vec!["B"], vec!["B"])),
    ];
    let mut mismatches = Vec::new();
    let summaries: Vec<_> = r.categories.iter().flat_map(|c| c.benchmarks.iter()).collect();
    for (name, want) in &expected {
        let Some(b) = summaries.iter().find(|b| Path::new(&b.benchmark).file_stem().unwrap() == *name) else {
            mismatches.push(format!("{name} missing"));
            continue;
        };
        let got: Row = (
            b.solver_count,
            b.min_time,
            b.max_time,
            b.min_size,
            b.max_size,
            b.fastest.iter().map(|s| if s == "A" { "A" } else { "B" }).collect(),
            b.smallest.iter().map(|s| if s == "A" { "A" } else { "B" }).collect(),
        );
        if &got != want {
            mismatches.push(format!("{name}: got {got:?}"));
        }
    }
    let tallies = |cat: &str| -> Vec<(usize, usize)> {
        r.categories
            .iter()
            .find(|c| c.category == cat)
            .map(|c| c.tallies.iter().map(|t| (t.solved, t.uniquely_solved)).collect())
            .unwrap_or_default()
    };
    for (label, got, want) in [
        ("alpha", tallies("alpha"), vec![(3, 1), (2, 0)]),
        ("beta", tallies("beta"), vec![(0, 0), (2, 2)]),
        ("total", r.totals.iter().map(|t| (t.solved, t.uniquely_solved)).collect(), vec![(3, 1), (4, 2)]),
    ] {
        if got != want {
            mismatches.push(format!("{label} tallies {got:?}"));
        }
    }
    let gate = r.records.iter().find(|x| x.solver == "A" && x.benchmark.ends_with("b5.sl")).unwrap();
    if !(gate.outcome == OutcomeKind::Solved && !gate.syntactic_ok && gate.verdict.starts_with("valid") && !gate.solved()) {
        mismatches.push(format!("grammar gate record {gate:?}"));
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "6 benchmarks x 2 stub solvers: all summary fields and tallies match".to_string()
        } else {
            mismatches.join("; ")
        },
    )
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Outcome {
    let t = parse_term_str("(ite (>= x y) x y)").unwrap();
    if t.size() != 6 {
        return outcome(false, format!("size {}", t.size()));
    }
    let mut corpus: Vec<String> = round_trip_all().into_iter().map(|(_, t)| t).collect();
    corpus.extend([inv_corrected(), hd17(HD17_D0, 8), hd17(HD17_D1, 8), hd17(HD17_D5, 8), STUB_PROBLEM.to_string()]);
    let mut terms = 0;
    for text in &corpus {
        let p = parse_problem_str(text).unwrap();
        let q = parse_problem_str(&print_problem(&p)).unwrap();
        let sizes = |p: &SynthProblem| -> Vec<usize> {
            p.constraints.iter().map(Term::size).chain(p.defined.values().map(|d| d.body.size())).collect()
        };
        if sizes(&p) != sizes(&q) {
            return outcome(false, format!("sizes change under print/parse: {:?} vs {:?}", sizes(&p), sizes(&q)));
        }
        terms += sizes(&p).len();
    }
    let p = parse_problem_str(MAX2).unwrap();
    for (_, _, body, _) in wrong_candidates().into_iter().filter(|c| c.1.starts_with("max2")) {
        let s = parse_solution(&format!("(define-fun max2 ((x Int) (y Int)) Int {body})"), &p).unwrap();
        let again = parse_solution(&print_solution(&s), &p).unwrap();
        if s.total_size() != again.total_size() {
            return outcome(false, format!("{body}: solution size changes"));
        }
        terms += 1;
    }
    outcome(true, format!("(ite (>= x y) x y) has size 6; {terms} corpus terms keep their size through print and parse"))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "frontend round-trip", criterion_1),
        (2, "INV desugaring", criterion_2),
        (3, "evaluator oracle", criterion_3),
        (4, "grammar engine equivalence", criterion_4),
        (5, "enumerative synthesis", criterion_5),
        (6, "enumerative BV", criterion_6),
        (7, "stochastic synthesis", criterion_7),
        (8, "checker honesty", criterion_8),
        (9, "harness semantics", criterion_9),
        (10, "expression-size metric", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (n, name, run) in criteria {
        let o = run();
        println!("criterion {n:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass && !KNOWN_FAILING.contains(&n) {
            unexpected.push(n);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: only the known-failing criteria {KNOWN_FAILING:?} may fail");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {unexpected:?}");
        ExitCode::FAILURE
    }
}
