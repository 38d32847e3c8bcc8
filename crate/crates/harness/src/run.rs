//! Running solvers on benchmark files under a wallclock limit.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use sygus_core::checker::{check_semantic, check_syntactic, CheckStrategy};
use sygus_core::{parse_problem_str, print_solution, SynthProblem};
use sygus_solvers::{
    solve_enumerative_until, solve_stochastic_traced, Deadline, EnumConfig, SolveOutcome, StochConfig,
};

use crate::report::{aggregate, Buckets, SuiteReport};

/// A synthesizer the harness can drive. Implementations must poll
/// `deadline` and return soon after it expires.
pub trait Solver: Send + Sync {
    fn id(&self) -> &str;
    fn solve(&self, p: &SynthProblem, deadline: &Deadline) -> SolveOutcome;
}

pub struct EnumSolver(pub EnumConfig);

impl Solver for EnumSolver {
    fn id(&self) -> &str {
        "enum"
    }

    fn solve(&self, p: &SynthProblem, deadline: &Deadline) -> SolveOutcome {
        solve_enumerative_until(p, &self.0, deadline)
    }
}

pub struct StochSolver(pub StochConfig);

impl Solver for StochSolver {
    fn id(&self) -> &str {
        "stoch"
    }

    fn solve(&self, p: &SynthProblem, deadline: &Deadline) -> SolveOutcome {
        solve_stochastic_traced(p, &self.0, deadline).0
    }
}

#[derive(Debug, Clone)]
pub struct Limits {
    pub wallclock: Duration,
    /// Used for the semantic post-check of returned solutions.
    pub verifier: CheckStrategy,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { wallclock: Duration::from_secs(3600), verifier: CheckStrategy::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeKind {
    Solved,
    Exhausted,
    TimedOut,
    Unsupported,
    ParseFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub benchmark: String,
    pub category: String,
    pub solver: String,
    pub outcome: OutcomeKind,
    /// Error text for failures, otherwise empty.
    pub detail: String,
    /// Printed `define-fun`s when solved.
    pub solution: Option<String>,
    pub syntactic_ok: bool,
    /// Checker label, or "unchecked" when nothing was returned.
    pub verdict: String,
    /// Solver time in seconds; parsing and checking are excluded.
    pub elapsed: f64,
    pub size: Option<usize>,
}

impl RunRecord {
    /// Returned a solution that passed the grammar check and then the
    /// semantic check.
    pub fn solved(&self) -> bool {
        self.outcome == OutcomeKind::Solved
            && self.syntactic_ok
            && matches!(self.verdict.as_str(), "valid" | "valid-on-budget")
    }

    fn failed(benchmark: &str, category: &str, solver: &str, outcome: OutcomeKind, detail: String, elapsed: f64) -> Self {
        RunRecord {
            benchmark: benchmark.to_string(),
            category: category.to_string(),
            solver: solver.to_string(),
            outcome,
            detail,
            solution: None,
            syntactic_ok: false,
            verdict: "unchecked".into(),
            elapsed,
            size: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no .sl benchmarks under {0}")]
    EmptySuite(PathBuf),
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
}

/// Runs `solver` on an already parsed problem. The solver runs on its own
/// thread; at the limit it is told to stop and the run is recorded as
/// timed out whether or not it has returned.
pub fn run_problem(
    p: &SynthProblem,
    benchmark: &str,
    category: &str,
    solver: Arc<dyn Solver>,
    limits: &Limits,
) -> RunRecord {
    let cancel = Arc::new(AtomicBool::new(false));
    let deadline = Deadline::with_cancel(limits.wallclock, cancel.clone());
    let (tx, rx) = mpsc::channel();
    let problem = p.clone();
    let worker = solver.clone();
    let start = Instant::now();
    thread::spawn(move || {
        let out = worker.solve(&problem, &deadline);
        let _ = tx.send((out, start.elapsed()));
    });
    let id = solver.id().to_string();
    let (outcome, elapsed) = match rx.recv_timeout(limits.wallclock) {
        Ok(r) => r,
        Err(_) => {
            cancel.store(true, Ordering::Relaxed);
            (SolveOutcome::TimedOut { budget: limits.wallclock }, limits.wallclock)
        }
    };
    let secs = elapsed.as_secs_f64();
    match outcome {
        // The solver's own clock; it excludes thread start-up.
        SolveOutcome::Solved { solution, elapsed, .. } => {
            let syntactic_ok = check_syntactic(p, &solution).values().all(|ok| *ok);
            let verdict = match check_semantic(p, &solution, &limits.verifier) {
                Ok(v) => v.label().to_string(),
                Err(e) => format!("error: {e}"),
            };
            RunRecord {
                benchmark: benchmark.to_string(),
                category: category.to_string(),
                solver: id,
                outcome: OutcomeKind::Solved,
                detail: String::new(),
                solution: Some(print_solution(&solution)),
                syntactic_ok,
                verdict,
                elapsed: elapsed.as_secs_f64(),
                size: Some(solution.total_size()),
            }
        }
        SolveOutcome::Exhausted { max_size } => RunRecord::failed(
            benchmark,
            category,
            &id,
            OutcomeKind::Exhausted,
            format!("no solution up to size {max_size}"),
            secs,
        ),
        SolveOutcome::TimedOut { .. } => {
            RunRecord::failed(benchmark, category, &id, OutcomeKind::TimedOut, String::new(), secs)
        }
        SolveOutcome::Unsupported(why) => {
            RunRecord::failed(benchmark, category, &id, OutcomeKind::Unsupported, why, secs)
        }
    }
}

/// Parses `path` and runs `solver` on it. Unreadable or malformed files
/// give a ParseFailure record.
pub fn run_benchmark(path: &Path, category: &str, solver: Arc<dyn Solver>, limits: &Limits) -> RunRecord {
    let name = path.display().to_string();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return RunRecord::failed(&name, category, solver.id(), OutcomeKind::ParseFailure, e.to_string(), 0.0),
    };
    match parse_problem_str(&text) {
        Ok(p) => run_problem(&p, &name, category, solver, limits),
        Err(e) => RunRecord::failed(&name, category, solver.id(), OutcomeKind::ParseFailure, e.to_string(), 0.0),
    }
}

/// `.sl` files below `dir` with their category: the first directory under
/// `dir` on the way to the file, or "uncategorized" for files directly in
/// `dir`. Sorted by path.
pub fn discover(dir: &Path) -> Result<Vec<(PathBuf, String)>, HarnessError> {
    fn walk(d: &Path, out: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
        let entries = std::fs::read_dir(d).map_err(|e| HarnessError::Io(d.to_path_buf(), e))?;
        for entry in entries {
            let path = entry.map_err(|e| HarnessError::Io(d.to_path_buf(), e))?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else if path.extension().is_some_and(|x| x == "sl") {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, &mut files)?;
    files.sort();
    Ok(files
        .into_iter()
        .map(|f| {
            let rel = f.strip_prefix(dir).unwrap_or(&f);
            let mut parts = rel.components();
            let first = parts.next().map(|c| c.as_os_str().to_string_lossy().into_owned());
            let category = match (first, parts.next()) {
                (Some(c), Some(_)) => c,
                _ => "uncategorized".to_string(),
            };
            (f, category)
        })
        .collect())
}

/// Every benchmark under `dir` against every solver, at most `parallelism`
/// runs at a time.
pub fn run_suite(
    dir: &Path,
    solvers: &[Arc<dyn Solver>],
    limits: &Limits,
    parallelism: usize,
    buckets: &Buckets,
) -> Result<SuiteReport, HarnessError> {
    let files = discover(dir)?;
    if files.is_empty() {
        return Err(HarnessError::EmptySuite(dir.to_path_buf()));
    }
    let jobs: VecDeque<(PathBuf, String, Arc<dyn Solver>)> = files
        .iter()
        .flat_map(|(f, c)| solvers.iter().map(move |s| (f.clone(), c.clone(), s.clone())))
        .collect();
    let jobs = Mutex::new(jobs);
    let records = Mutex::new(Vec::new());
    thread::scope(|scope| {
        for _ in 0..parallelism.max(1) {
            scope.spawn(|| loop {
                let Some((path, category, solver)) = jobs.lock().expect("job queue").pop_front() else {
                    break;
                };
                log::info!("running {} on {}", solver.id(), path.display());
                let r = run_benchmark(&path, &category, solver, limits);
                records.lock().expect("record list").push(r);
            });
        }
    });
    let records = records.into_inner().expect("record list");
    let ids: Vec<String> = solvers.iter().map(|s| s.id().to_string()).collect();
    Ok(aggregate(&ids, records, buckets))
}
