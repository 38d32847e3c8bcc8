use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use sygus_core::checker::{check_semantic, check_syntactic, Bounds, CheckStrategy, VerificationResult};
use sygus_core::value::format_valuation;
use sygus_core::{parse_problem_str, parse_solution, print_problem, SynthProblem};
use sygus_harness::{
    classify_suite, render_classes, render_report, run_problem, run_suite, Buckets, EnumSolver, Format, Limits,
    Solver, StochSolver,
};
use sygus_solvers::{EnumConfig, StochConfig};

#[derive(Parser)]
#[command(name = "sygus", version, about = "Parse, check, solve and benchmark SyGuS problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the problem in canonical form.
    Parse { file: PathBuf },
    /// Check a candidate solution against a problem.
    Check {
        file: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// SMT solver command run after the finite check.
        #[arg(long, env = "SYGUS_SMT")]
        smt: Option<String>,
        /// Integers range over [-N, N].
        #[arg(long, default_value_t = 8)]
        exhaustive_bound: i64,
        /// Sample this many random points instead of the grid.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Synthesize and print a solution.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Strategy::Enum)]
        strategy: Strategy,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seconds.
        #[arg(long, default_value_t = 3600.0)]
        timeout: f64,
        #[arg(long, env = "SYGUS_SMT")]
        smt: Option<String>,
    },
    /// Run solvers over every .sl file below a directory.
    Bench {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "enum,stoch")]
        solvers: Vec<Strategy>,
        #[arg(long, default_value_t = 3600.0)]
        timeout: f64,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Output file; the extension picks csv, json or md.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, env = "SYGUS_SMT")]
        smt: Option<String>,
    },
    /// Tabulate invocation class, unknown count and grammar origin.
    Classify { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Enum,
    Stoch,
}

fn read_problem(path: &Path) -> Result<SynthProblem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_problem_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn verifier(smt: Option<&str>, base: CheckStrategy, timeout: Duration) -> CheckStrategy {
    match smt {
        Some(cmd) => CheckStrategy::Layered(vec![base, CheckStrategy::ExternalSmt { command: cmd.to_string(), timeout }]),
        None => base,
    }
}

fn solver(s: Strategy, max_size: Option<usize>, seed: u64, budget: Duration, verifier: CheckStrategy) -> Arc<dyn Solver> {
    match s {
        Strategy::Enum => {
            let mut cfg = EnumConfig { budget, verifier, ..EnumConfig::default() };
            if let Some(m) = max_size {
                cfg.max_size = m;
            }
            Arc::new(EnumSolver(cfg))
        }
        Strategy::Stoch => Arc::new(StochSolver(StochConfig { seed, budget, verifier, ..StochConfig::default() })),
    }
}

fn seconds(s: f64) -> Result<Duration> {
    if !(s > 0.0 && s.is_finite()) {
        bail!("timeout must be a positive number of seconds");
    }
    Ok(Duration::from_secs_f64(s))
}

/// Ok(true) maps to exit code 0, Ok(false) to 1, errors to 2.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Parse { file } => {
            let p = read_problem(&file)?;
            print!("{}", print_problem(&p));
            Ok(true)
        }
        Command::Check { file, solution, smt, exhaustive_bound, samples, seed } => {
            let p = read_problem(&file)?;
            let text = std::fs::read_to_string(&solution).with_context(|| format!("reading {}", solution.display()))?;
            let s = parse_solution(&text, &p).context("parsing solution")?;
            let bounds = Bounds::int_range(-exhaustive_bound, exhaustive_bound);
            let base = match samples {
                Some(count) => CheckStrategy::RandomSample { count, seed, bounds },
                None => CheckStrategy::ExhaustiveSmall(bounds),
            };
            let strategy = verifier(smt.as_deref(), base, Duration::from_secs(60));
            let syntax = check_syntactic(&p, &s);
            for (f, ok) in &syntax {
                println!("grammar {f}: {}", if *ok { "ok" } else { "violated" });
            }
            let verdict = check_semantic(&p, &s, &strategy)?;
            println!("verdict: {}", verdict.label());
            match &verdict {
                VerificationResult::CounterExample { valuation, constraint } => {
                    println!("counterexample (constraint {constraint}): {}", format_valuation(valuation));
                }
                VerificationResult::Unknown(reason) => println!("reason: {reason:?}"),
                VerificationResult::Valid(_) => {}
            }
            Ok(verdict.is_valid() && syntax.values().all(|ok| *ok))
        }
        Command::Solve { file, strategy, max_size, seed, timeout, smt } => {
            let p = read_problem(&file)?;
            let budget = seconds(timeout)?;
            let v = verifier(smt.as_deref(), CheckStrategy::default(), budget);
            let limits = Limits { wallclock: budget, verifier: v.clone() };
            let s = solver(strategy, max_size, seed, budget, v);
            let r = run_problem(&p, &file.display().to_string(), "", s, &limits);
            match &r.solution {
                Some(text) => print!("{text}"),
                None => eprintln!("{:?}: {}", r.outcome, r.detail),
            }
            eprintln!("elapsed {:.3}s, grammar {}, verdict {}", r.elapsed, r.syntactic_ok, r.verdict);
            Ok(r.solved())
        }
        Command::Bench { dir, solvers, timeout, parallel, report, smt } => {
            let budget = seconds(timeout)?;
            let v = verifier(smt.as_deref(), CheckStrategy::default(), budget);
            let limits = Limits { wallclock: budget, verifier: v.clone() };
            let list: Vec<Arc<dyn Solver>> = solvers.iter().map(|s| solver(*s, None, 0, budget, v.clone())).collect();
            let r = run_suite(&dir, &list, &limits, parallel, &Buckets::default())?;
            if let Some(out) = report {
                let ext = out.extension().and_then(|e| e.to_str()).unwrap_or("");
                let Some(format) = Format::from_extension(ext) else {
                    bail!("report extension must be csv, json or md");
                };
                std::fs::write(&out, render_report(&r, format)).with_context(|| format!("writing {}", out.display()))?;
            }
            print!("{}", String::from_utf8_lossy(&render_report(&r, Format::Markdown)));
            Ok(true)
        }
        Command::Classify { dir } => {
            print!("{}", render_classes(&classify_suite(&dir)?));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
