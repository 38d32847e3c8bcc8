//! Aggregating run records into per-category tables and rendering them.

use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::run::RunRecord;

/// Upper bounds of the pseudo-logarithmic buckets; values above the last
/// bound fall in one final open bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Buckets {
    pub time: Vec<f64>,
    pub size: Vec<f64>,
}

impl Default for Buckets {
    fn default() -> Self {
        Buckets {
            time: vec![1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0, 3600.0],
            size: vec![1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0],
        }
    }
}

/// Index of the first bucket whose bound is at least `x`.
pub fn bucket(bounds: &[f64], x: f64) -> usize {
    bounds.iter().position(|b| x <= *b).unwrap_or(bounds.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverTally {
    pub solver: String,
    pub solved: usize,
    pub uniquely_solved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub benchmark: String,
    pub solver_count: usize,
    /// Fastest solving time; `None` (rendered ∞) if nobody solved it.
    pub min_time: Option<f64>,
    /// Slowest time; `None` (rendered ∞) if any solver failed on it.
    pub max_time: Option<f64>,
    pub min_size: Option<usize>,
    pub max_size: Option<usize>,
    /// Solvers whose time is in the same bucket as the fastest.
    pub fastest: Vec<String>,
    /// Solvers whose size is in the same bucket as the smallest.
    pub smallest: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub category: String,
    pub tallies: Vec<SolverTally>,
    pub benchmarks: Vec<BenchmarkSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub solvers: Vec<String>,
    pub totals: Vec<SolverTally>,
    pub categories: Vec<CategoryReport>,
    pub records: Vec<RunRecord>,
}

fn summarize(benchmark: &str, runs: &[&RunRecord], buckets: &Buckets) -> BenchmarkSummary {
    let solved: Vec<&RunRecord> = runs.iter().copied().filter(|r| r.solved()).collect();
    let min_time = solved.iter().map(|r| r.elapsed).reduce(f64::min);
    let max_time = if solved.len() == runs.len() { solved.iter().map(|r| r.elapsed).reduce(f64::max) } else { None };
    let sizes: Vec<usize> = solved.iter().filter_map(|r| r.size).collect();
    let min_size = sizes.iter().copied().min();
    let close = |best: Option<f64>, bounds: &[f64], key: &dyn Fn(&RunRecord) -> Option<f64>| -> Vec<String> {
        let Some(best) = best else { return Vec::new() };
        let b = bucket(bounds, best);
        let mut names: Vec<String> = solved
            .iter()
            .filter(|r| key(r).is_some_and(|x| bucket(bounds, x) == b))
            .map(|r| r.solver.clone())
            .collect();
        names.sort();
        names
    };
    BenchmarkSummary {
        benchmark: benchmark.to_string(),
        solver_count: solved.len(),
        min_time,
        max_time,
        min_size,
        max_size: sizes.iter().copied().max(),
        fastest: close(min_time, &buckets.time, &|r| Some(r.elapsed)),
        smallest: close(min_size.map(|s| s as f64), &buckets.size, &|r| r.size.map(|s| s as f64)),
    }
}

/// Builds the report. Records are sorted first, so the result does not
/// depend on the order runs finished in.
pub fn aggregate(solvers: &[String], mut records: Vec<RunRecord>, buckets: &Buckets) -> SuiteReport {
    records.sort_by(|a, b| (&a.category, &a.benchmark, &a.solver).cmp(&(&b.category, &b.benchmark, &b.solver)));
    let mut by_cat: IndexMap<&str, IndexMap<&str, Vec<&RunRecord>>> = IndexMap::new();
    for r in &records {
        by_cat.entry(&r.category).or_default().entry(&r.benchmark).or_default().push(r);
    }
    let tally = |s: &str, sums: &[BenchmarkSummary], runs: &[&RunRecord]| SolverTally {
        solver: s.to_string(),
        solved: runs.iter().filter(|r| r.solver == s && r.solved()).count(),
        uniquely_solved: sums
            .iter()
            .filter(|b| b.solver_count == 1)
            .filter(|b| runs.iter().any(|r| r.benchmark == b.benchmark && r.solver == s && r.solved()))
            .count(),
    };
    let mut categories = Vec::new();
    let mut all_sums = Vec::new();
    for (cat, benches) in &by_cat {
        let sums: Vec<BenchmarkSummary> = benches.iter().map(|(b, runs)| summarize(b, runs, buckets)).collect();
        let runs: Vec<&RunRecord> = benches.values().flatten().copied().collect();
        let tallies = solvers.iter().map(|s| tally(s, &sums, &runs)).collect();
        all_sums.extend(sums.iter().cloned());
        categories.push(CategoryReport { category: cat.to_string(), tallies, benchmarks: sums });
    }
    let all_runs: Vec<&RunRecord> = records.iter().collect();
    let totals = solvers.iter().map(|s| tally(s, &all_sums, &all_runs)).collect();
    SuiteReport { solvers: solvers.to_vec(), totals, categories, records }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl Format {
    /// From a file extension: csv, json, md or markdown.
    pub fn from_extension(ext: &str) -> Option<Format> {
        match ext {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "md" | "markdown" => Some(Format::Markdown),
            _ => None,
        }
    }
}

/// CSV columns, one row per benchmark.
pub const CSV_HEADER: [&str; 9] =
    ["category", "benchmark", "solver_count", "min_time", "max_time", "min_size", "max_size", "fastest", "smallest"];

fn time_cell(t: Option<f64>) -> String {
    t.map_or_else(|| "∞".to_string(), |t| format!("{t:.3}"))
}

fn size_cell(s: Option<usize>) -> String {
    s.map_or_else(|| "∞".to_string(), |s| s.to_string())
}

pub fn render_report(r: &SuiteReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => serde_json::to_vec_pretty(r).expect("report serializes"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for c in &r.categories {
                for b in &c.benchmarks {
                    w.write_record([
                        c.category.clone(),
                        b.benchmark.clone(),
                        b.solver_count.to_string(),
                        time_cell(b.min_time),
                        time_cell(b.max_time),
                        size_cell(b.min_size),
                        size_cell(b.max_size),
                        b.fastest.join(";"),
                        b.smallest.join(";"),
                    ])
                    .expect("in-memory write");
                }
            }
            w.into_inner().expect("in-memory flush")
        }
        Format::Markdown => {
            let mut s = String::from("# Suite report\n\n| solver | solved | uniquely solved |\n|---|---|---|\n");
            for t in &r.totals {
                let _ = writeln!(s, "| {} | {} | {} |", t.solver, t.solved, t.uniquely_solved);
            }
            for c in &r.categories {
                let _ = write!(s, "\n## {}\n\n| solver | solved | uniquely solved |\n|---|---|---|\n", c.category);
                for t in &c.tallies {
                    let _ = writeln!(s, "| {} | {} | {} |", t.solver, t.solved, t.uniquely_solved);
                }
                s.push_str("\n| benchmark | solvers | min time | max time | min size | max size | fastest | smallest |\n");
                s.push_str("|---|---|---|---|---|---|---|---|\n");
                for b in &c.benchmarks {
                    let _ = writeln!(
                        s,
                        "| {} | {} | {} | {} | {} | {} | {} | {} |",
                        b.benchmark,
                        b.solver_count,
                        time_cell(b.min_time),
                        time_cell(b.max_time),
                        size_cell(b.min_size),
                        size_cell(b.max_size),
                        b.fastest.join(", "),
                        b.smallest.join(", ")
                    );
                }
            }
            s.into_bytes()
        }
    }
}
