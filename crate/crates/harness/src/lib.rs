//! Benchmark runner, suite aggregation and reports.

pub mod classify;
pub mod report;
pub mod run;

pub use classify::{classify_suite, classify_text, render_classes, ClassRow};
pub use report::{aggregate, bucket, render_report, Buckets, Format, SuiteReport};
pub use run::{run_benchmark, run_problem, run_suite, EnumSolver, HarnessError, Limits, RunRecord, Solver, StochSolver};
