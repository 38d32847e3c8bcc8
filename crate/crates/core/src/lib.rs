//! Core of the SyGuS toolkit: S-expressions, sorts and values, typed terms
//! and their evaluation, grammars, the SyGuS-IF frontend and the solution
//! checker.

pub mod checker;
pub mod eval;
pub mod frontend;
pub mod grammar;
pub mod ops;
pub mod sexpr;
pub mod term;
pub mod value;

pub use eval::{evaluate, EvalError};
pub use frontend::{parse_problem_str, parse_solution, print_problem, print_solution, CandidateSolution, SynthProblem};
pub use term::Term;
pub use value::{Sort, Valuation, Value};
