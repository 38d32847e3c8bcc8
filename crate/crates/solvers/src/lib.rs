//! Two baseline counterexample-guided synthesizers: size-ordered
//! enumeration with observational-equivalence pruning, and a
//! Metropolis-Hastings walk over fixed-size derivations.

pub mod cegis;
pub mod enumerative;
pub mod stochastic;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use sygus_core::CandidateSolution;

pub use cegis::{constant_pool, ExampleSet};
pub use enumerative::{solve_enumerative, solve_enumerative_until, EnumConfig};
pub use stochastic::{solve_stochastic, solve_stochastic_traced, StochConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// `sizes` holds the body size of each unknown in problem order.
    Solved { solution: CandidateSolution, elapsed: Duration, sizes: Vec<usize> },
    Exhausted { max_size: usize },
    TimedOut { budget: Duration },
    /// The problem is outside what the solver handles.
    Unsupported(String),
}

impl SolveOutcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, SolveOutcome::Solved { .. })
    }

    pub fn solution(&self) -> Option<&CandidateSolution> {
        match self {
            SolveOutcome::Solved { solution, .. } => Some(solution),
            _ => None,
        }
    }

    pub fn total_size(&self) -> Option<usize> {
        match self {
            SolveOutcome::Solved { sizes, .. } => Some(sizes.iter().sum()),
            _ => None,
        }
    }
}

/// Wallclock budget plus an external cancel flag, polled between
/// candidates.
#[derive(Debug, Clone)]
pub struct Deadline {
    start: Instant,
    budget: Duration,
    cancel: Option<Arc<AtomicBool>>,
}

impl Deadline {
    pub fn new(budget: Duration) -> Self {
        Deadline { start: Instant::now(), budget, cancel: None }
    }

    pub fn with_cancel(budget: Duration, cancel: Arc<AtomicBool>) -> Self {
        Deadline { start: Instant::now(), budget, cancel: Some(cancel) }
    }

    pub fn expired(&self) -> bool {
        self.start.elapsed() >= self.budget || self.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed))
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn budget(&self) -> Duration {
        self.budget
    }
}
