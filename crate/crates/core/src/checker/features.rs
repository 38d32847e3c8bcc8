use indexmap::IndexMap;

use crate::frontend::{GrammarOrigin, SynthProblem, Track};
use crate::term::{Term, TermKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Invocation {
    Single,
    Multiple,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSet {
    pub invocation: Invocation,
    pub unknown_count: usize,
    pub origins: IndexMap<String, GrammarOrigin>,
    pub track: Track,
}

/// Single invocation means every application of each unknown, across all
/// constraints, has the same argument tuple.
pub fn classify_features(p: &SynthProblem) -> FeatureSet {
    let single = p.unknowns.keys().all(|f| {
        let mut apps: Vec<&Term> = Vec::new();
        for c in &p.constraints {
            c.applications_of(f, &mut apps);
        }
        let args = |t: &Term| match t.kind() {
            TermKind::App(_, a) => a.clone(),
            _ => unreachable!("applications_of returns applications"),
        };
        apps.windows(2).all(|w| args(w[0]) == args(w[1]))
    });
    FeatureSet {
        invocation: if single { Invocation::Single } else { Invocation::Multiple },
        unknown_count: p.unknowns.len(),
        origins: p.unknowns.values().map(|u| (u.name.clone(), u.origin)).collect(),
        track: p.track,
    }
}
