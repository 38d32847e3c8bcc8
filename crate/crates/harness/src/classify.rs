//! Feature table over a benchmark directory.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use sygus_core::checker::{classify_features, Invocation};
use sygus_core::frontend::GrammarOrigin;
use sygus_core::parse_problem_str;

use crate::run::{discover, HarnessError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassRow {
    pub benchmark: String,
    pub category: String,
    /// "single" or "multiple"; empty when the file did not parse.
    pub invocation: String,
    pub unknowns: usize,
    /// Grammar origin per unknown, comma separated.
    pub grammars: String,
    pub error: Option<String>,
}

fn origin_name(o: GrammarOrigin) -> &'static str {
    match o {
        GrammarOrigin::Explicit => "explicit",
        GrammarOrigin::DefaultLia => "default-lia",
        GrammarOrigin::DefaultInvBool => "default-inv-bool",
    }
}

pub fn classify_text(benchmark: &str, category: &str, text: &str) -> ClassRow {
    match parse_problem_str(text) {
        Ok(p) => {
            let f = classify_features(&p);
            ClassRow {
                benchmark: benchmark.to_string(),
                category: category.to_string(),
                invocation: match f.invocation {
                    Invocation::Single => "single",
                    Invocation::Multiple => "multiple",
                }
                .to_string(),
                unknowns: f.unknown_count,
                grammars: f.origins.values().map(|o| origin_name(*o)).collect::<Vec<_>>().join(","),
                error: None,
            }
        }
        Err(e) => ClassRow {
            benchmark: benchmark.to_string(),
            category: category.to_string(),
            invocation: String::new(),
            unknowns: 0,
            grammars: String::new(),
            error: Some(e.to_string()),
        },
    }
}

pub fn classify_suite(dir: &Path) -> Result<Vec<ClassRow>, HarnessError> {
    discover(dir)?
        .into_iter()
        .map(|(path, category)| {
            let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Io(path.clone(), e))?;
            Ok(classify_text(&path.display().to_string(), &category, &text))
        })
        .collect()
}

pub fn render_classes(rows: &[ClassRow]) -> String {
    let mut s = String::from("| benchmark | category | invocation | unknowns | grammar |\n|---|---|---|---|---|\n");
    for r in rows {
        let inv = r.error.as_deref().map_or(r.invocation.clone(), |e| format!("error: {e}"));
        let _ = writeln!(s, "| {} | {} | {} | {} | {} |", r.benchmark, r.category, inv, r.unknowns, r.grammars);
    }
    s
}
