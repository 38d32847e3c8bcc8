//! SyGuS-IF v1 frontend: commands to a typed [`SynthProblem`], track
//! defaults, invariant-constraint desugaring, and canonical printing.

mod default_grammar;
mod elaborate;
mod parse;
mod print;
mod solution;

pub use default_grammar::{attach_default_grammar, default_grammar};
pub use elaborate::{parse_sort, parse_term_str};
pub use parse::{parse_problem, parse_problem_str};
pub use print::{print_problem, print_solution};
pub use solution::{parse_solution, CandidateSolution};

use indexmap::IndexMap;
use thiserror::Error;

use crate::grammar::{Grammar, GrammarError};
use crate::sexpr::ReadError;
use crate::term::{FunDef, FunDefs, FunctionTable, SortContext, Term, TypeError};
use crate::value::Sort;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Logic {
    Lia,
    Bv,
    Other(String),
}

impl Logic {
    pub fn from_symbol(s: &str) -> Logic {
        match s {
            "LIA" => Logic::Lia,
            "BV" => Logic::Bv,
            other => Logic::Other(other.to_string()),
        }
    }

    pub fn symbol(&self) -> &str {
        match self {
            Logic::Lia => "LIA",
            Logic::Bv => "BV",
            Logic::Other(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Track {
    General,
    Lia,
    Inv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GrammarOrigin {
    Explicit,
    DefaultLia,
    DefaultInvBool,
}

/// A function to synthesize together with its syntactic restriction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownFun {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub ret: Sort,
    pub grammar: Grammar,
    pub origin: GrammarOrigin,
}

impl UnknownFun {
    pub fn param_sorts(&self) -> Vec<Sort> {
        self.params.iter().map(|(_, s)| *s).collect()
    }
}

/// The sugared `inv-constraint` as written, kept for printing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvConstraint {
    pub inv: String,
    pub pre: String,
    pub trans: String,
    pub post: String,
    /// Index of the first of the three generated constraints.
    pub first_constraint: usize,
}

/// A universal variable declaration as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub sort: Sort,
    /// Declared with `declare-primed-var`; `name!` is declared alongside.
    pub primed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthProblem {
    pub logic: Logic,
    pub defined: FunDefs,
    pub unknowns: IndexMap<String, UnknownFun>,
    /// Every universal, primed copies included, in declaration order.
    pub universals: IndexMap<String, Sort>,
    pub constraints: Vec<Term>,
    pub track: Track,
    pub declarations: Vec<VarDecl>,
    /// Unknowns introduced with `synth-inv` (printed back with that command).
    pub inv_names: Vec<String>,
    pub inv_constraint: Option<InvConstraint>,
}

impl SynthProblem {
    /// Sort context with universals, defined functions and unknowns.
    pub fn sort_context(&self) -> SortContext {
        let mut ctx = SortContext::default();
        ctx.vars.extend(self.universals.iter().map(|(k, v)| (k.clone(), *v)));
        for d in self.defined.values() {
            ctx.add_fun(&d.name, d.param_sorts(), d.ret);
        }
        for u in self.unknowns.values() {
            ctx.add_fun(&u.name, u.param_sorts(), u.ret);
        }
        ctx
    }

    pub fn is_unknown(&self, name: &str) -> bool {
        self.unknowns.contains_key(name)
    }

    /// Constraint with every unknown application replaced by the candidate
    /// body (parameters substituted by the actual arguments).
    pub fn substitute_unknowns(&self, t: &Term, s: &CandidateSolution) -> Result<Term, FrontendError> {
        if let Some(missing) = self.unknowns.keys().find(|u| !s.defs.contains_key(*u) && mentions(t, u)) {
            return Err(FrontendError::UnboundUnknown(missing.clone()));
        }
        let table = UnknownsOnly { problem: self, solution: s };
        Ok(crate::term::inline_calls(t, &table))
    }

    /// Every constraint after substituting `s`.
    pub fn substituted_constraints(&self, s: &CandidateSolution) -> Result<Vec<Term>, FrontendError> {
        self.constraints.iter().map(|c| self.substitute_unknowns(c, s)).collect()
    }

    /// Integer and bit-vector literals occurring anywhere in the problem.
    pub fn literals(&self) -> Vec<crate::value::Value> {
        fn walk(t: &Term, out: &mut Vec<crate::value::Value>) {
            use crate::term::TermKind;
            match t.kind() {
                TermKind::Lit(v) => out.push(v.clone()),
                TermKind::Var(_) => {}
                TermKind::App(_, args) => args.iter().for_each(|a| walk(a, out)),
                TermKind::Let(bs, body) => {
                    bs.iter().for_each(|(_, d)| walk(d, out));
                    walk(body, out);
                }
            }
        }
        let mut out = Vec::new();
        for c in &self.constraints {
            walk(c, &mut out);
        }
        for d in self.defined.values() {
            walk(&d.body, &mut out);
        }
        for u in self.unknowns.values() {
            out.extend(u.grammar.literals());
        }
        out
    }
}

fn mentions(t: &Term, f: &str) -> bool {
    t.mentions_function(&|op| op == f)
}

/// Resolves only the unknowns, leaving defined-function calls in place.
struct UnknownsOnly<'a> {
    problem: &'a SynthProblem,
    solution: &'a CandidateSolution,
}

impl FunctionTable for UnknownsOnly<'_> {
    fn lookup(&self, name: &str) -> Option<&FunDef> {
        if self.problem.is_unknown(name) {
            self.solution.defs.get(name)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("malformed {what}: {detail}")]
    Malformed { what: String, detail: String },
    #[error("sort error in `{term}`: expected {expected}, found {found}")]
    SortError { term: String, expected: String, found: String },
    #[error("`{op}` expects {expected} arguments, got {found}")]
    Arity { op: String, expected: String, found: usize },
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("`{0}` is declared more than once")]
    DuplicateDeclaration(String),
    #[error("problem does not end with (check-synth)")]
    MissingCheckSynth,
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("inv-constraint component `{0}` is not a defined function")]
    MissingComponent(String),
    #[error("no default grammar for `{name}`: parameter or result sort {sort} is not supported")]
    UnsupportedDefaultSort { name: String, sort: Sort },
    #[error("only one synth-inv is allowed per problem")]
    MultipleSynthInv,
    #[error("synth-inv requires exactly one inv-constraint")]
    InvConstraintCount,
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("solution does not define unknown `{0}`")]
    MissingUnknown(String),
    #[error("solution for `{0}` does not match its declared signature")]
    SignatureMismatch(String),
    #[error("unknown `{0}` is applied but has no candidate definition")]
    UnboundUnknown(String),
}

impl From<TypeError> for FrontendError {
    fn from(e: TypeError) -> Self {
        match e {
            TypeError::Sort { term, expected, found } => FrontendError::SortError { term, expected, found },
            TypeError::Arity { op, expected, found } => FrontendError::Arity { op, expected, found },
            TypeError::Undeclared(s) => FrontendError::UndeclaredSymbol(s),
        }
    }
}

pub(crate) fn malformed(what: &str, detail: impl std::fmt::Display) -> FrontendError {
    FrontendError::Malformed { what: what.to_string(), detail: detail.to_string() }
}
