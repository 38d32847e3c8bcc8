//! Typed expression trees shared by specifications, candidates and grammars.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ops::{self, OpTypeError};
use crate::sexpr::SExpr;
use crate::value::{Sort, Value};

/// Immutable, cheaply clonable term. Equality and hashing are structural;
/// [`Term::id`] gives node identity for memoization over shared subterms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(Arc<TermKind>);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Var(String),
    Lit(Value),
    App(String, Vec<Term>),
    Let(Vec<(String, Term)>, Term),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term(Arc::new(TermKind::Var(name.into())))
    }

    pub fn lit(v: Value) -> Term {
        Term(Arc::new(TermKind::Lit(v)))
    }

    pub fn app(op: impl Into<String>, args: Vec<Term>) -> Term {
        Term(Arc::new(TermKind::App(op.into(), args)))
    }

    pub fn let_in(bindings: Vec<(String, Term)>, body: Term) -> Term {
        Term(Arc::new(TermKind::Let(bindings, body)))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0
    }

    /// Address of this node; stable while any clone is alive.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn as_var(&self) -> Option<&str> {
        match self.kind() {
            TermKind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_lit(&self) -> Option<&Value> {
        match self.kind() {
            TermKind::Lit(v) => Some(v),
            _ => None,
        }
    }

    /// Number of nodes in the parse tree. Operators, variables and literals
    /// count one each; a `let` counts one for itself plus one per binding site.
    pub fn size(&self) -> usize {
        match self.kind() {
            TermKind::Var(_) | TermKind::Lit(_) => 1,
            TermKind::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            TermKind::Let(bs, body) => {
                1 + bs.len() + bs.iter().map(|(_, t)| t.size()).sum::<usize>() + body.size()
            }
        }
    }

    pub fn to_sexpr(&self) -> SExpr {
        match self.kind() {
            TermKind::Var(v) => SExpr::symbol(v.clone()),
            TermKind::Lit(v) => v.to_sexpr(),
            // Nullary user functions print as bare symbols.
            TermKind::App(op, args) if args.is_empty() => SExpr::symbol(op.clone()),
            TermKind::App(op, args) => {
                let mut items = Vec::with_capacity(args.len() + 1);
                items.push(SExpr::symbol(op.clone()));
                items.extend(args.iter().map(Term::to_sexpr));
                SExpr::List(items)
            }
            TermKind::Let(bs, body) => SExpr::list(vec![
                SExpr::symbol("let"),
                SExpr::List(
                    bs.iter()
                        .map(|(n, t)| SExpr::list(vec![SExpr::symbol(n.clone()), t.to_sexpr()]))
                        .collect(),
                ),
                body.to_sexpr(),
            ]),
        }
    }

    /// Free variables (not let-bound), in sorted order.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    /// Every application whose operator is `f`, outermost first.
    pub fn applications_of<'a>(&'a self, f: &str, out: &mut Vec<&'a Term>) {
        match self.kind() {
            TermKind::Var(_) | TermKind::Lit(_) => {}
            TermKind::App(op, args) => {
                if op == f {
                    out.push(self);
                }
                for a in args {
                    a.applications_of(f, out);
                }
            }
            TermKind::Let(bs, body) => {
                for (_, t) in bs {
                    t.applications_of(f, out);
                }
                body.applications_of(f, out);
            }
        }
    }

    /// True if any application's operator satisfies `pred`.
    pub fn mentions_function(&self, pred: &dyn Fn(&str) -> bool) -> bool {
        match self.kind() {
            TermKind::Var(_) | TermKind::Lit(_) => false,
            TermKind::App(op, args) => pred(op) || args.iter().any(|a| a.mentions_function(pred)),
            TermKind::Let(bs, body) => {
                bs.iter().any(|(_, t)| t.mentions_function(pred)) || body.mentions_function(pred)
            }
        }
    }
}

fn collect_free(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t.kind() {
        TermKind::Var(v) => {
            if !bound.iter().any(|b| b == v) {
                out.insert(v.clone());
            }
        }
        TermKind::Lit(_) => {}
        TermKind::App(_, args) => args.iter().for_each(|a| collect_free(a, bound, out)),
        TermKind::Let(bs, body) => {
            for (_, d) in bs {
                collect_free(d, bound, out);
            }
            let n = bound.len();
            bound.extend(bs.iter().map(|(name, _)| name.clone()));
            collect_free(body, bound, out);
            bound.truncate(n);
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

/// Simultaneous, capture-avoiding substitution of free variables.
pub fn substitute(t: &Term, map: &HashMap<String, Term>) -> Term {
    if map.is_empty() {
        return t.clone();
    }
    match t.kind() {
        TermKind::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        TermKind::Lit(_) => t.clone(),
        TermKind::App(op, args) => Term::app(op.clone(), args.iter().map(|a| substitute(a, map)).collect()),
        TermKind::Let(bs, body) => {
            let defs: Vec<Term> = bs.iter().map(|(_, d)| substitute(d, map)).collect();
            let mut inner: HashMap<String, Term> = map.clone();
            for (name, _) in bs {
                inner.remove(name);
            }
            let body_free = body.free_vars();
            let incoming: HashSet<String> = inner
                .iter()
                .filter(|(k, _)| body_free.contains(*k))
                .flat_map(|(_, v)| v.free_vars())
                .collect();
            let mut new_bindings = Vec::with_capacity(bs.len());
            for ((name, _), def) in bs.iter().zip(defs) {
                if incoming.contains(name) {
                    let fresh = fresh_name(name, &incoming, &body_free);
                    inner.insert(name.clone(), Term::var(fresh.clone()));
                    new_bindings.push((fresh, def));
                } else {
                    new_bindings.push((name.clone(), def));
                }
            }
            Term::let_in(new_bindings, substitute(body, &inner))
        }
    }
}

fn fresh_name(base: &str, avoid_a: &HashSet<String>, avoid_b: &BTreeSet<String>) -> String {
    (0..)
        .map(|i| format!("{base}_{i}"))
        .find(|c| !avoid_a.contains(c) && !avoid_b.contains(c))
        .expect("unbounded counter")
}

/// A named, non-recursive function definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDef {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub ret: Sort,
    pub body: Term,
}

impl FunDef {
    pub fn param_sorts(&self) -> Vec<Sort> {
        self.params.iter().map(|(_, s)| *s).collect()
    }

    /// Body with parameters replaced by `args`.
    pub fn instantiate(&self, args: &[Term]) -> Term {
        let map: HashMap<String, Term> =
            self.params.iter().map(|(n, _)| n.clone()).zip(args.iter().cloned()).collect();
        substitute(&self.body, &map)
    }

    /// `(define-fun name ((p S) ...) R body)`.
    pub fn to_sexpr(&self) -> SExpr {
        SExpr::list(vec![
            SExpr::symbol("define-fun"),
            SExpr::symbol(self.name.clone()),
            SExpr::List(
                self.params
                    .iter()
                    .map(|(n, s)| SExpr::list(vec![SExpr::symbol(n.clone()), s.to_sexpr()]))
                    .collect(),
            ),
            self.ret.to_sexpr(),
            self.body.to_sexpr(),
        ])
    }
}

/// Lookup of user functions by name.
pub trait FunctionTable {
    fn lookup(&self, name: &str) -> Option<&FunDef>;
}

pub type FunDefs = IndexMap<String, FunDef>;

impl FunctionTable for FunDefs {
    fn lookup(&self, name: &str) -> Option<&FunDef> {
        self.get(name)
    }
}

impl FunctionTable for () {
    fn lookup(&self, _: &str) -> Option<&FunDef> {
        None
    }
}

/// First table shadows the second.
impl<A: FunctionTable, B: FunctionTable> FunctionTable for (&A, &B) {
    fn lookup(&self, name: &str) -> Option<&FunDef> {
        self.0.lookup(name).or_else(|| self.1.lookup(name))
    }
}

/// Inlines every call to a function in `table`, innermost arguments first.
/// Calls inside inlined bodies are expanded too (definitions are non-recursive).
pub fn inline_calls(t: &Term, table: &dyn FunctionTable) -> Term {
    match t.kind() {
        TermKind::Var(_) | TermKind::Lit(_) => t.clone(),
        TermKind::App(op, args) => {
            let args: Vec<Term> = args.iter().map(|a| inline_calls(a, table)).collect();
            match table.lookup(op) {
                Some(def) => inline_calls(&def.instantiate(&args), table),
                None => Term::app(op.clone(), args),
            }
        }
        TermKind::Let(bs, body) => Term::let_in(
            bs.iter().map(|(n, d)| (n.clone(), inline_calls(d, table))).collect(),
            inline_calls(body, table),
        ),
    }
}

/// Symbol sorts visible while typing a term.
#[derive(Debug, Clone, Default)]
pub struct SortContext {
    pub vars: HashMap<String, Sort>,
    /// User functions: parameter sorts and result sort.
    pub funs: HashMap<String, (Vec<Sort>, Sort)>,
}

impl SortContext {
    pub fn with_vars<'a>(vars: impl IntoIterator<Item = &'a (String, Sort)>) -> SortContext {
        SortContext { vars: vars.into_iter().cloned().collect(), funs: HashMap::new() }
    }

    pub fn add_fun(&mut self, name: &str, params: Vec<Sort>, ret: Sort) {
        self.funs.insert(name.to_string(), (params, ret));
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("sort error in `{term}`: expected {expected}, found {found}")]
    Sort { term: String, expected: String, found: String },
    #[error("`{op}` expects {expected} arguments, got {found}")]
    Arity { op: String, expected: String, found: usize },
    #[error("undeclared symbol `{0}`")]
    Undeclared(String),
}

/// Infers the unique sort of `t`; bit-vector operators require equal widths.
pub fn infer_sort(t: &Term, ctx: &SortContext) -> Result<Sort, TypeError> {
    infer(t, ctx, &mut Vec::new())
}

fn infer(t: &Term, ctx: &SortContext, scope: &mut Vec<(String, Sort)>) -> Result<Sort, TypeError> {
    match t.kind() {
        TermKind::Var(v) => scope
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, s)| *s)
            .or_else(|| ctx.vars.get(v).copied())
            .or_else(|| ctx.funs.get(v).filter(|(ps, _)| ps.is_empty()).map(|(_, r)| *r))
            .ok_or_else(|| TypeError::Undeclared(v.clone())),
        TermKind::Lit(v) => Ok(v.sort()),
        TermKind::App(op, args) => {
            let sorts = args.iter().map(|a| infer(a, ctx, scope)).collect::<Result<Vec<_>, _>>()?;
            if let Some((params, ret)) = ctx.funs.get(op) {
                if params.len() != sorts.len() {
                    return Err(TypeError::Arity {
                        op: op.clone(),
                        expected: params.len().to_string(),
                        found: sorts.len(),
                    });
                }
                for (i, (p, s)) in params.iter().zip(&sorts).enumerate() {
                    if p != s {
                        return Err(TypeError::Sort {
                            term: args[i].to_string(),
                            expected: p.to_string(),
                            found: s.to_string(),
                        });
                    }
                }
                return Ok(*ret);
            }
            match ops::result_sort(op, &sorts) {
                None => Err(TypeError::Undeclared(op.clone())),
                Some(Ok(s)) => Ok(s),
                Some(Err(OpTypeError::Arity { expected, found })) => {
                    Err(TypeError::Arity { op: op.clone(), expected, found })
                }
                Some(Err(OpTypeError::Arg { index, expected, found })) => Err(TypeError::Sort {
                    term: args[index].to_string(),
                    expected,
                    found: found.to_string(),
                }),
            }
        }
        TermKind::Let(bs, body) => {
            let sorts = bs.iter().map(|(_, d)| infer(d, ctx, scope)).collect::<Result<Vec<_>, _>>()?;
            let n = scope.len();
            scope.extend(bs.iter().map(|(name, _)| name.clone()).zip(sorts));
            let r = infer(body, ctx, scope);
            scope.truncate(n);
            r
        }
    }
}
