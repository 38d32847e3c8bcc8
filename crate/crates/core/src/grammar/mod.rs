//! SyGuS grammars: representation, validation, membership and enumeration.

mod count;
mod derives;
mod enumerate;

pub use count::{Derivation, Filler, Sampler, SamplerError};
pub use derives::derives;
pub use enumerate::{enumerate, for_each_product, size_splits, Enumerator};

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::ops::{self, OpTypeError};
use crate::sexpr::SExpr;
use crate::term::{SortContext, Term};
use crate::value::{Sort, Value};

/// Right-hand side of a production. Leaves are nonterminal references,
/// terminal symbols (parameters or let-bound names), literals, or
/// `(Constant S)` holes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Template {
    NonTerminal(String),
    Var(String),
    Lit(Value),
    Constant(Sort),
    App(String, Vec<Template>),
    Let(Vec<(String, Template)>, Box<Template>),
}

impl Template {
    pub fn to_sexpr(&self) -> SExpr {
        match self {
            Template::NonTerminal(n) | Template::Var(n) => SExpr::symbol(n.clone()),
            Template::Lit(v) => v.to_sexpr(),
            Template::Constant(s) => SExpr::list(vec![SExpr::symbol("Constant"), s.to_sexpr()]),
            Template::App(op, args) if args.is_empty() => SExpr::symbol(op.clone()),
            Template::App(op, args) => {
                let mut items = vec![SExpr::symbol(op.clone())];
                items.extend(args.iter().map(Template::to_sexpr));
                SExpr::List(items)
            }
            Template::Let(bs, body) => SExpr::list(vec![
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

    /// Nodes contributed by the template itself (slots excluded).
    fn cost(&self) -> usize {
        match self {
            Template::NonTerminal(_) | Template::Constant(_) => 0,
            Template::Var(_) | Template::Lit(_) => 1,
            Template::App(_, args) => 1 + args.iter().map(Template::cost).sum::<usize>(),
            Template::Let(bs, body) => {
                1 + bs.len() + bs.iter().map(|(_, t)| t.cost()).sum::<usize>() + body.cost()
            }
        }
    }

    fn collect_slots(&self, index: &dyn Fn(&str) -> usize, out: &mut Vec<Slot>) {
        match self {
            Template::NonTerminal(n) => out.push(Slot::NonTerminal(index(n))),
            Template::Constant(s) => out.push(Slot::Hole(*s)),
            Template::Var(_) | Template::Lit(_) => {}
            Template::App(_, args) => args.iter().for_each(|a| a.collect_slots(index, out)),
            Template::Let(bs, body) => {
                bs.iter().for_each(|(_, t)| t.collect_slots(index, out));
                body.collect_slots(index, out);
            }
        }
    }

    /// Builds a term, taking slot fillers in preorder from `fill`.
    pub fn instantiate(&self, fill: &mut dyn Iterator<Item = Term>) -> Term {
        match self {
            Template::NonTerminal(_) | Template::Constant(_) => {
                fill.next().expect("one filler per template slot")
            }
            Template::Var(v) => Term::var(v.clone()),
            Template::Lit(v) => Term::lit(v.clone()),
            Template::App(op, args) => Term::app(op.clone(), args.iter().map(|a| a.instantiate(fill)).collect()),
            Template::Let(bs, body) => {
                let bindings = bs.iter().map(|(n, t)| (n.clone(), t.instantiate(fill))).collect();
                Term::let_in(bindings, body.instantiate(fill))
            }
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

/// A placeholder position inside a production.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    NonTerminal(usize),
    /// Filled by a single literal of the sort.
    Hole(Sort),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub template: Template,
    cost: usize,
    slots: Vec<Slot>,
}

impl Production {
    pub fn cost(&self) -> usize {
        self.cost
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// A production that is exactly one nonterminal (a chain rule).
    pub fn unit_target(&self) -> Option<usize> {
        match (&self.template, self.slots.as_slice()) {
            (Template::NonTerminal(_), [Slot::NonTerminal(b)]) => Some(*b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonTerminal {
    pub name: String,
    pub sort: Sort,
    pub productions: Vec<Production>,
}

/// A validated grammar. Nonterminals keep their declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    start: usize,
    nonterminals: Vec<NonTerminal>,
    min_sizes: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("unknown nonterminal `{0}`")]
    UnknownNonterminal(String),
    #[error("nonterminal `{0}` declared twice")]
    DuplicateNonterminal(String),
    #[error("production `{production}` of `{nonterminal}`: {reason}")]
    IllSorted { nonterminal: String, production: String, reason: String },
    #[error("start nonterminal `{name}` has sort {found}, expected {expected}")]
    StartSort { name: String, expected: Sort, found: Sort },
}

/// Unvalidated rule as written: name, sort, productions.
pub type RawRule = (String, Sort, Vec<Template>);

impl Grammar {
    /// Validates `rules` under `ctx` (parameters and user functions).
    /// The first rule named `start` is the start symbol. Duplicate
    /// productions are dropped with a warning; unproductive nonterminals
    /// are reported once here.
    pub fn new(start: &str, rules: Vec<RawRule>, ctx: &SortContext) -> Result<Grammar, GrammarError> {
        let mut names: Vec<String> = Vec::new();
        for (n, _, _) in &rules {
            if names.contains(n) {
                return Err(GrammarError::DuplicateNonterminal(n.clone()));
            }
            names.push(n.clone());
        }
        let start_idx = names
            .iter()
            .position(|n| n == start)
            .ok_or_else(|| GrammarError::UnknownNonterminal(start.to_string()))?;
        let sorts: Vec<Sort> = rules.iter().map(|(_, s, _)| *s).collect();
        let lookup = |n: &str| names.iter().position(|m| m == n);

        let mut nonterminals = Vec::with_capacity(rules.len());
        for (name, sort, templates) in rules {
            let mut seen = HashSet::new();
            let mut productions = Vec::new();
            for tpl in templates {
                if !seen.insert(tpl.clone()) {
                    log::warn!("grammar: duplicate production `{tpl}` in `{name}` dropped");
                    continue;
                }
                let found = template_sort(&tpl, &names, &sorts, ctx, &mut Vec::new()).map_err(|reason| {
                    GrammarError::IllSorted { nonterminal: name.clone(), production: tpl.to_string(), reason }
                })?;
                if found != sort {
                    return Err(GrammarError::IllSorted {
                        nonterminal: name.clone(),
                        production: tpl.to_string(),
                        reason: format!("has sort {found}, nonterminal has sort {sort}"),
                    });
                }
                let mut slots = Vec::new();
                tpl.collect_slots(&|n| lookup(n).expect("checked by template_sort"), &mut slots);
                productions.push(Production { cost: tpl.cost(), template: tpl, slots });
            }
            nonterminals.push(NonTerminal { name, sort, productions });
        }
        let min_sizes = compute_min_sizes(&nonterminals);
        for (nt, m) in nonterminals.iter().zip(&min_sizes) {
            if m.is_none() {
                log::warn!("grammar: nonterminal `{}` derives no finite term", nt.name);
            }
        }
        Ok(Grammar { start: start_idx, nonterminals, min_sizes })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn start_name(&self) -> &str {
        &self.nonterminals[self.start].name
    }

    pub fn start_sort(&self) -> Sort {
        self.nonterminals[self.start].sort
    }

    pub fn nonterminals(&self) -> &[NonTerminal] {
        &self.nonterminals
    }

    pub fn nonterminal(&self, idx: usize) -> &NonTerminal {
        &self.nonterminals[idx]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, GrammarError> {
        self.nonterminals
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| GrammarError::UnknownNonterminal(name.to_string()))
    }

    /// Least size of a term derivable from `nt`; `None` if unproductive.
    pub fn min_derivable_size(&self, nt: &str) -> Option<usize> {
        self.index_of(nt).ok().and_then(|i| self.min_sizes[i])
    }

    pub(crate) fn min_size_of(&self, idx: usize) -> Option<usize> {
        self.min_sizes[idx]
    }

    /// Names of nonterminals deriving no finite term.
    pub fn unproductive(&self) -> Vec<&str> {
        self.nonterminals
            .iter()
            .zip(&self.min_sizes)
            .filter(|(_, m)| m.is_none())
            .map(|(n, _)| n.name.as_str())
            .collect()
    }

    pub fn has_constant_holes(&self) -> bool {
        self.nonterminals
            .iter()
            .flat_map(|n| &n.productions)
            .any(|p| p.slots.iter().any(|s| matches!(s, Slot::Hole(_))))
    }

    /// Literal values written directly in productions.
    pub fn literals(&self) -> Vec<Value> {
        fn walk(t: &Template, out: &mut Vec<Value>) {
            match t {
                Template::Lit(v) => out.push(v.clone()),
                Template::App(_, args) => args.iter().for_each(|a| walk(a, out)),
                Template::Let(bs, body) => {
                    bs.iter().for_each(|(_, d)| walk(d, out));
                    walk(body, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        for p in self.nonterminals.iter().flat_map(|n| &n.productions) {
            walk(&p.template, &mut out);
        }
        out
    }

    /// The `((Name Sort (productions...)) ...)` block of a `synth-fun`.
    pub fn to_sexpr(&self) -> SExpr {
        SExpr::List(
            self.nonterminals
                .iter()
                .map(|nt| {
                    SExpr::list(vec![
                        SExpr::symbol(nt.name.clone()),
                        nt.sort.to_sexpr(),
                        SExpr::List(nt.productions.iter().map(|p| p.template.to_sexpr()).collect()),
                    ])
                })
                .collect(),
        )
    }
}

fn template_sort(
    t: &Template,
    names: &[String],
    sorts: &[Sort],
    ctx: &SortContext,
    scope: &mut Vec<(String, Sort)>,
) -> Result<Sort, String> {
    match t {
        Template::NonTerminal(n) => names
            .iter()
            .position(|m| m == n)
            .map(|i| sorts[i])
            .ok_or_else(|| format!("unknown nonterminal `{n}`")),
        Template::Var(v) => scope
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, s)| *s)
            .or_else(|| ctx.vars.get(v).copied())
            .ok_or_else(|| format!("undeclared symbol `{v}`")),
        Template::Lit(v) => Ok(v.sort()),
        Template::Constant(s) => Ok(*s),
        Template::App(op, args) => {
            let arg_sorts = args
                .iter()
                .map(|a| template_sort(a, names, sorts, ctx, scope))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some((params, ret)) = ctx.funs.get(op) {
                if *params != arg_sorts {
                    return Err(format!("`{op}` applied to arguments of the wrong sorts"));
                }
                return Ok(*ret);
            }
            match ops::result_sort(op, &arg_sorts) {
                None => Err(format!("unknown operator `{op}`")),
                Some(Ok(s)) => Ok(s),
                Some(Err(OpTypeError::Arity { expected, found })) => {
                    Err(format!("`{op}` expects {expected} arguments, got {found}"))
                }
                Some(Err(OpTypeError::Arg { index, expected, found })) => {
                    Err(format!("argument {index} of `{op}`: expected {expected}, found {found}"))
                }
            }
        }
        Template::Let(bs, body) => {
            let bsorts = bs
                .iter()
                .map(|(_, d)| template_sort(d, names, sorts, ctx, scope))
                .collect::<Result<Vec<_>, _>>()?;
            let n = scope.len();
            scope.extend(bs.iter().map(|(name, _)| name.clone()).zip(bsorts));
            let r = template_sort(body, names, sorts, ctx, scope);
            scope.truncate(n);
            r
        }
    }
}

fn compute_min_sizes(nts: &[NonTerminal]) -> Vec<Option<usize>> {
    let mut min: Vec<Option<usize>> = vec![None; nts.len()];
    loop {
        let mut changed = false;
        for (i, nt) in nts.iter().enumerate() {
            for p in &nt.productions {
                let mut total = Some(p.cost);
                for s in &p.slots {
                    let part = match s {
                        Slot::Hole(_) => Some(1),
                        Slot::NonTerminal(b) => min[*b],
                    };
                    total = total.zip(part).map(|(a, b)| a + b);
                }
                if let Some(t) = total {
                    if min[i].map_or(true, |m| t < m) {
                        min[i] = Some(t);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return min;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nt(n: &str) -> Template {
        Template::NonTerminal(n.into())
    }

    #[test]
    fn unproductive_nonterminal_has_no_min_size() {
        let rules = vec![("S".to_string(), Sort::Int, vec![Template::App("+".into(), vec![nt("S"), nt("S")])])];
        let g = Grammar::new("S", rules, &SortContext::default()).unwrap();
        assert_eq!(g.min_derivable_size("S"), None);
        assert_eq!(g.unproductive(), vec!["S"]);
    }

    #[test]
    fn ill_sorted_production_is_rejected() {
        let rules = vec![(
            "S".to_string(),
            Sort::Int,
            vec![Template::App("and".into(), vec![Template::Lit(Value::Bool(true)), Template::Lit(Value::Bool(true))])],
        )];
        assert!(matches!(
            Grammar::new("S", rules, &SortContext::default()),
            Err(GrammarError::IllSorted { .. })
        ));
    }

    #[test]
    fn duplicate_productions_are_dropped() {
        let x = Template::Var("x".into());
        let rules = vec![("S".to_string(), Sort::Int, vec![x.clone(), x])];
        let ctx = SortContext::with_vars(&[("x".to_string(), Sort::Int)]);
        let g = Grammar::new("S", rules, &ctx).unwrap();
        assert_eq!(g.nonterminal(0).productions.len(), 1);
    }

    #[test]
    fn undefined_nonterminal_reference_is_rejected() {
        let rules = vec![("S".to_string(), Sort::Int, vec![nt("T")])];
        assert!(Grammar::new("S", rules, &SortContext::default()).is_err());
        let rules = vec![("S".to_string(), Sort::Int, vec![Template::Lit(Value::int(1))])];
        assert_eq!(
            Grammar::new("Q", rules, &SortContext::default()),
            Err(GrammarError::UnknownNonterminal("Q".into()))
        );
    }

    #[test]
    fn let_production_costs_let_and_binding_sites() {
        // (let ((z U)) (+ z z)): let + site + (+ z z) = 5 own nodes, one slot.
        let tpl = Template::Let(
            vec![("z".into(), nt("U"))],
            Box::new(Template::App("+".into(), vec![Template::Var("z".into()), Template::Var("z".into())])),
        );
        assert_eq!(tpl.cost(), 5);
    }
}
