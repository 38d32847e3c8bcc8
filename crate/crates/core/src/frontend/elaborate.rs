//! S-expressions to sorted terms. Integer numerals in bit-vector positions
//! are read as bit-vector literals of the surrounding width, and `(- n)`
//! is folded into a negative literal.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::{malformed, FrontendError};
use crate::ops::{self, OpTypeError};
use crate::sexpr::{read_sexprs, Atom, SExpr};
use crate::term::{SortContext, Term};
use crate::value::{Sort, Value};

/// `Int`, `Bool`, `(BitVec w)` or the SMT-LIB `(_ BitVec w)`.
pub fn parse_sort(e: &SExpr) -> Result<Sort, FrontendError> {
    match e {
        SExpr::Atom(Atom::Symbol(s)) if s == "Int" => Ok(Sort::Int),
        SExpr::Atom(Atom::Symbol(s)) if s == "Bool" => Ok(Sort::Bool),
        SExpr::List(items) => {
            let width = match items.as_slice() {
                [h, SExpr::Atom(Atom::Int(w))] if h.as_symbol() == Some("BitVec") => w,
                [u, h, SExpr::Atom(Atom::Int(w))]
                    if u.as_symbol() == Some("_") && h.as_symbol() == Some("BitVec") =>
                {
                    w
                }
                _ => return Err(malformed("sort", e)),
            };
            match width.to_u32() {
                Some(w) if (1..=crate::sexpr::MAX_BV_WIDTH).contains(&w) => Ok(Sort::BitVec(w)),
                _ => Err(malformed("sort", format!("unsupported bit-vector width {width}"))),
            }
        }
        _ => Err(malformed("sort", e)),
    }
}

/// Reads one term without sort information: symbols become variables or
/// operators, numerals stay integers. Intended for tests and tooling.
pub fn parse_term_str(text: &str) -> Result<Term, FrontendError> {
    let es = read_sexprs(text)?;
    match es.as_slice() {
        [e] => raw_term(e),
        _ => Err(malformed("term", format!("expected one expression, got {}", es.len()))),
    }
}

fn raw_term(e: &SExpr) -> Result<Term, FrontendError> {
    if let Some(n) = numeral(e) {
        return Ok(Term::lit(Value::Int(n)));
    }
    match e {
        SExpr::Atom(Atom::Symbol(s)) => Ok(Term::var(s.clone())),
        SExpr::Atom(a) => atom_literal(a, None),
        SExpr::List(items) => match items.as_slice() {
            [h, SExpr::List(bs), body] if h.as_symbol() == Some("let") => {
                let bindings = bs
                    .iter()
                    .map(|b| match b.as_list() {
                        Some([n, d]) => {
                            let name = n.as_symbol().ok_or_else(|| malformed("let binding", b))?;
                            Ok((name.to_string(), raw_term(d)?))
                        }
                        _ => Err(malformed("let binding", b)),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Term::let_in(bindings, raw_term(body)?))
            }
            [h, rest @ ..] => {
                let op = h.as_symbol().ok_or_else(|| malformed("application", e))?;
                Ok(Term::app(op, rest.iter().map(raw_term).collect::<Result<_, _>>()?))
            }
            [] => Err(malformed("term", "()")),
        },
    }
}

/// An integer numeral: `n`, `-n` or `(- n)`.
pub(crate) fn numeral(e: &SExpr) -> Option<BigInt> {
    match e {
        SExpr::Atom(Atom::Int(n)) => Some(n.clone()),
        SExpr::List(items) => match items.as_slice() {
            [h, SExpr::Atom(Atom::Int(n))] if h.as_symbol() == Some("-") && !n.is_negative() => Some(-n),
            _ => None,
        },
        _ => None,
    }
}

fn atom_literal(a: &Atom, expected: Option<Sort>) -> Result<Term, FrontendError> {
    Ok(Term::lit(match a {
        Atom::Int(n) => numeral_value(n, expected)?,
        Atom::BitVec { width, bits } => Value::bv(*width, *bits),
        Atom::Bool(b) => Value::Bool(*b),
        Atom::Symbol(s) => return Err(malformed("literal", s)),
    }))
}

fn numeral_value(n: &BigInt, expected: Option<Sort>) -> Result<Value, FrontendError> {
    match expected {
        Some(Sort::BitVec(w)) => {
            let fits = !n.is_negative() && n.bits() <= u64::from(w);
            match n.to_u64() {
                Some(bits) if fits => Ok(Value::bv(w, bits)),
                _ => Err(FrontendError::SortError {
                    term: n.to_string(),
                    expected: Sort::BitVec(w).to_string(),
                    found: "Int".into(),
                }),
            }
        }
        _ => Ok(Value::Int(n.clone())),
    }
}

/// A let-bound name: either kept as a variable or replaced by its
/// definition when lets are being desugared.
struct Binding {
    name: String,
    sort: Sort,
    replacement: Term,
}

pub(crate) struct Elaborator<'a> {
    pub ctx: &'a SortContext,
    /// Substitute let definitions instead of keeping `let` nodes.
    pub desugar_let: bool,
}

impl Elaborator<'_> {
    pub fn term(&self, e: &SExpr, expected: Option<Sort>) -> Result<(Term, Sort), FrontendError> {
        self.elab(e, expected, &mut Vec::new())
    }

    /// Elaborates and requires the given sort.
    pub fn term_of_sort(&self, e: &SExpr, sort: Sort) -> Result<Term, FrontendError> {
        let (t, s) = self.term(e, Some(sort))?;
        if s != sort {
            return Err(FrontendError::SortError { term: e.to_string(), expected: sort.to_string(), found: s.to_string() });
        }
        Ok(t)
    }

    fn elab(&self, e: &SExpr, expected: Option<Sort>, scope: &mut Vec<Binding>) -> Result<(Term, Sort), FrontendError> {
        if let Some(n) = numeral(e) {
            let v = numeral_value(&n, expected)?;
            let s = v.sort();
            return Ok((Term::lit(v), s));
        }
        match e {
            SExpr::Atom(Atom::Symbol(s)) => self.symbol(s, scope),
            SExpr::Atom(a) => {
                let t = atom_literal(a, expected)?;
                let s = t.as_lit().expect("literal").sort();
                Ok((t, s))
            }
            SExpr::List(items) => match items.as_slice() {
                [] => Err(malformed("term", "()")),
                [h, SExpr::List(bs), body] if h.as_symbol() == Some("let") => self.let_form(bs, body, expected, scope),
                [u, SExpr::Atom(Atom::Symbol(bv)), SExpr::Atom(Atom::Int(w))]
                    if u.as_symbol() == Some("_") && bv.starts_with("bv") =>
                {
                    let value: BigInt = bv[2..].parse().map_err(|_| malformed("indexed literal", e))?;
                    let w = w.to_u32().filter(|w| (1..=64).contains(w)).ok_or_else(|| malformed("indexed literal", e))?;
                    let v = numeral_value(&value, Some(Sort::BitVec(w)))?;
                    Ok((Term::lit(v), Sort::BitVec(w)))
                }
                [h, args @ ..] => {
                    let op = h.as_symbol().ok_or_else(|| malformed("application", e))?;
                    self.application(op, args, expected, scope)
                }
            },
        }
    }

    fn symbol(&self, s: &str, scope: &[Binding]) -> Result<(Term, Sort), FrontendError> {
        if let Some(b) = scope.iter().rev().find(|b| b.name == s) {
            return Ok((b.replacement.clone(), b.sort));
        }
        if let Some(sort) = self.ctx.vars.get(s) {
            return Ok((Term::var(s), *sort));
        }
        match self.ctx.funs.get(s) {
            Some((params, ret)) if params.is_empty() => Ok((Term::app(s, vec![]), *ret)),
            _ => Err(FrontendError::UndeclaredSymbol(s.to_string())),
        }
    }

    fn let_form(
        &self,
        bs: &[SExpr],
        body: &SExpr,
        expected: Option<Sort>,
        scope: &mut Vec<Binding>,
    ) -> Result<(Term, Sort), FrontendError> {
        let mut new = Vec::with_capacity(bs.len());
        for b in bs {
            let (name, def) = match b.as_list() {
                Some([n, d]) => (n.as_symbol().ok_or_else(|| malformed("let binding", b))?, d),
                _ => return Err(malformed("let binding", b)),
            };
            // Parallel let: definitions see only the outer scope.
            let (t, s) = self.elab(def, None, scope)?;
            new.push((name.to_string(), t, s));
        }
        let n = scope.len();
        for (name, t, sort) in &new {
            let replacement = if self.desugar_let { t.clone() } else { Term::var(name.clone()) };
            scope.push(Binding { name: name.clone(), sort: *sort, replacement });
        }
        let r = self.elab(body, expected, scope);
        scope.truncate(n);
        let (body_t, sort) = r?;
        if self.desugar_let {
            Ok((body_t, sort))
        } else {
            Ok((Term::let_in(new.into_iter().map(|(n, t, _)| (n, t)).collect(), body_t), sort))
        }
    }

    fn application(
        &self,
        op: &str,
        args: &[SExpr],
        expected: Option<Sort>,
        scope: &mut Vec<Binding>,
    ) -> Result<(Term, Sort), FrontendError> {
        if let Some((params, ret)) = self.ctx.funs.get(op).cloned() {
            if params.len() != args.len() {
                return Err(FrontendError::Arity { op: op.to_string(), expected: params.len().to_string(), found: args.len() });
            }
            let mut out = Vec::with_capacity(args.len());
            for (a, p) in args.iter().zip(&params) {
                let (t, s) = self.elab(a, Some(*p), scope)?;
                if s != *p {
                    return Err(FrontendError::SortError { term: a.to_string(), expected: p.to_string(), found: s.to_string() });
                }
                out.push(t);
            }
            return Ok((Term::app(op, out), ret));
        }
        if !ops::is_builtin(op) {
            return Err(FrontendError::UndeclaredSymbol(op.to_string()));
        }
        // First pass: everything that types without context.
        let mut done: Vec<Option<(Term, Sort)>> = Vec::with_capacity(args.len());
        for (i, a) in args.iter().enumerate() {
            let fixed = fixed_arg_sort(op, i);
            if numeral(a).is_some() && fixed.is_none() {
                done.push(None);
                continue;
            }
            done.push(self.elab(a, fixed, scope).ok());
        }
        let hint = arg_hint(op, &done, expected);
        let mut out = Vec::with_capacity(args.len());
        let mut sorts = Vec::with_capacity(args.len());
        for (i, (a, d)) in args.iter().zip(done).enumerate() {
            let (t, s) = match d {
                Some(ts) => ts,
                None => self.elab(a, fixed_arg_sort(op, i).or(hint), scope)?,
            };
            out.push(t);
            sorts.push(s);
        }
        let sort = match ops::result_sort(op, &sorts).expect("builtin") {
            Ok(s) => s,
            Err(OpTypeError::Arity { expected, found }) => {
                return Err(FrontendError::Arity { op: op.to_string(), expected, found })
            }
            Err(OpTypeError::Arg { index, expected, found }) => {
                return Err(FrontendError::SortError { term: args[index].to_string(), expected, found: found.to_string() });
            }
        };
        Ok((Term::app(op, out), sort))
    }
}

/// Argument sorts fixed by the operator regardless of context.
fn fixed_arg_sort(op: &str, index: usize) -> Option<Sort> {
    match op {
        "not" | "and" | "or" | "=>" | "xor" | "xnor" | "nand" | "nor" | "iff" => Some(Sort::Bool),
        "ite" if index == 0 => Some(Sort::Bool),
        "+" | "-" | "*" | "div" | "mod" | "abs" | "<=" | "<" | ">=" | ">" => Some(Sort::Int),
        _ => None,
    }
}

/// Sort suggested for numerals (and other context-dependent arguments)
/// from siblings that typed on their own, or from the expected result.
fn arg_hint(op: &str, done: &[Option<(Term, Sort)>], expected: Option<Sort>) -> Option<Sort> {
    let sibling = |pred: &dyn Fn(Sort) -> bool, skip_first: bool| {
        done.iter()
            .skip(usize::from(skip_first))
            .flatten()
            .map(|(_, s)| *s)
            .find(|s| pred(*s))
    };
    let is_bv = |s: Sort| matches!(s, Sort::BitVec(_));
    match op {
        "=" | "distinct" => sibling(&|_| true, false),
        "ite" => sibling(&|_| true, true).or(expected),
        _ if op.starts_with("bv") => {
            let compare = matches!(op, "bvult" | "bvule" | "bvugt" | "bvuge" | "bvslt" | "bvsle" | "bvsgt" | "bvsge");
            sibling(&is_bv, false).or(if compare { None } else { expected.filter(|s| is_bv(*s)) })
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_bv32() -> SortContext {
        let mut ctx = SortContext::default();
        ctx.vars.insert("x".into(), Sort::BitVec(32));
        ctx.vars.insert("y".into(), Sort::BitVec(32));
        ctx
    }

    fn elab(ctx: &SortContext, text: &str) -> Result<(Term, Sort), FrontendError> {
        let e = read_sexprs(text).unwrap().remove(0);
        Elaborator { ctx, desugar_let: true }.term(&e, None)
    }

    #[test]
    fn numerals_adopt_bitvector_width() {
        let ctx = ctx_bv32();
        let (t, s) = elab(&ctx, "(bvult 0 x)").unwrap();
        assert_eq!(s, Sort::Bool);
        assert_eq!(t.to_string(), "(bvult #x00000000 x)");
        let (t, _) = elab(&ctx, "(= 0 (bvand (bvshr x y) (bvnot 1)))").unwrap();
        assert_eq!(t.to_string(), "(= #x00000000 (bvand (bvshr x y) (bvnot #x00000001)))");
    }

    #[test]
    fn negative_numerals_fold() {
        let ctx = SortContext::default();
        let (t, _) = elab(&ctx, "(+ (- 5) -5)").unwrap();
        assert_eq!(t, Term::app("+", vec![Term::lit(Value::int(-5)), Term::lit(Value::int(-5))]));
    }

    #[test]
    fn let_is_substituted_when_desugaring() {
        let mut ctx = SortContext::default();
        ctx.vars.insert("x".into(), Sort::Int);
        let (t, _) = elab(&ctx, "(let ((z (+ x 1))) (* z 2))").unwrap();
        assert_eq!(t.to_string(), "(* (+ x 1) 2)");
        let e = read_sexprs("(let ((z (+ x 1))) (* z 2))").unwrap().remove(0);
        let (kept, _) = Elaborator { ctx: &ctx, desugar_let: false }.term(&e, None).unwrap();
        assert_eq!(kept.to_string(), "(let ((z (+ x 1))) (* z 2))");
    }

    #[test]
    fn width_mismatch_and_undeclared() {
        let ctx = ctx_bv32();
        assert!(matches!(elab(&ctx, "(bvand x #b1)"), Err(FrontendError::SortError { .. })));
        assert_eq!(elab(&ctx, "(bvand x z)"), Err(FrontendError::UndeclaredSymbol("z".into())));
        assert!(matches!(elab(&ctx, "(bvand x -1)"), Err(FrontendError::SortError { .. })));
    }

    #[test]
    fn sorts_parse_in_both_spellings() {
        let s = |t: &str| parse_sort(&read_sexprs(t).unwrap()[0]);
        assert_eq!(s("(BitVec 32)").unwrap(), Sort::BitVec(32));
        assert_eq!(s("(_ BitVec 8)").unwrap(), Sort::BitVec(8));
        assert_eq!(s("Int").unwrap(), Sort::Int);
        assert!(s("(BitVec 0)").is_err());
        assert!(s("Real").is_err());
    }
}
