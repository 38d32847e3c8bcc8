use std::collections::HashSet;

use indexmap::IndexMap;

use super::elaborate::{parse_sort, Elaborator};
use super::{
    attach_default_grammar, malformed, FrontendError, GrammarOrigin, InvConstraint, Logic, SynthProblem, Track,
    UnknownFun, VarDecl,
};
use crate::grammar::{Grammar, RawRule, Template};
use crate::sexpr::{read_sexprs, SExpr};
use crate::term::{infer_sort, FunDef, FunDefs, SortContext, Term, TermKind};
use crate::value::Sort;

/// Parses a whole problem from text.
pub fn parse_problem_str(text: &str) -> Result<SynthProblem, FrontendError> {
    parse_problem(&read_sexprs(text)?)
}

/// Builds a typed problem from its commands. The last command must be
/// `(check-synth)`.
pub fn parse_problem(cmds: &[SExpr]) -> Result<SynthProblem, FrontendError> {
    let (last, body) = cmds.split_last().ok_or(FrontendError::MissingCheckSynth)?;
    if last.head() != Some("check-synth") {
        return Err(FrontendError::MissingCheckSynth);
    }
    let mut b = Builder::default();
    for cmd in body {
        b.command(cmd)?;
    }
    b.finish()
}

#[derive(Default)]
struct Builder {
    logic: Option<Logic>,
    defined: FunDefs,
    unknowns: IndexMap<String, UnknownFun>,
    universals: IndexMap<String, Sort>,
    constraints: Vec<Term>,
    declarations: Vec<VarDecl>,
    inv_names: Vec<String>,
    inv_constraints: Vec<InvConstraint>,
    names: HashSet<String>,
    lacks_grammar: bool,
}

type Params = Vec<(String, Sort)>;

impl Builder {
    fn command(&mut self, cmd: &SExpr) -> Result<(), FrontendError> {
        let items = cmd.as_list().ok_or_else(|| malformed("command", cmd))?;
        let head = cmd.head().ok_or_else(|| malformed("command", cmd))?;
        let args = &items[1..];
        match head {
            "set-logic" => match args {
                [l] => {
                    let sym = l.as_symbol().ok_or_else(|| malformed("set-logic", cmd))?;
                    self.logic = Some(Logic::from_symbol(sym));
                    Ok(())
                }
                _ => Err(malformed("set-logic", cmd)),
            },
            "declare-var" | "declare-primed-var" => {
                let (name, sort) = match args {
                    [n, s] => (n.as_symbol().ok_or_else(|| malformed(head, cmd))?, parse_sort(s)?),
                    _ => return Err(malformed(head, cmd)),
                };
                let primed = head == "declare-primed-var";
                self.declare(name)?;
                self.universals.insert(name.to_string(), sort);
                if primed {
                    let p = format!("{name}!");
                    self.declare(&p)?;
                    self.universals.insert(p, sort);
                }
                self.declarations.push(VarDecl { name: name.to_string(), sort, primed });
                Ok(())
            }
            "define-fun" => self.define_fun(cmd, args),
            "synth-fun" => self.synth_fun(cmd, args),
            "synth-inv" => self.synth_inv(cmd, args),
            "constraint" => match args {
                [c] => {
                    let ctx = self.context();
                    let t = Elaborator { ctx: &ctx, desugar_let: true }.term_of_sort(c, Sort::Bool)?;
                    self.constraints.push(t);
                    Ok(())
                }
                _ => Err(malformed("constraint", cmd)),
            },
            "inv-constraint" => self.inv_constraint(cmd, args),
            "check-synth" => Err(malformed("command", "check-synth must be the last command")),
            other => Err(FrontendError::UnknownCommand(other.to_string())),
        }
    }

    fn declare(&mut self, name: &str) -> Result<(), FrontendError> {
        if crate::ops::is_builtin(name) || !self.names.insert(name.to_string()) {
            return Err(FrontendError::DuplicateDeclaration(name.to_string()));
        }
        Ok(())
    }

    /// Universals, defined functions and unknowns.
    fn context(&self) -> SortContext {
        let mut ctx = self.fun_context();
        ctx.vars.extend(self.universals.iter().map(|(k, v)| (k.clone(), *v)));
        for u in self.unknowns.values() {
            ctx.add_fun(&u.name, u.param_sorts(), u.ret);
        }
        ctx
    }

    fn fun_context(&self) -> SortContext {
        let mut ctx = SortContext::default();
        for d in self.defined.values() {
            ctx.add_fun(&d.name, d.param_sorts(), d.ret);
        }
        ctx
    }

    fn define_fun(&mut self, cmd: &SExpr, args: &[SExpr]) -> Result<(), FrontendError> {
        let [name, params, ret, body] = args else {
            return Err(malformed("define-fun", cmd));
        };
        let name = name.as_symbol().ok_or_else(|| malformed("define-fun", cmd))?;
        let params = parse_params(params)?;
        let ret = parse_sort(ret)?;
        let mut ctx = self.fun_context();
        ctx.vars.extend(params.iter().cloned());
        let body = Elaborator { ctx: &ctx, desugar_let: true }.term_of_sort(body, ret)?;
        self.declare(name)?;
        self.defined.insert(name.to_string(), FunDef { name: name.to_string(), params, ret, body });
        Ok(())
    }

    fn synth_fun(&mut self, cmd: &SExpr, args: &[SExpr]) -> Result<(), FrontendError> {
        let (name, params, ret, grammar) = match args {
            [n, p, r] => (n, p, r, None),
            [n, p, r, g] => (n, p, r, Some(g)),
            _ => return Err(malformed("synth-fun", cmd)),
        };
        let name = name.as_symbol().ok_or_else(|| malformed("synth-fun", cmd))?;
        let params = parse_params(params)?;
        let ret = parse_sort(ret)?;
        let unknown = match grammar {
            Some(g) => self.explicit(name, params, ret, g)?,
            None => {
                self.lacks_grammar = true;
                attach_default_grammar(name, params, ret, GrammarOrigin::DefaultLia)?
            }
        };
        self.declare(name)?;
        self.unknowns.insert(name.to_string(), unknown);
        Ok(())
    }

    fn synth_inv(&mut self, cmd: &SExpr, args: &[SExpr]) -> Result<(), FrontendError> {
        if !self.inv_names.is_empty() {
            return Err(FrontendError::MultipleSynthInv);
        }
        let (name, params, grammar) = match args {
            [n, p] => (n, p, None),
            [n, p, g] => (n, p, Some(g)),
            _ => return Err(malformed("synth-inv", cmd)),
        };
        let name = name.as_symbol().ok_or_else(|| malformed("synth-inv", cmd))?;
        let params = parse_params(params)?;
        let unknown = match grammar {
            Some(g) => self.explicit(name, params, Sort::Bool, g)?,
            None => attach_default_grammar(name, params, Sort::Bool, GrammarOrigin::DefaultInvBool)?,
        };
        self.declare(name)?;
        self.unknowns.insert(name.to_string(), unknown);
        self.inv_names.push(name.to_string());
        Ok(())
    }

    fn explicit(&self, name: &str, params: Params, ret: Sort, g: &SExpr) -> Result<UnknownFun, FrontendError> {
        let grammar = parse_grammar(g, &params, ret, &self.fun_context())?;
        Ok(UnknownFun { name: name.to_string(), params, ret, grammar, origin: GrammarOrigin::Explicit })
    }

    fn inv_constraint(&mut self, cmd: &SExpr, args: &[SExpr]) -> Result<(), FrontendError> {
        let names: Vec<&str> = args.iter().filter_map(SExpr::as_symbol).collect();
        let [inv, pre, trans, post] = names.as_slice() else {
            return Err(malformed("inv-constraint", cmd));
        };
        if args.len() != 4 {
            return Err(malformed("inv-constraint", cmd));
        }
        let unknown = match self.unknowns.get(*inv) {
            Some(u) if self.inv_names.iter().any(|n| n == inv) => u,
            _ => return Err(FrontendError::MissingComponent(inv.to_string())),
        };
        let n = unknown.params.len();
        let component = |c: &str, arity: usize| -> Result<&FunDef, FrontendError> {
            let d = self.defined.get(c).ok_or_else(|| FrontendError::MissingComponent(c.to_string()))?;
            if d.params.len() != arity {
                return Err(FrontendError::ArityMismatch(format!(
                    "`{c}` takes {} arguments, expected {arity} for invariant `{inv}` of arity {n}",
                    d.params.len()
                )));
            }
            Ok(d)
        };
        component(pre, n)?;
        component(trans, 2 * n)?;
        component(post, n)?;

        let tuple = self.state_tuple(unknown)?;
        let v: Vec<Term> = tuple.iter().map(|x| Term::var(x.clone())).collect();
        let v_primed: Vec<Term> = tuple.iter().map(|x| Term::var(format!("{x}!"))).collect();
        let call = |f: &str, args: Vec<Term>| Term::app(f, args);
        let both: Vec<Term> = v.iter().chain(&v_primed).cloned().collect();
        let generated = [
            call("=>", vec![call(pre, v.clone()), call(inv, v.clone())]),
            call(
                "=>",
                vec![call("and", vec![call(inv, v.clone()), call(trans, both)]), call(inv, v_primed.clone())],
            ),
            call("=>", vec![call(inv, v.clone()), call(post, v)]),
        ];
        let ctx = self.context();
        for c in &generated {
            let s = infer_sort(c, &ctx)?;
            if s != Sort::Bool {
                return Err(FrontendError::SortError { term: c.to_string(), expected: "Bool".into(), found: s.to_string() });
            }
        }
        self.inv_constraints.push(InvConstraint {
            inv: inv.to_string(),
            pre: pre.to_string(),
            trans: trans.to_string(),
            post: post.to_string(),
            first_constraint: self.constraints.len(),
        });
        self.constraints.extend(generated);
        Ok(())
    }

    /// The unprimed state variables V: the invariant's parameter names when
    /// each has a primed universal, otherwise primed declarations in order.
    fn state_tuple(&self, inv: &UnknownFun) -> Result<Vec<String>, FrontendError> {
        let is_state = |x: &str| {
            self.declarations.iter().any(|d| d.primed && d.name == x)
        };
        if inv.params.iter().all(|(p, _)| is_state(p)) {
            return Ok(inv.params.iter().map(|(p, _)| p.clone()).collect());
        }
        let declared: Vec<String> = self.declarations.iter().filter(|d| d.primed).map(|d| d.name.clone()).collect();
        if declared.len() != inv.params.len() {
            return Err(FrontendError::ArityMismatch(format!(
                "invariant `{}` has {} parameters but {} primed variables are declared",
                inv.name,
                inv.params.len(),
                declared.len()
            )));
        }
        Ok(declared)
    }

    fn finish(self) -> Result<SynthProblem, FrontendError> {
        let logic = self.logic.ok_or_else(|| malformed("problem", "missing set-logic"))?;
        if !self.inv_names.is_empty() && self.inv_constraints.len() != 1 {
            return Err(FrontendError::InvConstraintCount);
        }
        if self.inv_constraints.len() > 1 {
            return Err(FrontendError::InvConstraintCount);
        }
        let track = if !self.inv_names.is_empty() || !self.inv_constraints.is_empty() {
            Track::Inv
        } else if logic == Logic::Lia && self.lacks_grammar {
            Track::Lia
        } else {
            Track::General
        };
        Ok(SynthProblem {
            logic,
            defined: self.defined,
            unknowns: self.unknowns,
            universals: self.universals,
            constraints: self.constraints,
            track,
            declarations: self.declarations,
            inv_names: self.inv_names,
            inv_constraint: self.inv_constraints.into_iter().next(),
        })
    }
}

fn parse_params(e: &SExpr) -> Result<Params, FrontendError> {
    let items = e.as_list().ok_or_else(|| malformed("parameter list", e))?;
    let mut out: Params = Vec::with_capacity(items.len());
    for p in items {
        match p.as_list() {
            Some([n, s]) => {
                let name = n.as_symbol().ok_or_else(|| malformed("parameter", p))?;
                if out.iter().any(|(m, _)| m == name) {
                    return Err(FrontendError::DuplicateDeclaration(name.to_string()));
                }
                out.push((name.to_string(), parse_sort(s)?));
            }
            _ => return Err(malformed("parameter", p)),
        }
    }
    Ok(out)
}

const HOLE_PREFIX: &str = "\u{0}constant:";

/// `((NT Sort (prod ...)) ...)`. The start symbol is `Start` when present,
/// otherwise the first nonterminal.
pub(crate) fn parse_grammar(e: &SExpr, params: &Params, ret: Sort, funs: &SortContext) -> Result<Grammar, FrontendError> {
    let rules = e.as_list().ok_or_else(|| malformed("grammar", e))?;
    let mut heads = Vec::with_capacity(rules.len());
    for r in rules {
        match r.as_list() {
            Some([n, s, SExpr::List(prods)]) => {
                let name = n.as_symbol().ok_or_else(|| malformed("grammar rule", r))?;
                heads.push((name.to_string(), parse_sort(s)?, prods.as_slice()));
            }
            _ => return Err(malformed("grammar rule", r)),
        }
    }
    let nt_names: HashSet<&str> = heads.iter().map(|(n, _, _)| n.as_str()).collect();
    let mut ctx = funs.clone();
    ctx.vars.extend(params.iter().cloned());
    ctx.vars.extend(heads.iter().map(|(n, s, _)| (n.clone(), *s)));
    for s in [Sort::Int, Sort::Bool] {
        ctx.vars.insert(hole_name(s), s);
    }
    let mut raw: Vec<RawRule> = Vec::with_capacity(heads.len());
    for (name, sort, prods) in &heads {
        let mut templates = Vec::with_capacity(prods.len());
        for p in prods.iter() {
            let p = replace_holes(p, &mut ctx)?;
            let (t, _) = Elaborator { ctx: &ctx, desugar_let: false }.term(&p, Some(*sort))?;
            templates.push(to_template(&t, &nt_names, &mut Vec::new()));
        }
        raw.push((name.clone(), *sort, templates));
    }
    let start = if nt_names.contains("Start") {
        "Start".to_string()
    } else {
        heads.first().map(|(n, _, _)| n.clone()).ok_or_else(|| malformed("grammar", "no nonterminals"))?
    };
    let sig_ctx = {
        let mut c = funs.clone();
        c.vars.extend(params.iter().cloned());
        c
    };
    let g = Grammar::new(&start, raw, &sig_ctx)?;
    if g.start_sort() != ret {
        return Err(crate::grammar::GrammarError::StartSort { name: start, expected: ret, found: g.start_sort() }.into());
    }
    Ok(g)
}

fn hole_name(s: Sort) -> String {
    format!("{HOLE_PREFIX}{s}")
}

/// Rewrites `(Constant S)` into a placeholder variable of sort S.
fn replace_holes(e: &SExpr, ctx: &mut SortContext) -> Result<SExpr, FrontendError> {
    match e {
        SExpr::List(items) if e.head() == Some("Constant") => match items.as_slice() {
            [_, s] => {
                let sort = parse_sort(s)?;
                let n = hole_name(sort);
                ctx.vars.insert(n.clone(), sort);
                Ok(SExpr::symbol(n))
            }
            _ => Err(malformed("constant hole", e)),
        },
        SExpr::List(_) if e.head() == Some("Variable") || e.head() == Some("InputVariable") => {
            Err(malformed("grammar", format!("`{e}` terminals are not supported")))
        }
        SExpr::List(items) => Ok(SExpr::List(items.iter().map(|i| replace_holes(i, ctx)).collect::<Result<_, _>>()?)),
        SExpr::Atom(_) => Ok(e.clone()),
    }
}

fn to_template(t: &Term, nts: &HashSet<&str>, bound: &mut Vec<String>) -> Template {
    match t.kind() {
        TermKind::Var(v) => {
            if bound.iter().any(|b| b == v) {
                Template::Var(v.clone())
            } else if let Some(s) = v.strip_prefix(HOLE_PREFIX) {
                Template::Constant(match s {
                    "Int" => Sort::Int,
                    "Bool" => Sort::Bool,
                    _ => parse_sort(&read_sexprs(s).expect("printed sort")[0]).expect("printed sort"),
                })
            } else if nts.contains(v.as_str()) {
                Template::NonTerminal(v.clone())
            } else {
                Template::Var(v.clone())
            }
        }
        TermKind::Lit(v) => Template::Lit(v.clone()),
        TermKind::App(op, args) => Template::App(op.clone(), args.iter().map(|a| to_template(a, nts, bound)).collect()),
        TermKind::Let(bs, body) => {
            let defs = bs.iter().map(|(n, d)| (n.clone(), to_template(d, nts, bound))).collect();
            let n = bound.len();
            bound.extend(bs.iter().map(|(n, _)| n.clone()));
            let body = to_template(body, nts, bound);
            bound.truncate(n);
            Template::Let(defs, Box::new(body))
        }
    }
}
