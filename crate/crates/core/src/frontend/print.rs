use super::{CandidateSolution, GrammarOrigin, SynthProblem};
use crate::sexpr::{print_sexpr, SExpr};
use crate::value::Sort;

fn sym(s: &str) -> SExpr {
    SExpr::symbol(s.to_string())
}

fn params(ps: &[(String, Sort)]) -> SExpr {
    SExpr::List(ps.iter().map(|(n, s)| SExpr::list(vec![sym(n), s.to_sexpr()])).collect())
}

/// Canonical text of a problem, one command per line. The invariant-track
/// sugar is printed back as written, and unknowns with a default grammar
/// are printed without one.
pub fn print_problem(p: &SynthProblem) -> String {
    let mut cmds: Vec<SExpr> = vec![SExpr::list(vec![sym("set-logic"), sym(p.logic.symbol())])];
    cmds.extend(p.defined.values().map(|d| d.to_sexpr()));
    for u in p.unknowns.values() {
        let inv = p.inv_names.contains(&u.name);
        let mut items = vec![sym(if inv { "synth-inv" } else { "synth-fun" }), sym(&u.name), params(&u.params)];
        if !inv {
            items.push(u.ret.to_sexpr());
        }
        if u.origin == GrammarOrigin::Explicit {
            items.push(u.grammar.to_sexpr());
        }
        cmds.push(SExpr::List(items));
    }
    for d in &p.declarations {
        let head = if d.primed { "declare-primed-var" } else { "declare-var" };
        cmds.push(SExpr::list(vec![sym(head), sym(&d.name), d.sort.to_sexpr()]));
    }
    let mut i = 0;
    while i < p.constraints.len() {
        match &p.inv_constraint {
            Some(ic) if ic.first_constraint == i => {
                cmds.push(SExpr::list(vec![
                    sym("inv-constraint"),
                    sym(&ic.inv),
                    sym(&ic.pre),
                    sym(&ic.trans),
                    sym(&ic.post),
                ]));
                i += 3;
            }
            _ => {
                cmds.push(SExpr::list(vec![sym("constraint"), p.constraints[i].to_sexpr()]));
                i += 1;
            }
        }
    }
    cmds.push(SExpr::list(vec![sym("check-synth")]));
    let mut out = String::new();
    for c in &cmds {
        out.push_str(&print_sexpr(c));
        out.push('\n');
    }
    out
}

/// One `define-fun` per line, in the problem's unknown order.
pub fn print_solution(s: &CandidateSolution) -> String {
    let mut out = String::new();
    for d in s.defs.values() {
        out.push_str(&print_sexpr(&d.to_sexpr()));
        out.push('\n');
    }
    out
}
