//! SMT-LIB 2 validity queries and the solver subprocess.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::{CheckError, UnknownReason};
use crate::frontend::{CandidateSolution, Logic, SynthProblem};
use crate::sexpr::{print_sexpr, read_sexprs, Atom, SExpr};
use crate::term::{inline_calls, Term, TermKind};
use crate::value::{Valuation, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmtAnswer {
    Unsat,
    Sat(Valuation),
    Unknown(String),
}

/// A script whose `unsat` answer means every constraint holds for all
/// values of the universals.
pub fn emit_smtlib(p: &SynthProblem, s: &CandidateSolution) -> Result<String, CheckError> {
    let constraints = p.substituted_constraints(s)?;
    script(p, &constraints)
}

pub(crate) fn script(p: &SynthProblem, constraints: &[Term]) -> Result<String, CheckError> {
    let logic = match p.logic {
        Logic::Lia => "LIA",
        Logic::Bv => "QF_BV",
        Logic::Other(ref l) => return Err(CheckError::UnsupportedLogic(l.clone())),
    };
    let mut out = format!("(set-logic {logic})\n");
    for (name, sort) in &p.universals {
        out.push_str(&format!("(declare-fun {name} () {})\n", sort.to_smtlib()));
    }
    let body: Vec<SExpr> = constraints.iter().map(|c| to_smt(&inline_calls(c, &p.defined))).collect();
    let conj = match body.len() {
        0 => SExpr::Atom(Atom::Bool(true)),
        1 => body.into_iter().next().expect("one constraint"),
        _ => app("and", body),
    };
    out.push_str(&format!("(assert {})\n", print_sexpr(&app("not", vec![conj]))));
    out.push_str("(check-sat)\n(get-model)\n");
    Ok(out)
}

fn app(op: &str, args: Vec<SExpr>) -> SExpr {
    let mut items = vec![SExpr::symbol(op)];
    items.extend(args);
    SExpr::List(items)
}

fn to_smt(t: &Term) -> SExpr {
    match t.kind() {
        TermKind::Var(v) => SExpr::symbol(v.clone()),
        TermKind::Lit(v) => v.to_sexpr(),
        TermKind::App(op, args) if args.is_empty() => SExpr::symbol(op.clone()),
        TermKind::App(op, args) => {
            let args: Vec<SExpr> = args.iter().map(to_smt).collect();
            match op.as_str() {
                "xnor" | "iff" => app("=", args),
                "nand" => app("not", vec![app("and", args)]),
                "nor" => app("not", vec![app("or", args)]),
                "bvshr" => app("bvlshr", args),
                // Single-argument and/or are not SMT-LIB.
                "and" | "or" if args.len() == 1 => args.into_iter().next().expect("one argument"),
                other => app(other, args),
            }
        }
        TermKind::Let(bs, body) => app(
            "let",
            vec![
                SExpr::List(bs.iter().map(|(n, d)| SExpr::list(vec![SExpr::symbol(n.clone()), to_smt(d)])).collect()),
                to_smt(body),
            ],
        ),
    }
}

/// Runs `command` (split on whitespace) with `script` on stdin and reads
/// its answer. The process is killed once `timeout` passes.
pub fn run_smt(command: &str, script: &str, timeout: Duration) -> Result<SmtAnswer, UnknownReason> {
    let mut parts = command.split_whitespace();
    let prog = parts
        .next()
        .ok_or_else(|| UnknownReason::ExternalSolverUnavailable("empty solver command".into()))?;
    let mut child = Command::new(prog)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| UnknownReason::ExternalSolverUnavailable(format!("{prog}: {e}")))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = script.to_string();
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(UnknownReason::Budget);
            }
            Ok(None) => thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(UnknownReason::ExternalSolverUnknown(e.to_string())),
        }
    }
    let _ = writer.join();
    let output = reader.join().unwrap_or_default();
    Ok(interpret(&output))
}

fn interpret(output: &str) -> SmtAnswer {
    let mut lines = output.lines().skip_while(|l| l.trim().is_empty());
    match lines.next().map(str::trim) {
        Some("unsat") => SmtAnswer::Unsat,
        Some("sat") => {
            let rest: String = lines.collect::<Vec<_>>().join("\n");
            match parse_model(&rest) {
                Some(m) => SmtAnswer::Sat(m),
                None => SmtAnswer::Unknown("unreadable model".into()),
            }
        }
        Some(other) => SmtAnswer::Unknown(other.to_string()),
        None => SmtAnswer::Unknown("no output".into()),
    }
}

/// Reads a model in either the `(model (define-fun v () S val) ...)` /
/// `((define-fun ...))` shape or the `((v val) ...)` shape.
pub fn parse_model(text: &str) -> Option<Valuation> {
    let es = read_sexprs(text).ok()?;
    let [SExpr::List(items)] = es.as_slice() else {
        return None;
    };
    let entries = match items.first() {
        Some(SExpr::Atom(Atom::Symbol(s))) if s == "model" => &items[1..],
        _ => &items[..],
    };
    let mut out = Valuation::new();
    for e in entries {
        let (name, value) = match e.as_list()? {
            [head, name, SExpr::List(params), _sort, v] if head.as_symbol() == Some("define-fun") && params.is_empty() => {
                (name.as_symbol()?, model_value(v)?)
            }
            [name, v] => (name.as_symbol()?, model_value(v)?),
            _ => return None,
        };
        out.insert(name.to_string(), value);
    }
    Some(out)
}

fn model_value(e: &SExpr) -> Option<Value> {
    match e {
        SExpr::Atom(Atom::Int(n)) => Some(Value::Int(n.clone())),
        SExpr::Atom(Atom::Bool(b)) => Some(Value::Bool(*b)),
        SExpr::Atom(Atom::BitVec { width, bits }) => Some(Value::bv(*width, *bits)),
        SExpr::List(items) => match items.as_slice() {
            [m, SExpr::Atom(Atom::Int(n))] if m.as_symbol() == Some("-") => Some(Value::Int(-n)),
            [u, SExpr::Atom(Atom::Symbol(bv)), SExpr::Atom(Atom::Int(w))] if u.as_symbol() == Some("_") => {
                let bits: u64 = bv.strip_prefix("bv")?.parse().ok()?;
                let w = u32::try_from(w).ok().filter(|w| (1..=64).contains(w))?;
                Some(Value::bv(w, bits))
            }
            _ => None,
        },
        _ => None,
    }
}
