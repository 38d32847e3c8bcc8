//! Concrete evaluation of terms under a valuation.

use thiserror::Error;

use crate::ops;
use crate::term::{FunctionTable, Term, TermKind};
use crate::value::{Valuation, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    /// Integer `div`/`mod` by zero.
    #[error("integer division by zero")]
    DivisionByZero,
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("ill-sorted evaluation: {0}")]
    Mismatch(String),
}

/// Evaluates `t`. Free variables come from `valuation`; calls to user
/// functions are resolved through `funs`.
pub fn evaluate(t: &Term, valuation: &Valuation, funs: &dyn FunctionTable) -> Result<Value, EvalError> {
    let mut scope = Vec::new();
    eval_in(t, valuation, funs, &mut scope)
}

/// Evaluates with an explicit positional environment; used for function
/// bodies and by solvers that bind parameters without building a map.
pub fn evaluate_with(
    t: &Term,
    bindings: &[(&str, &Value)],
    funs: &dyn FunctionTable,
) -> Result<Value, EvalError> {
    let mut scope: Vec<(String, Value)> =
        bindings.iter().map(|(n, v)| (n.to_string(), (*v).clone())).collect();
    eval_in(t, &Valuation::new(), funs, &mut scope)
}

fn eval_in(
    t: &Term,
    valuation: &Valuation,
    funs: &dyn FunctionTable,
    scope: &mut Vec<(String, Value)>,
) -> Result<Value, EvalError> {
    match t.kind() {
        TermKind::Lit(v) => Ok(v.clone()),
        TermKind::Var(v) => scope
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, x)| x.clone())
            .or_else(|| valuation.get(v).cloned())
            .map(Ok)
            .unwrap_or_else(|| match funs.lookup(v) {
                Some(def) if def.params.is_empty() => {
                    eval_in(&def.body, &Valuation::new(), funs, &mut Vec::new())
                }
                _ => Err(EvalError::Unbound(v.clone())),
            }),
        TermKind::App(op, args) => {
            if op == "ite" && args.len() == 3 {
                let c = eval_in(&args[0], valuation, funs, scope)?;
                let branch = match c {
                    Value::Bool(true) => &args[1],
                    Value::Bool(false) => &args[2],
                    other => return Err(EvalError::Mismatch(format!("ite condition {other}"))),
                };
                return eval_in(branch, valuation, funs, scope);
            }
            let vals = args
                .iter()
                .map(|a| eval_in(a, valuation, funs, scope))
                .collect::<Result<Vec<_>, _>>()?;
            apply_function(op, &vals, funs)
        }
        TermKind::Let(bs, body) => {
            let vals = bs
                .iter()
                .map(|(_, d)| eval_in(d, valuation, funs, scope))
                .collect::<Result<Vec<_>, _>>()?;
            let n = scope.len();
            scope.extend(bs.iter().map(|(name, _)| name.clone()).zip(vals));
            let r = eval_in(body, valuation, funs, scope);
            scope.truncate(n);
            r
        }
    }
}

/// Applies a user function from `funs`, or else a built-in operator.
pub fn apply_function(op: &str, args: &[Value], funs: &dyn FunctionTable) -> Result<Value, EvalError> {
    if let Some(def) = funs.lookup(op) {
        if def.params.len() != args.len() {
            return Err(EvalError::Mismatch(format!("`{op}` applied to {} arguments", args.len())));
        }
        let mut scope: Vec<(String, Value)> =
            def.params.iter().map(|(n, _)| n.clone()).zip(args.iter().cloned()).collect();
        return eval_in(&def.body, &Valuation::new(), funs, &mut scope);
    }
    if !ops::is_builtin(op) {
        return Err(EvalError::UnknownFunction(op.to_string()));
    }
    ops::apply(op, args)
}
