use super::{FrontendError, GrammarOrigin, UnknownFun};
use crate::grammar::{Grammar, RawRule, Template};
use crate::term::SortContext;
use crate::value::{Sort, Value};

fn nt(n: &str) -> Template {
    Template::NonTerminal(n.to_string())
}

fn app(op: &str, args: &[&str]) -> Template {
    Template::App(op.to_string(), args.iter().map(|a| nt(a)).collect())
}

/// The conditional linear integer arithmetic grammar used for unknowns that
/// come without one: `StartInt`, `ConstantInt` and `StartBool`, started at
/// `StartInt` for Int results and `StartBool` for Bool results.
pub fn default_grammar(params: &[(String, Sort)], ret: Sort) -> Result<Grammar, FrontendError> {
    let start = match ret {
        Sort::Int => "StartInt",
        Sort::Bool => "StartBool",
        other => return Err(FrontendError::UnsupportedDefaultSort { name: "result".into(), sort: other }),
    };
    if let Some((name, sort)) = params.iter().find(|(_, s)| *s != Sort::Int) {
        return Err(FrontendError::UnsupportedDefaultSort { name: name.clone(), sort: *sort });
    }
    let mut start_int: Vec<Template> = params.iter().map(|(p, _)| Template::Var(p.clone())).collect();
    start_int.extend([
        nt("ConstantInt"),
        app("+", &["StartInt", "StartInt"]),
        app("-", &["StartInt", "StartInt"]),
        app("*", &["StartInt", "ConstantInt"]),
        app("*", &["ConstantInt", "StartInt"]),
        app("div", &["StartInt", "ConstantInt"]),
        app("mod", &["StartInt", "ConstantInt"]),
        app("ite", &["StartBool", "StartInt", "StartInt"]),
    ]);
    let bb = ["StartBool", "StartBool"];
    let ii = ["StartInt", "StartInt"];
    let start_bool = vec![
        Template::Lit(Value::Bool(true)),
        Template::Lit(Value::Bool(false)),
        app("and", &bb),
        app("or", &bb),
        app("=>", &bb),
        app("xor", &bb),
        app("xnor", &bb),
        app("nand", &bb),
        app("nor", &bb),
        app("iff", &bb),
        app("not", &["StartBool"]),
        app("=", &bb),
        app("<=", &ii),
        app("=", &ii),
        app(">=", &ii),
        app(">", &ii),
        app("<", &ii),
    ];
    let rules: Vec<RawRule> = vec![
        ("StartInt".into(), Sort::Int, start_int),
        ("ConstantInt".into(), Sort::Int, vec![Template::Constant(Sort::Int)]),
        ("StartBool".into(), Sort::Bool, start_bool),
    ];
    let ctx = SortContext::with_vars(params);
    Ok(Grammar::new(start, rules, &ctx)?)
}

/// Gives an unknown declared without a grammar the default one.
pub fn attach_default_grammar(
    name: &str,
    params: Vec<(String, Sort)>,
    ret: Sort,
    origin: GrammarOrigin,
) -> Result<UnknownFun, FrontendError> {
    let grammar = default_grammar(&params, ret).map_err(|e| match e {
        FrontendError::UnsupportedDefaultSort { name: which, sort } if which == "result" => {
            FrontendError::UnsupportedDefaultSort { name: name.to_string(), sort }
        }
        other => other,
    })?;
    Ok(UnknownFun { name: name.to_string(), params, ret, grammar, origin })
}
