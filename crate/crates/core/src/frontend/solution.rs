use indexmap::IndexMap;

use super::elaborate::{parse_sort, Elaborator};
use super::{malformed, FrontendError, SynthProblem};
use crate::sexpr::{read_sexprs, SExpr};
use crate::term::{inline_calls, FunDef, FunDefs, SortContext};

/// One definition per unknown, keyed by the unknown's name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateSolution {
    pub defs: IndexMap<String, FunDef>,
}

impl CandidateSolution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, def: FunDef) {
        self.defs.insert(def.name.clone(), def);
    }

    pub fn get(&self, name: &str) -> Option<&FunDef> {
        self.defs.get(name)
    }

    /// Sum of the body sizes of every definition.
    pub fn total_size(&self) -> usize {
        self.defs.values().map(|d| d.body.size()).sum()
    }
}

impl FromIterator<FunDef> for CandidateSolution {
    fn from_iter<I: IntoIterator<Item = FunDef>>(iter: I) -> Self {
        let mut s = CandidateSolution::new();
        for d in iter {
            s.insert(d);
        }
        s
    }
}

/// Reads `define-fun` forms and matches them against the problem's
/// unknowns. Extra helper definitions are allowed and get inlined.
pub fn parse_solution(text: &str, problem: &SynthProblem) -> Result<CandidateSolution, FrontendError> {
    let forms = read_sexprs(text)?;
    let mut helpers = FunDefs::new();
    let mut found: IndexMap<String, FunDef> = IndexMap::new();
    for f in &forms {
        let def = read_define_fun(f, problem, &helpers)?;
        if let Some(u) = problem.unknowns.get(&def.name) {
            if def.params != u.params || def.ret != u.ret {
                return Err(FrontendError::SignatureMismatch(def.name));
            }
            if found.contains_key(&def.name) {
                return Err(FrontendError::DuplicateDeclaration(def.name));
            }
            found.insert(def.name.clone(), def);
        } else {
            if problem.defined.contains_key(&def.name)
                || problem.universals.contains_key(&def.name)
                || helpers.contains_key(&def.name)
            {
                return Err(FrontendError::DuplicateDeclaration(def.name));
            }
            helpers.insert(def.name.clone(), def);
        }
    }
    let mut out = CandidateSolution::new();
    for name in problem.unknowns.keys() {
        let mut def = found.swap_remove(name).ok_or_else(|| FrontendError::MissingUnknown(name.clone()))?;
        def.body = inline_calls(&def.body, &helpers);
        out.insert(def);
    }
    Ok(out)
}

fn read_define_fun(f: &SExpr, problem: &SynthProblem, helpers: &FunDefs) -> Result<FunDef, FrontendError> {
    let items = f.as_list().filter(|_| f.head() == Some("define-fun")).ok_or_else(|| malformed("solution", f))?;
    let [_, name, params, ret, body] = items else {
        return Err(malformed("define-fun", f));
    };
    let name = name.as_symbol().ok_or_else(|| malformed("define-fun", f))?.to_string();
    let params = params
        .as_list()
        .ok_or_else(|| malformed("parameter list", f))?
        .iter()
        .map(|p| match p.as_list() {
            Some([n, s]) => Ok((n.as_symbol().ok_or_else(|| malformed("parameter", p))?.to_string(), parse_sort(s)?)),
            _ => Err(malformed("parameter", p)),
        })
        .collect::<Result<Vec<_>, FrontendError>>()?;
    let ret = parse_sort(ret)?;
    let mut ctx = SortContext::default();
    for d in problem.defined.values().chain(helpers.values()) {
        ctx.add_fun(&d.name, d.param_sorts(), d.ret);
    }
    ctx.vars.extend(params.iter().cloned());
    // Lets stay in place so let-productions can match them.
    let body = Elaborator { ctx: &ctx, desugar_let: false }.term_of_sort(body, ret)?;
    Ok(FunDef { name, params, ret, body })
}

#[cfg(test)]
mod tests {
    use super::super::parse_problem_str;
    use super::*;

    fn max2() -> SynthProblem {
        parse_problem_str(
            "(set-logic LIA) (synth-fun max2 ((x Int) (y Int)) Int) (declare-var x Int) (declare-var y Int)
             (constraint (>= (max2 x y) x)) (constraint (>= (max2 x y) y))
             (constraint (or (= x (max2 x y)) (= y (max2 x y)))) (check-synth)",
        )
        .unwrap()
    }

    #[test]
    fn accepts_and_reprints() {
        let p = max2();
        let text = "(define-fun max2 ((x Int) (y Int)) Int (ite (>= x y) x y))\n";
        let s = parse_solution(text, &p).unwrap();
        assert_eq!(s.total_size(), 6);
        assert_eq!(super::super::print_solution(&s), text);
    }

    #[test]
    fn helpers_are_inlined() {
        let p = max2();
        let text = "(define-fun ge ((a Int) (b Int)) Bool (>= a b))
                    (define-fun max2 ((x Int) (y Int)) Int (ite (ge x y) x y))";
        let s = parse_solution(text, &p).unwrap();
        assert_eq!(s.defs["max2"].body.to_string(), "(ite (>= x y) x y)");
    }

    #[test]
    fn rejections() {
        let p = max2();
        assert_eq!(parse_solution("", &p), Err(FrontendError::MissingUnknown("max2".into())));
        assert_eq!(
            parse_solution("(define-fun max2 ((y Int) (x Int)) Int x)", &p),
            Err(FrontendError::SignatureMismatch("max2".into()))
        );
        assert!(matches!(
            parse_solution("(define-fun max2 ((x Int) (y Int)) Int (>= x y))", &p),
            Err(FrontendError::SortError { .. })
        ));
    }
}
