use std::collections::HashMap;

use super::{Grammar, GrammarError, Template};
use crate::term::{Term, TermKind};

/// Decides whether `t` is derivable from nonterminal `nt` of `g`.
///
/// Matching is top-down against each production template. Let-productions
/// only match terms with the same let structure and binder names.
pub fn derives(g: &Grammar, nt: &str, t: &Term) -> Result<bool, GrammarError> {
    let idx = g.index_of(nt)?;
    let mut m = Matcher { g, closure: unit_closure(g), memo: HashMap::new() };
    Ok(m.derives(idx, t))
}

/// For each nonterminal, every nonterminal reachable through chain rules
/// (itself included).
fn unit_closure(g: &Grammar) -> Vec<Vec<usize>> {
    (0..g.nonterminals().len())
        .map(|a| {
            let mut reach = vec![a];
            let mut i = 0;
            while i < reach.len() {
                for p in &g.nonterminal(reach[i]).productions {
                    if let Some(b) = p.unit_target() {
                        if !reach.contains(&b) {
                            reach.push(b);
                        }
                    }
                }
                i += 1;
            }
            reach
        })
        .collect()
}

struct Matcher<'g> {
    g: &'g Grammar,
    closure: Vec<Vec<usize>>,
    // Keyed on node identity so shared subterms are decided once.
    memo: HashMap<(usize, usize), bool>,
}

impl Matcher<'_> {
    fn derives(&mut self, nt: usize, t: &Term) -> bool {
        let key = (nt, t.id());
        if let Some(b) = self.memo.get(&key) {
            return *b;
        }
        let g = self.g;
        // Chain rules are folded into the closure; every remaining production
        // consumes the root node, so recursion is on strict subterms.
        let reach = self.closure[nt].clone();
        let result = reach.iter().any(|&b| {
            g.nonterminal(b)
                .productions
                .iter()
                .filter(|p| p.unit_target().is_none())
                .any(|p| self.matches(&p.template, t))
        });
        self.memo.insert(key, result);
        result
    }

    fn matches(&mut self, tpl: &Template, t: &Term) -> bool {
        match (tpl, t.kind()) {
            (Template::NonTerminal(n), _) => {
                let idx = self.g.index_of(n).expect("validated grammar");
                self.derives(idx, t)
            }
            (Template::Constant(s), TermKind::Lit(v)) => v.sort() == *s,
            (Template::Lit(a), TermKind::Lit(b)) => a == b,
            (Template::Var(a), TermKind::Var(b)) => a == b,
            (Template::App(op, targs), TermKind::App(top, args)) => {
                op == top
                    && targs.len() == args.len()
                    && targs.iter().zip(args).all(|(ta, a)| self.matches(ta, a))
            }
            (Template::Let(tbs, tbody), TermKind::Let(bs, body)) => {
                tbs.len() == bs.len()
                    && tbs.iter().zip(bs).all(|((tn, td), (n, d))| tn == n && self.matches(td, d))
                    && self.matches(tbody, body)
            }
            _ => false,
        }
    }
}
