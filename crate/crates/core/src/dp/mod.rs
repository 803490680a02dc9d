//! Dependency pairs, the estimated dependency graph and usable rules.

mod graph;

use std::collections::BTreeSet;

pub use graph::{estimated_edg, sccs, tcap, DependencyGraph};

use crate::trs::{Rule, Symbol, Term, Trs};

/// A DP problem: pairs `P` (sharp-rooted) and rules `R`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpProblem {
    pub pairs: Vec<Rule>,
    pub rules: Trs,
}

impl DpProblem {
    pub fn from_trs(rules: Trs) -> Self {
        DpProblem {
            pairs: dependency_pairs(&rules),
            rules,
        }
    }

    pub fn pair(&self, id: usize) -> Option<&Rule> {
        self.pairs.iter().find(|p| p.id == id)
    }
}

fn sharpen(t: &Term) -> Term {
    match t {
        Term::App(f, args) => Term::App(f.sharp(), args.clone()),
        Term::Var(_) => t.clone(),
    }
}

/// `f#(s) -> g#(t)` for every defined-rooted subterm `g(t)` of a rhs, in
/// rule order then pre-order, without duplicates. Ids count from 0.
pub fn dependency_pairs(r: &Trs) -> Vec<Rule> {
    let defined = r.defined_symbols();
    let mut out: Vec<Rule> = Vec::new();
    for rule in &r.rules {
        let lhs = sharpen(&rule.lhs);
        for (_, sub) in rule.rhs.subterms() {
            if sub.root().is_some_and(|g| defined.contains(g)) {
                let rhs = sharpen(sub);
                if !out.iter().any(|p| p.lhs == lhs && p.rhs == rhs) {
                    out.push(Rule::new(out.len(), lhs.clone(), rhs));
                }
            }
        }
    }
    out
}

/// Least set of rule ids closed under: rules defining a symbol below the
/// root of some pair rhs, and rules defining a symbol in a usable rhs.
pub fn usable_rules<'a>(pairs: impl IntoIterator<Item = &'a Rule>, r: &Trs) -> BTreeSet<usize> {
    let mut needed: BTreeSet<Symbol> = BTreeSet::new();
    for p in pairs {
        for a in p.rhs.args() {
            needed.extend(a.symbols());
        }
    }
    let mut usable = BTreeSet::new();
    let mut work: Vec<Symbol> = needed.iter().cloned().collect();
    while let Some(f) = work.pop() {
        for rule in &r.rules {
            if rule.lhs.root() == Some(&f) && usable.insert(rule.id) {
                for g in rule.rhs.symbols() {
                    if needed.insert(g.clone()) {
                        work.push(g);
                    }
                }
            }
        }
    }
    usable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trs::parse_trs;

    const ACK: &str = "(VAR x y)(RULES ack(0,y) -> s(y) ack(s(x),0) -> ack(x,s(0)) \
                       ack(s(x),s(y)) -> ack(x,ack(s(x),y)))";

    fn show(ps: &[Rule]) -> Vec<String> {
        ps.iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn pairs_examples() {
        let r = parse_trs("(VAR x)(RULES f(x) -> x)").unwrap();
        assert!(dependency_pairs(&r).is_empty());
        let r = parse_trs("(VAR x)(RULES f(s(x)) -> f(x))").unwrap();
        assert_eq!(show(&dependency_pairs(&r)), ["f#(s(x)) -> f#(x)"]);
        let r = parse_trs(ACK).unwrap();
        assert_eq!(
            show(&dependency_pairs(&r)),
            [
                "ack#(s(x),0) -> ack#(x,s(0))",
                "ack#(s(x),s(y)) -> ack#(x,ack(s(x),y))",
                "ack#(s(x),s(y)) -> ack#(s(x),y)",
            ]
        );
    }

    #[test]
    fn pairs_are_deduplicated_and_bounded() {
        let r = parse_trs("(VAR x)(RULES f(s(x)) -> g(f(x), f(x)) g(x, x) -> x)").unwrap();
        let p = dependency_pairs(&r);
        assert_eq!(show(&p), ["f#(s(x)) -> g#(f(x),f(x))", "f#(s(x)) -> f#(x)"]);
        let bound: usize = r
            .rules
            .iter()
            .map(|rule| {
                rule.rhs
                    .subterms()
                    .iter()
                    .filter(|(_, t)| t.root().is_some_and(|f| r.defined_symbols().contains(f)))
                    .count()
            })
            .sum();
        assert!(p.len() <= bound);
    }

    #[test]
    fn pair_roots_are_sharp_only_at_top() {
        let r = parse_trs(ACK).unwrap();
        for p in dependency_pairs(&r) {
            assert!(p.lhs.root().unwrap().is_sharp());
            assert!(p.rhs.root().unwrap().is_sharp());
            for a in p.lhs.args().iter().chain(p.rhs.args()) {
                assert!(a.symbols().iter().all(|s| !s.is_sharp()));
            }
        }
    }

    #[test]
    fn usable_examples() {
        let r = parse_trs("(VAR x)(RULES f(s(x)) -> f(x))").unwrap();
        let p = dependency_pairs(&r);
        assert!(usable_rules(&p, &r).is_empty());
        let r = parse_trs(ACK).unwrap();
        let p = dependency_pairs(&r);
        assert_eq!(usable_rules(&p, &r), BTreeSet::from([0, 1, 2]));
        let r = parse_trs("(VAR x)(RULES f(x) -> g(a) g(x) -> b h(x) -> x)").unwrap();
        let p = dependency_pairs(&r);
        assert!(usable_rules(&p, &r).is_empty());
    }

    #[test]
    fn usable_closure_is_transitive() {
        let r = parse_trs(
            "(VAR x y)(RULES f(s(x)) -> f(minus(x, x)) minus(x, y) -> p(x) p(s(x)) -> x q(x) -> x)",
        )
        .unwrap();
        let p = dependency_pairs(&r);
        let pf: Vec<Rule> = p.into_iter().filter(|p| p.rhs.root().unwrap().name() == "f#").collect();
        assert_eq!(usable_rules(&pf, &r), BTreeSet::from([1, 2]));
    }
}
