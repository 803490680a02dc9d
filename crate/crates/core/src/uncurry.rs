//! Uncurrying of applicative systems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::trs::{normalize, Rule, Symbol, Term, Trs};

/// One round of uncurrying w.r.t. a single application symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UncurryPlan {
    pub app: Symbol,
    /// Applicative arity of every symbol that gets uncurried (all positive).
    pub arities: BTreeMap<Symbol, usize>,
    /// `(g, l)` to the symbol standing for `app^l g`.
    pub fresh: BTreeMap<(Symbol, usize), Symbol>,
    /// The uncurrying rules appended to the system.
    pub rules: Vec<Rule>,
}

impl fmt::Display for UncurryPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "application symbol {}", self.app)?;
        for (g, a) in &self.arities {
            write!(f, ", {g}: {a}")?;
        }
        Ok(())
    }
}

fn count_occurrences(t: &Term, f: &Symbol) -> usize {
    t.subterms()
        .iter()
        .filter(|(_, s)| s.root() == Some(f))
        .count()
}

/// Whether `t` is a spine of `f` applications headed by a constant.
fn partial_constant(t: &Term, f: &Symbol) -> bool {
    let (_, head) = spine(t, f);
    head.root().is_some_and(|g| g.arity() == 0)
}

/// Symbols qualifying as application symbols, most frequent first, ties by name.
fn candidates(r: &Trs) -> Vec<Symbol> {
    let defined = r.defined_symbols();
    let mut found: Vec<(usize, Symbol)> = Vec::new();
    for f in &defined {
        if f.arity() == 0 {
            continue;
        }
        let var_first_in_lhs = r.rules.iter().any(|rule| {
            rule.lhs
                .subterms()
                .iter()
                .any(|(_, s)| s.root() == Some(f) && s.args()[0].is_var())
        });
        if var_first_in_lhs {
            continue;
        }
        let applied_in_rhs = r.rules.iter().any(|rule| {
            rule.rhs
                .subterms()
                .iter()
                .any(|(_, s)| s.root() == Some(f) && partial_constant(&s.args()[0], f))
        });
        if !applied_in_rhs {
            continue;
        }
        let n = r
            .rules
            .iter()
            .map(|rule| count_occurrences(&rule.lhs, f) + count_occurrences(&rule.rhs, f))
            .sum();
        found.push((n, f.clone()));
    }
    found.sort_by(|(n1, f1), (n2, f2)| n2.cmp(n1).then_with(|| f1.name().cmp(&f2.name())));
    found.into_iter().map(|(_, f)| f).collect()
}

/// The application symbol of `r`, if any.
pub fn detect_application_symbol(r: &Trs) -> Option<Symbol> {
    candidates(r).into_iter().next()
}

/// Number of nested `f` applications above the head of `t`, and that head.
fn spine<'a>(t: &'a Term, f: &Symbol) -> (usize, &'a Term) {
    let mut cur = t;
    let mut l = 0;
    while cur.root() == Some(f) {
        cur = &cur.args()[0];
        l += 1;
    }
    (l, cur)
}

/// Applicative arity of every head symbol under application symbol `f`.
fn arities(f: &Symbol, r: &Trs) -> BTreeMap<Symbol, usize> {
    let mut longest: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut cap: BTreeMap<Symbol, usize> = BTreeMap::new();
    for rule in &r.rules {
        for side in [&rule.lhs, &rule.rhs] {
            for (_, s) in side.subterms() {
                if s.root() != Some(f) {
                    continue;
                }
                let (l, head) = spine(s, f);
                if let Some(g) = head.root() {
                    let e = longest.entry(g.clone()).or_insert(0);
                    *e = (*e).max(l);
                }
            }
        }
        let (l, head) = spine(&rule.lhs, f);
        if let Some(g) = head.root() {
            let e = cap.entry(g.clone()).or_insert(l);
            *e = (*e).min(l);
        }
    }
    longest
        .into_iter()
        .map(|(g, l)| {
            let a = cap.get(&g).map_or(l, |&c| l.min(c));
            (g, a)
        })
        .filter(|(_, a)| *a > 0)
        .collect()
}

/// Applicative arity of `g` w.r.t. application symbol `f`.
pub fn applicative_arity(g: &Symbol, f: &Symbol, r: &Trs) -> usize {
    arities(f, r).get(g).copied().unwrap_or(0)
}

fn var_names(prefix: &str, n: usize) -> Vec<Term> {
    if n == 1 {
        vec![Term::var(prefix)]
    } else {
        (1..=n).map(|i| Term::var(&format!("{prefix}{i}"))).collect()
    }
}

/// Uncurrying rules for application symbol `f`.
fn plan_for(f: &Symbol, r: &Trs) -> UncurryPlan {
    let arities = arities(f, r);
    let mut fresh = BTreeMap::new();
    let mut rules = Vec::new();
    for (g, &a) in &arities {
        for l in 0..a {
            let inner = Symbol::uncurried(f, g, l);
            let outer = Symbol::uncurried(f, g, l + 1);
            fresh.insert((g.clone(), l + 1), outer.clone());
            let xs = var_names("x", inner.arity());
            let ys = var_names("y", f.arity() - 1);
            let mut lhs_args = vec![Term::app(inner, xs.clone())];
            lhs_args.extend(ys.iter().cloned());
            let lhs = Term::app(f.clone(), lhs_args);
            let rhs = Term::app(outer, xs.into_iter().chain(ys).collect());
            rules.push(Rule::new(rules.len(), lhs, rhs));
        }
    }
    UncurryPlan {
        app: f.clone(),
        arities,
        fresh,
        rules,
    }
}

const NORMALIZE_FUEL: usize = 100_000;

fn apply_plan(r: &Trs, plan: &UncurryPlan) -> Trs {
    let nf = |t: &Term| normalize(t, &plan.rules, NORMALIZE_FUEL).expect("uncurrying terminates");
    let mut rules: Vec<Rule> = r
        .rules
        .iter()
        .map(|rule| Rule::new(rule.id, nf(&rule.lhs), nf(&rule.rhs)))
        .collect();
    rules.extend(plan.rules.iter().cloned());
    Trs::new(rules).renumbered()
}

/// Uncurries `r` repeatedly, one application symbol per round, until no
/// symbol qualifies. Each symbol is used as application symbol at most once.
pub fn uncurry(r: &Trs) -> (Trs, Vec<UncurryPlan>) {
    let mut cur = r.clone();
    let mut plans: Vec<UncurryPlan> = Vec::new();
    let mut used: BTreeSet<Symbol> = BTreeSet::new();
    loop {
        let Some(f) = candidates(&cur).into_iter().find(|f| !used.contains(f)) else {
            break;
        };
        used.insert(f.clone());
        let plan = plan_for(&f, &cur);
        if plan.rules.is_empty() {
            break;
        }
        cur = apply_plan(&cur, &plan);
        plans.push(plan);
    }
    (cur, plans)
}
