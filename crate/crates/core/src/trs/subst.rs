use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::term::{Position, Rule, Term, Trs, Var};

/// A finite map from variables to terms, applied simultaneously.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn insert(&mut self, var: Var, term: Term) {
        self.0.insert(var, term);
    }

    pub fn get(&self, var: &Var) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        apply_substitution(t, self)
    }

    /// `self` followed by `other`: `t (self ∘ other) = (t self) other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out: BTreeMap<Var, Term> =
            self.0.iter().map(|(v, t)| (v.clone(), other.apply(t))).collect();
        for (v, t) in &other.0 {
            out.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution(out)
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        f.write_str("}")
    }
}

pub fn apply_substitution(t: &Term, s: &Substitution) -> Term {
    if s.is_empty() {
        return t.clone();
    }
    t.map_vars(&mut |v| s.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())))
}

/// One-way matching: finds `σ` with `pattern σ = subject`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    match_into(pattern, subject, &mut sigma).then_some(sigma)
}

fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::Var(v), _) => match sigma.get(v) {
            Some(bound) => bound == subject,
            None => {
                sigma.insert(v.clone(), subject.clone());
                true
            }
        },
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.iter().zip(ys).all(|(x, y)| match_into(x, y, sigma))
        }
        (Term::App(..), Term::Var(_)) => false,
    }
}

/// Most general unifier (with occurs check), in triangular-free solved form.
pub fn unify(s: &Term, t: &Term) -> Option<Substitution> {
    let mut bindings: BTreeMap<Var, Term> = BTreeMap::new();
    let mut stack = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = stack.pop() {
        let a = walk(&a, &bindings);
        let b = walk(&b, &bindings);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if occurs(&x, &other, &bindings) {
                    return None;
                }
                bindings.insert(x, other);
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g {
                    return None;
                }
                stack.extend(xs.into_iter().zip(ys));
            }
        }
    }
    let keys: Vec<Var> = bindings.keys().cloned().collect();
    Some(
        keys.into_iter()
            .map(|v| {
                let t = resolve(&Term::Var(v.clone()), &bindings);
                (v, t)
            })
            .collect(),
    )
}

fn walk(t: &Term, bindings: &BTreeMap<Var, Term>) -> Term {
    let mut cur = t.clone();
    while let Term::Var(v) = &cur {
        match bindings.get(v) {
            Some(next) => cur = next.clone(),
            None => break,
        }
    }
    cur
}

fn occurs(x: &Var, t: &Term, bindings: &BTreeMap<Var, Term>) -> bool {
    match walk(t, bindings) {
        Term::Var(y) => &y == x,
        Term::App(_, args) => args.iter().any(|a| occurs(x, a, bindings)),
    }
}

fn resolve(t: &Term, bindings: &BTreeMap<Var, Term>) -> Term {
    match walk(t, bindings) {
        Term::Var(v) => Term::Var(v),
        Term::App(f, args) => Term::App(f, args.iter().map(|a| resolve(a, bindings)).collect()),
    }
}

/// Every one-step rewrite of `t` by `rules`, with the rule id and position used.
pub fn rewrite_steps<'a>(
    t: &Term,
    rules: impl IntoIterator<Item = &'a Rule> + Clone,
) -> Vec<(Term, usize, Position)> {
    let mut out = Vec::new();
    for (pos, sub) in t.subterms() {
        if sub.is_var() {
            continue;
        }
        for rule in rules.clone() {
            if let Some(sigma) = match_term(&rule.lhs, sub) {
                let reduct = sigma.apply(&rule.rhs);
                if let Some(next) = t.replace_at(&pos, reduct) {
                    out.push((next, rule.id, pos.clone()));
                }
            }
        }
    }
    out
}

/// Rewrites `t` at `pos` with `rule`, if the rule's lhs matches there.
pub fn rewrite_at(t: &Term, rule: &Rule, pos: &[usize]) -> Option<Term> {
    let sub = t.at(pos)?;
    let sigma = match_term(&rule.lhs, sub)?;
    t.replace_at(pos, sigma.apply(&rule.rhs))
}

/// The set of all one-step reducts of `t` in `trs`.
pub fn rewrite_step(t: &Term, trs: &Trs) -> BTreeSet<Term> {
    rewrite_steps(t, &trs.rules)
        .into_iter()
        .map(|(u, _, _)| u)
        .collect()
}

/// Normal form under `rules`, assuming termination; gives up after `fuel` steps.
pub fn normalize(t: &Term, rules: &[Rule], fuel: usize) -> Option<Term> {
    let mut cur = t.clone();
    for _ in 0..fuel {
        match innermost_step(&cur, rules) {
            Some(next) => cur = next,
            None => return Some(cur),
        }
    }
    None
}

fn innermost_step(t: &Term, rules: &[Rule]) -> Option<Term> {
    if let Term::App(f, args) = t {
        for (i, a) in args.iter().enumerate() {
            if let Some(next) = innermost_step(a, rules) {
                let mut args = args.clone();
                args[i] = next;
                return Some(Term::App(f.clone(), args));
            }
        }
        for rule in rules {
            if let Some(sigma) = match_term(&rule.lhs, t) {
                return Some(sigma.apply(&rule.rhs));
            }
        }
    }
    None
}
