//! Shared helpers: random terms and textbook reference orders.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::process::{Command, Stdio};

use rand::seq::SliceRandom;
use rand::Rng;
use termwpo::order::Encoder;
use termwpo::smt::{Assignment, Expr, Node, Sort, Value};
use termwpo::trs::{Symbol, Term, Var};

pub fn solver_available() -> bool {
    Command::new("z3")
        .arg("-version")
        .stdout(Stdio::null())
        .status()
        .is_ok_and(|s| s.success())
}

/// `a, b` constants, `f, k` unary, `g, h` binary.
pub fn signature() -> Vec<Symbol> {
    vec![
        Symbol::new("a", 0),
        Symbol::new("b", 0),
        Symbol::new("f", 1),
        Symbol::new("k", 1),
        Symbol::new("g", 2),
        Symbol::new("h", 2),
    ]
}

pub fn random_term(rng: &mut impl Rng, sig: &[Symbol], depth: usize) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        if rng.gen_bool(0.6) {
            let x = ["x", "y"].choose(rng).unwrap();
            return Term::var(x);
        }
        let consts: Vec<&Symbol> = sig.iter().filter(|s| s.arity() == 0).collect();
        return Term::constant((*consts.choose(rng).unwrap()).clone());
    }
    let fs: Vec<&Symbol> = sig.iter().filter(|s| s.arity() > 0).collect();
    let f = (*fs.choose(rng).unwrap()).clone();
    let args = (0..f.arity()).map(|_| random_term(rng, sig, depth - 1)).collect();
    Term::app(f, args)
}

/// Pairs `(s, t)` where `t` is often built from pieces of `s`, so that
/// both outcomes of a comparison are common.
pub fn random_pair(rng: &mut impl Rng, sig: &[Symbol]) -> (Term, Term) {
    let s = random_term(rng, sig, 3);
    let t = if rng.gen_bool(0.5) {
        let subs = s.subterms();
        let (_, sub) = subs.choose(rng).unwrap();
        let fs: Vec<&Symbol> = sig.iter().filter(|s| s.arity() > 0).collect();
        let g = (*fs.choose(rng).unwrap()).clone();
        let args = (0..g.arity())
            .map(|i| if i == 0 { (*sub).clone() } else { random_term(rng, sig, 1) })
            .collect();
        Term::app(g, args)
    } else {
        random_term(rng, sig, 3)
    };
    (s, t)
}

/// Lexicographic path order for a strict total precedence given as ranks.
pub fn lpo(s: &Term, t: &Term, rank: &BTreeMap<Symbol, i64>) -> bool {
    let Term::App(f, ss) = s else { return false };
    if ss.iter().any(|si| si == t || lpo(si, t, rank)) {
        return true;
    }
    let Term::App(g, ts) = t else { return false };
    if !ts.iter().all(|tj| lpo(s, tj, rank)) {
        return false;
    }
    match rank[f].cmp(&rank[g]) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            for (si, ti) in ss.iter().zip(ts) {
                if si != ti {
                    return lpo(si, ti, rank);
                }
            }
            false
        }
    }
}

pub struct KboParams {
    pub w0: i64,
    pub weight: BTreeMap<Symbol, i64>,
    pub rank: BTreeMap<Symbol, i64>,
}

fn kbo_weight(t: &Term, p: &KboParams) -> i64 {
    match t {
        Term::Var(_) => p.w0,
        Term::App(f, args) => p.weight[f] + args.iter().map(|a| kbo_weight(a, p)).sum::<i64>(),
    }
}

/// Knuth-Bendix order for an admissible weight function and strict total precedence.
pub fn kbo(s: &Term, t: &Term, p: &KboParams) -> bool {
    let vs = s.var_counts();
    if t.var_counts().iter().any(|(x, n)| vs.get(x).copied().unwrap_or(0) < *n) {
        return false;
    }
    let (ws, wt) = (kbo_weight(s, p), kbo_weight(t, p));
    if ws != wt {
        return ws > wt;
    }
    match (s, t) {
        (Term::App(f, ss), Term::Var(_)) => {
            // s = f^n(t)
            let mut cur = s;
            while let Term::App(g, args) = cur {
                if g != f || args.len() != 1 {
                    return false;
                }
                cur = &args[0];
            }
            cur == t && !ss.is_empty()
        }
        (Term::App(f, ss), Term::App(g, ts)) => match p.rank[f].cmp(&p.rank[g]) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                for (si, ti) in ss.iter().zip(ts) {
                    if si != ti {
                        return kbo(si, ti, p);
                    }
                }
                false
            }
        },
        _ => false,
    }
}

/// Random admissible KBO parameters over `sig`.
pub fn random_kbo(rng: &mut impl Rng, sig: &[Symbol]) -> KboParams {
    let w0 = rng.gen_range(1..=2);
    let mut order: Vec<Symbol> = sig.to_vec();
    order.shuffle(rng);
    let mut weight = BTreeMap::new();
    let mut zero_unary = None;
    for f in sig {
        let w = match f.arity() {
            0 => rng.gen_range(w0..=3),
            1 if zero_unary.is_none() && rng.gen_bool(0.5) => {
                zero_unary = Some(f.clone());
                0
            }
            1 => rng.gen_range(1..=3),
            _ => rng.gen_range(0..=3),
        };
        weight.insert(f.clone(), w);
    }
    if let Some(f) = &zero_unary {
        order.retain(|g| g != f);
        order.push(f.clone());
    }
    let rank = order.into_iter().zip(0..).collect();
    KboParams { w0, weight, rank }
}

pub fn random_rank(rng: &mut impl Rng, sig: &[Symbol]) -> BTreeMap<Symbol, i64> {
    let mut order: Vec<Symbol> = sig.to_vec();
    order.shuffle(rng);
    order.into_iter().zip(0..).collect()
}

pub fn var_name(e: &Expr) -> Option<&str> {
    match e.node() {
        Node::Var(n, _) => Some(n),
        _ => None,
    }
}

/// Every encoder variable at its default, then the given overrides.
pub fn assignment(enc: &Encoder, overrides: &[(&Expr, Value)]) -> Assignment {
    let mut env: Assignment = enc
        .vars()
        .iter()
        .map(|(n, s)| {
            let v = match s {
                Sort::Int => Value::Int(0.into()),
                Sort::Bool => Value::Bool(false),
            };
            (n.clone(), v)
        })
        .collect();
    for (e, v) in overrides {
        if let Some(n) = var_name(e) {
            env.insert(n.to_string(), v.clone());
        }
    }
    env
}

/// Pins precedence ranks and left-to-right status on `enc`.
pub fn pin_path_order(enc: &Encoder, rank: &BTreeMap<Symbol, i64>) -> Vec<(Expr, Value)> {
    let mut out = Vec::new();
    for (f, t) in enc.templates() {
        out.push((t.precedence.clone(), Value::Int(rank[f].into())));
        for (k, slot) in t.status.iter().enumerate() {
            for (i, sel) in slot.iter().enumerate() {
                out.push((sel.clone(), Value::Bool(k == i)));
            }
        }
    }
    out
}

/// The pinning as equalities, for the solver route.
pub fn as_constraints(pins: &[(Expr, Value)]) -> Vec<Expr> {
    pins.iter()
        .map(|(e, v)| match v {
            Value::Int(n) => Expr::eq(e.clone(), Expr::int(i64::try_from(n).unwrap())),
            Value::Bool(true) => e.clone(),
            Value::Bool(false) => Expr::not(e.clone()),
        })
        .collect()
}

pub fn overrides(pins: &[(Expr, Value)]) -> Vec<(&Expr, Value)> {
    pins.iter().map(|(e, v)| (e, v.clone())).collect()
}

pub fn vars_of(t: &Term) -> Vec<Var> {
    t.var_set().into_iter().collect()
}
