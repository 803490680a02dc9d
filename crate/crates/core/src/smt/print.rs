use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::expr::{Definition, Expr, Node};
use std::sync::Arc;

/// Renders `e` as an SMT-LIB 2.0 term. Shared subexpressions print as their name.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_int(out: &mut String, n: i64) {
    if n < 0 {
        let _ = write!(out, "(- {})", n.unsigned_abs());
    } else {
        let _ = write!(out, "{n}");
    }
}

fn write_app(out: &mut String, op: &str, args: &[&Expr]) {
    out.push('(');
    out.push_str(op);
    for a in args {
        out.push(' ');
        write_expr(out, a);
    }
    out.push(')');
}

fn write_expr(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Int(n) => write_int(out, *n),
        Node::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Node::Var(name, _) => out.push_str(name),
        Node::Shared(d) => out.push_str(&d.name),
        Node::Add(ts) => write_app(out, "+", &ts.iter().collect::<Vec<_>>()),
        Node::Sub(a, b) => write_app(out, "-", &[a, b]),
        Node::Mul(a, b) => write_app(out, "*", &[a, b]),
        Node::Gt(a, b) => write_app(out, ">", &[a, b]),
        Node::Ge(a, b) => write_app(out, ">=", &[a, b]),
        Node::Eq(a, b) => write_app(out, "=", &[a, b]),
        Node::And(ts) => write_app(out, "and", &ts.iter().collect::<Vec<_>>()),
        Node::Or(ts) => write_app(out, "or", &ts.iter().collect::<Vec<_>>()),
        Node::Not(a) => write_app(out, "not", &[a]),
        Node::Implies(a, b) => write_app(out, "=>", &[a, b]),
        Node::Ite(c, a, b) => write_app(out, "ite", &[c, a, b]),
    }
}

/// Shared definitions reachable from `e`, dependencies first.
pub fn definitions(e: &Expr) -> Vec<Arc<Definition>> {
    let mut out = Vec::new();
    let mut seen_defs = HashSet::new();
    let mut seen_nodes = HashSet::new();
    collect_defs(e, &mut out, &mut seen_defs, &mut seen_nodes);
    out
}

fn collect_defs(
    e: &Expr,
    out: &mut Vec<Arc<Definition>>,
    seen_defs: &mut HashSet<String>,
    seen_nodes: &mut HashSet<usize>,
) {
    if !seen_nodes.insert(e.ptr()) {
        return;
    }
    match e.node() {
        Node::Shared(d) => {
            if seen_defs.contains(&d.name) {
                return;
            }
            collect_defs(&d.body, out, seen_defs, seen_nodes);
            seen_defs.insert(d.name.clone());
            out.push(d.clone());
        }
        _ => e.children().for_each(|c| collect_defs(c, out, seen_defs, seen_nodes)),
    }
}

pub fn print_define_fun(d: &Definition) -> String {
    format!(
        "(define-fun {} () {} {})",
        d.name,
        d.body.sort(),
        print_expr(&d.body)
    )
}

fn count_uses(e: &Expr, uses: &mut HashMap<String, usize>) {
    match e.node() {
        Node::Shared(d) => {
            let n = uses.entry(d.name.clone()).or_insert(0);
            *n += 1;
            if *n == 1 {
                count_uses(&d.body, uses);
            }
        }
        _ => e.children().for_each(|c| count_uses(c, uses)),
    }
}

fn rebuild(
    e: &Expr,
    uses: &HashMap<String, usize>,
    keep: &dyn Fn(&str) -> bool,
    done: &mut HashMap<String, Expr>,
) -> Expr {
    let mut go = |x: &Expr| rebuild(x, uses, keep, done);
    match e.node() {
        Node::Int(_) | Node::Bool(_) | Node::Var(..) => e.clone(),
        Node::Shared(d) => {
            if keep(&d.name) {
                return e.clone();
            }
            if let Some(out) = done.get(&d.name) {
                return out.clone();
            }
            let body = rebuild(&d.body, uses, keep, done);
            let out = if uses.get(&d.name).copied().unwrap_or(0) > 1 {
                Expr::shared(d.name.clone(), body)
            } else {
                body
            };
            done.insert(d.name.clone(), out.clone());
            out
        }
        Node::Add(ts) => Expr::add(ts.iter().map(go).collect::<Vec<_>>()),
        Node::Sub(a, b) => Expr::sub(go(a), go(b)),
        Node::Mul(a, b) => Expr::mul(go(a), go(b)),
        Node::Gt(a, b) => Expr::gt(go(a), go(b)),
        Node::Ge(a, b) => Expr::ge(go(a), go(b)),
        Node::Eq(a, b) => Expr::eq(go(a), go(b)),
        Node::And(ts) => Expr::and(ts.iter().map(go).collect::<Vec<_>>()),
        Node::Or(ts) => Expr::or(ts.iter().map(go).collect::<Vec<_>>()),
        Node::Not(a) => Expr::not(go(a)),
        Node::Implies(a, b) => Expr::implies(go(a), go(b)),
        Node::Ite(c, a, b) => Expr::ite(go(c), go(a), go(b)),
    }
}

/// Expands every definition that `e` references only once, except those
/// for which `keep` holds.
pub fn inline_single_use(e: &Expr, keep: &dyn Fn(&str) -> bool) -> Expr {
    let mut uses = HashMap::new();
    count_uses(e, &mut uses);
    if uses.values().all(|&n| n > 1) {
        return e.clone();
    }
    rebuild(e, &uses, keep, &mut HashMap::new())
}

/// A self-contained script fragment: the needed `define-fun`s and the assertion.
/// Definitions used once are written in place.
pub fn print_assertion(e: &Expr) -> String {
    let e = &inline_single_use(e, &|_| false);
    let mut out = String::new();
    for d in definitions(e) {
        out.push_str(&print_define_fun(&d));
        out.push('\n');
    }
    let _ = write!(out, "(assert {})", print_expr(e));
    out
}

/// Renders `e` as a complete term with every shared name expanded.
pub fn print_smtlib(e: &Expr) -> String {
    print_expr(&inline_shared(e))
}

fn inline_shared(e: &Expr) -> Expr {
    match e.node() {
        Node::Shared(d) => inline_shared(&d.body),
        Node::Int(_) | Node::Bool(_) | Node::Var(..) => e.clone(),
        Node::Add(ts) => Expr::add(ts.iter().map(inline_shared)),
        Node::Sub(a, b) => Expr::sub(inline_shared(a), inline_shared(b)),
        Node::Mul(a, b) => Expr::mul(inline_shared(a), inline_shared(b)),
        Node::Gt(a, b) => Expr::gt(inline_shared(a), inline_shared(b)),
        Node::Ge(a, b) => Expr::ge(inline_shared(a), inline_shared(b)),
        Node::Eq(a, b) => Expr::eq(inline_shared(a), inline_shared(b)),
        Node::And(ts) => Expr::and(ts.iter().map(inline_shared)),
        Node::Or(ts) => Expr::or(ts.iter().map(inline_shared)),
        Node::Not(a) => Expr::not(inline_shared(a)),
        Node::Implies(a, b) => Expr::implies(inline_shared(a), inline_shared(b)),
        Node::Ite(c, a, b) => Expr::ite(inline_shared(c), inline_shared(a), inline_shared(b)),
    }
}
