//! Removal of products between non-literal factors.
//!
//! Coefficients ranging over a finite set are written as `ite` trees over
//! literals, so every product has a factor that is either a literal or
//! such a tree. Products are pushed into the branches with
//! `(* (ite c a b) e) -> (ite c (* a e) (* b e))`, binding `e` to a shared
//! name first when it is not an atom.

use std::collections::HashMap;

use thiserror::Error;

use super::expr::{Expr, Node};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("nonlinear product remains: {0}")]
pub struct NonlinearResidual(pub String);

/// Monotone fresh-name source; one per solver session.
#[derive(Debug, Default, Clone)]
pub struct NameGen {
    next: usize,
}

impl NameGen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }
}

pub struct Linearizer<'a> {
    names: &'a mut NameGen,
    allow_nonlinear: bool,
    memo: HashMap<usize, (Expr, Expr)>,
    shared: HashMap<String, Expr>,
    bound: HashMap<usize, (Expr, Expr)>,
}

impl<'a> Linearizer<'a> {
    pub fn new(names: &'a mut NameGen) -> Self {
        Linearizer {
            names,
            allow_nonlinear: false,
            memo: HashMap::new(),
            shared: HashMap::new(),
            bound: HashMap::new(),
        }
    }

    /// Leave products that cannot be linearised in place instead of failing.
    pub fn allow_nonlinear(mut self, yes: bool) -> Self {
        self.allow_nonlinear = yes;
        self
    }

    pub fn run(&mut self, e: &Expr) -> Result<Expr, NonlinearResidual> {
        if let Some((_, out)) = self.memo.get(&e.ptr()) {
            return Ok(out.clone());
        }
        let out = match e.node() {
            Node::Int(_) | Node::Bool(_) | Node::Var(..) => e.clone(),
            Node::Shared(d) => {
                if let Some(done) = self.shared.get(&d.name) {
                    done.clone()
                } else {
                    let body = self.run(&d.body)?;
                    let done = Expr::shared(d.name.clone(), body);
                    self.shared.insert(d.name.clone(), done.clone());
                    done
                }
            }
            Node::Mul(a, b) => {
                let a = self.run(a)?;
                let b = self.run(b)?;
                self.product(a, b, 0)?
            }
            Node::Add(ts) => Expr::add(self.run_all(ts)?),
            Node::Sub(a, b) => Expr::sub(self.run(a)?, self.run(b)?),
            Node::Gt(a, b) => Expr::gt(self.run(a)?, self.run(b)?),
            Node::Ge(a, b) => Expr::ge(self.run(a)?, self.run(b)?),
            Node::Eq(a, b) => Expr::eq(self.run(a)?, self.run(b)?),
            Node::And(ts) => Expr::and(self.run_all(ts)?),
            Node::Or(ts) => Expr::or(self.run_all(ts)?),
            Node::Not(a) => Expr::not(self.run(a)?),
            Node::Implies(a, b) => Expr::implies(self.run(a)?, self.run(b)?),
            Node::Ite(c, a, b) => Expr::ite(self.run(c)?, self.run(a)?, self.run(b)?),
        };
        self.memo.insert(e.ptr(), (e.clone(), out.clone()));
        Ok(out)
    }

    fn run_all(&mut self, ts: &[Expr]) -> Result<Vec<Expr>, NonlinearResidual> {
        ts.iter().map(|t| self.run(t)).collect()
    }

    /// Binds a non-atomic expression to a shared name so it can be duplicated.
    fn bind(&mut self, e: Expr) -> Expr {
        if e.is_atom() {
            return e;
        }
        if let Some((_, v)) = self.bound.get(&e.ptr()) {
            return v.clone();
        }
        let v = Expr::shared(self.names.fresh("_v"), e.clone());
        self.bound.insert(e.ptr(), (e, v.clone()));
        v
    }

    fn product(&mut self, a: Expr, b: Expr, depth: usize) -> Result<Expr, NonlinearResidual> {
        if a.as_int().is_some() || b.as_int().is_some() {
            return Ok(Expr::mul(a, b));
        }
        if depth > 64 {
            return self.residual(a, b);
        }
        if let Node::Ite(c, x, y) = a.node() {
            let b = self.bind(b);
            let x = self.product(x.clone(), b.clone(), depth + 1)?;
            let y = self.product(y.clone(), b, depth + 1)?;
            return Ok(Expr::ite(c.clone(), x, y));
        }
        if let Node::Ite(c, x, y) = b.node() {
            let a = self.bind(a);
            let x = self.product(a.clone(), x.clone(), depth + 1)?;
            let y = self.product(a, y.clone(), depth + 1)?;
            return Ok(Expr::ite(c.clone(), x, y));
        }
        if let Node::Mul(k, e) = a.node() {
            if k.as_int().is_some() {
                let inner = self.product(e.clone(), b, depth + 1)?;
                return Ok(Expr::mul(k.clone(), inner));
            }
        }
        if let Node::Mul(k, e) = b.node() {
            if k.as_int().is_some() {
                let inner = self.product(a, e.clone(), depth + 1)?;
                return Ok(Expr::mul(k.clone(), inner));
            }
        }
        for (sum, other) in [(&a, &b), (&b, &a)] {
            match sum.node() {
                Node::Add(ts) if has_literal_tree(ts) => {
                    let other = self.bind(other.clone());
                    let parts = ts
                        .iter()
                        .map(|t| self.product(t.clone(), other.clone(), depth + 1))
                        .collect::<Result<Vec<_>, _>>()?;
                    return Ok(Expr::add(parts));
                }
                Node::Shared(d) if is_literal_tree(&d.body) || is_ite(&d.body) => {
                    return self.product(d.body.clone(), other.clone(), depth + 1);
                }
                _ => {}
            }
        }
        self.residual(a, b)
    }

    fn residual(&self, a: Expr, b: Expr) -> Result<Expr, NonlinearResidual> {
        if self.allow_nonlinear {
            Ok(Expr::mul(a, b))
        } else {
            Err(NonlinearResidual(format!("(* {a} {b})")))
        }
    }
}

fn is_ite(e: &Expr) -> bool {
    matches!(e.node(), Node::Ite(..))
}

/// Literal, or an ite tree whose leaves are literal trees.
fn is_literal_tree(e: &Expr) -> bool {
    match e.node() {
        Node::Int(_) => true,
        Node::Ite(_, a, b) => is_literal_tree(a) && is_literal_tree(b),
        Node::Add(ts) => ts.iter().all(is_literal_tree),
        Node::Mul(a, b) => is_literal_tree(a) && is_literal_tree(b),
        _ => false,
    }
}

fn has_literal_tree(ts: &[Expr]) -> bool {
    ts.iter().all(|t| is_literal_tree(t) || is_ite(t) || t.as_int().is_some())
}

/// Linearises `e` with a throwaway name source prefix; see [`Linearizer`].
pub fn linearize(e: &Expr, names: &mut NameGen) -> Result<Expr, NonlinearResidual> {
    Linearizer::new(names).run(e)
}
