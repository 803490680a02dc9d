use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "Int",
            Sort::Bool => "Bool",
        })
    }
}

/// A named subexpression, rendered as `define-fun` ahead of its first use.
/// Identity is by name.
#[derive(Debug)]
pub struct Definition {
    pub name: String,
    pub body: Expr,
}

impl PartialEq for Definition {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}
impl Eq for Definition {}
impl Hash for Definition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state)
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Int(i64),
    Bool(bool),
    Var(String, Sort),
    Add(Vec<Expr>),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Gt(Expr, Expr),
    Ge(Expr, Expr),
    Eq(Expr, Expr),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Expr),
    Implies(Expr, Expr),
    Ite(Expr, Expr, Expr),
    Shared(Arc<Definition>),
}

/// An immutable, sorted SMT expression. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

/// Value of an expression under an assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
}

impl Value {
    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(n) => Some(n),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

pub type Assignment = HashMap<String, Value>;

impl Expr {
    fn mk(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    /// Address of the shared node, for identity-keyed caches.
    pub fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn int(n: i64) -> Expr {
        Expr::mk(Node::Int(n))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::mk(Node::Bool(b))
    }

    pub fn tt() -> Expr {
        Expr::bool(true)
    }

    pub fn ff() -> Expr {
        Expr::bool(false)
    }

    pub fn int_var(name: impl Into<String>) -> Expr {
        Expr::mk(Node::Var(name.into(), Sort::Int))
    }

    pub fn bool_var(name: impl Into<String>) -> Expr {
        Expr::mk(Node::Var(name.into(), Sort::Bool))
    }

    /// Wraps `body` under `name`; literals and variables are returned as is.
    pub fn shared(name: impl Into<String>, body: Expr) -> Expr {
        if body.is_atom() {
            return body;
        }
        Expr::mk(Node::Shared(Arc::new(Definition {
            name: name.into(),
            body,
        })))
    }

    pub fn sort(&self) -> Sort {
        match self.node() {
            Node::Int(_) | Node::Add(_) | Node::Sub(..) | Node::Mul(..) => Sort::Int,
            Node::Var(_, s) => *s,
            Node::Ite(_, a, _) => a.sort(),
            Node::Shared(d) => d.body.sort(),
            _ => Sort::Bool,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.node() {
            Node::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.node() {
            Node::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn is_true(&self) -> bool {
        self.as_bool() == Some(true)
    }

    pub fn is_false(&self) -> bool {
        self.as_bool() == Some(false)
    }

    /// Literal, variable, or shared name: printed as a single token.
    pub fn is_atom(&self) -> bool {
        matches!(
            self.node(),
            Node::Int(_) | Node::Bool(_) | Node::Var(..) | Node::Shared(_)
        )
    }

    pub fn add(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut konst: i64 = 0;
        let mut rest = Vec::new();
        for t in terms {
            match t.node() {
                Node::Int(n) => konst += n,
                Node::Add(inner) => {
                    for u in inner {
                        match u.as_int() {
                            Some(n) => konst += n,
                            None => rest.push(u.clone()),
                        }
                    }
                }
                _ => rest.push(t),
            }
        }
        if konst != 0 {
            rest.push(Expr::int(konst));
        }
        match rest.len() {
            0 => Expr::int(0),
            1 => rest.pop().unwrap(),
            _ => Expr::mk(Node::Add(rest)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_int(), b.as_int()) {
            (Some(x), Some(y)) => Expr::int(x - y),
            (_, Some(0)) => a,
            _ => Expr::mk(Node::Sub(a, b)),
        }
    }

    /// Product; `(* 0 e)` and `(* 1 e)` simplify on construction.
    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_int(), b.as_int()) {
            (Some(x), Some(y)) => Expr::int(x * y),
            (Some(0), _) | (_, Some(0)) => Expr::int(0),
            (Some(1), _) => b,
            (_, Some(1)) => a,
            (None, Some(_)) => Expr::mk(Node::Mul(b, a)),
            _ => Expr::mk(Node::Mul(a, b)),
        }
    }

    pub fn gt(a: Expr, b: Expr) -> Expr {
        match (a.as_int(), b.as_int()) {
            (Some(x), Some(y)) => Expr::bool(x > y),
            _ if a == b => Expr::ff(),
            _ => Expr::mk(Node::Gt(a, b)),
        }
    }

    pub fn ge(a: Expr, b: Expr) -> Expr {
        match (a.as_int(), b.as_int()) {
            (Some(x), Some(y)) => Expr::bool(x >= y),
            _ if a == b => Expr::tt(),
            _ => Expr::mk(Node::Ge(a, b)),
        }
    }

    pub fn le(a: Expr, b: Expr) -> Expr {
        Expr::ge(b, a)
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        match (a.node(), b.node()) {
            (Node::Int(x), Node::Int(y)) => Expr::bool(x == y),
            (Node::Bool(x), Node::Bool(y)) => Expr::bool(x == y),
            _ if a == b => Expr::tt(),
            _ => Expr::mk(Node::Eq(a, b)),
        }
    }

    pub fn and(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        for t in terms {
            match t.node() {
                Node::Bool(true) => {}
                Node::Bool(false) => return Expr::ff(),
                Node::And(inner) => out.extend(inner.iter().cloned()),
                _ => out.push(t),
            }
        }
        match out.len() {
            0 => Expr::tt(),
            1 => out.pop().unwrap(),
            _ => Expr::mk(Node::And(out)),
        }
    }

    pub fn or(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        for t in terms {
            match t.node() {
                Node::Bool(false) => {}
                Node::Bool(true) => return Expr::tt(),
                Node::Or(inner) => out.extend(inner.iter().cloned()),
                _ => out.push(t),
            }
        }
        match out.len() {
            0 => Expr::ff(),
            1 => out.pop().unwrap(),
            _ => Expr::mk(Node::Or(out)),
        }
    }

    pub fn and2(a: Expr, b: Expr) -> Expr {
        Expr::and([a, b])
    }

    pub fn or2(a: Expr, b: Expr) -> Expr {
        Expr::or([a, b])
    }

    pub fn not(a: Expr) -> Expr {
        match a.node() {
            Node::Bool(b) => Expr::bool(!b),
            Node::Not(inner) => inner.clone(),
            _ => Expr::mk(Node::Not(a)),
        }
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        match (a.as_bool(), b.as_bool()) {
            (Some(false), _) | (_, Some(true)) => Expr::tt(),
            (Some(true), _) => b,
            (_, Some(false)) => Expr::not(a),
            _ => Expr::mk(Node::Implies(a, b)),
        }
    }

    pub fn ite(c: Expr, a: Expr, b: Expr) -> Expr {
        match c.as_bool() {
            Some(true) => return a,
            Some(false) => return b,
            None => {}
        }
        if a == b {
            return a;
        }
        if a.sort() == Sort::Bool {
            match (a.as_bool(), b.as_bool()) {
                (Some(true), Some(false)) => return c,
                (Some(false), Some(true)) => return Expr::not(c),
                _ => {}
            }
        }
        Expr::mk(Node::Ite(c, a, b))
    }

    /// `max(a, b)` as an ite: equal to the true maximum under every assignment.
    pub fn max(a: Expr, b: Expr) -> Expr {
        match (a.as_int(), b.as_int()) {
            (Some(x), Some(y)) => Expr::int(x.max(y)),
            _ if a == b => a,
            _ => Expr::ite(Expr::ge(a.clone(), b.clone()), a, b),
        }
    }

    pub fn max_of(terms: impl IntoIterator<Item = Expr>) -> Option<Expr> {
        terms.into_iter().reduce(Expr::max)
    }

    /// Evaluates under `env`. Unassigned variables are an error.
    pub fn eval(&self, env: &Assignment) -> Result<Value, String> {
        let mut cache = HashMap::new();
        self.eval_cached(env, &mut cache)
    }

    fn eval_cached(
        &self,
        env: &Assignment,
        cache: &mut HashMap<String, Value>,
    ) -> Result<Value, String> {
        let int = |e: &Expr, cache: &mut HashMap<String, Value>| -> Result<BigInt, String> {
            match e.eval_cached(env, cache)? {
                Value::Int(n) => Ok(n),
                Value::Bool(_) => Err("expected integer".into()),
            }
        };
        let boolean = |e: &Expr, cache: &mut HashMap<String, Value>| -> Result<bool, String> {
            match e.eval_cached(env, cache)? {
                Value::Bool(b) => Ok(b),
                Value::Int(_) => Err("expected boolean".into()),
            }
        };
        Ok(match self.node() {
            Node::Int(n) => Value::Int(BigInt::from(*n)),
            Node::Bool(b) => Value::Bool(*b),
            Node::Var(name, _) => env
                .get(name)
                .cloned()
                .ok_or_else(|| format!("unassigned variable {name}"))?,
            Node::Add(ts) => {
                let mut acc = BigInt::zero();
                for t in ts {
                    acc += int(t, cache)?;
                }
                Value::Int(acc)
            }
            Node::Sub(a, b) => Value::Int(int(a, cache)? - int(b, cache)?),
            Node::Mul(a, b) => Value::Int(int(a, cache)? * int(b, cache)?),
            Node::Gt(a, b) => Value::Bool(int(a, cache)? > int(b, cache)?),
            Node::Ge(a, b) => Value::Bool(int(a, cache)? >= int(b, cache)?),
            Node::Eq(a, b) => Value::Bool(a.eval_cached(env, cache)? == b.eval_cached(env, cache)?),
            Node::And(ts) => {
                let mut acc = true;
                for t in ts {
                    acc &= boolean(t, cache)?;
                }
                Value::Bool(acc)
            }
            Node::Or(ts) => {
                let mut acc = false;
                for t in ts {
                    acc |= boolean(t, cache)?;
                }
                Value::Bool(acc)
            }
            Node::Not(a) => Value::Bool(!boolean(a, cache)?),
            Node::Implies(a, b) => Value::Bool(!boolean(a, cache)? || boolean(b, cache)?),
            Node::Ite(c, a, b) => {
                if boolean(c, cache)? {
                    a.eval_cached(env, cache)?
                } else {
                    b.eval_cached(env, cache)?
                }
            }
            Node::Shared(def) => {
                if let Some(v) = cache.get(&def.name) {
                    return Ok(v.clone());
                }
                let v = def.body.eval_cached(env, cache)?;
                cache.insert(def.name.clone(), v.clone());
                v
            }
        })
    }

    pub fn eval_int(&self, env: &Assignment) -> Result<BigInt, String> {
        match self.eval(env)? {
            Value::Int(n) => Ok(n),
            Value::Bool(_) => Err("expected integer".into()),
        }
    }

    pub fn eval_bool(&self, env: &Assignment) -> Result<bool, String> {
        match self.eval(env)? {
            Value::Bool(b) => Ok(b),
            Value::Int(_) => Err("expected boolean".into()),
        }
    }

    /// Free variables, including those inside shared definitions.
    pub fn free_vars(&self) -> Vec<(String, Sort)> {
        let mut out = Vec::new();
        let mut seen_vars = std::collections::HashSet::new();
        let mut seen_nodes = std::collections::HashSet::new();
        self.collect_vars(&mut out, &mut seen_vars, &mut seen_nodes);
        out
    }

    fn collect_vars(
        &self,
        out: &mut Vec<(String, Sort)>,
        seen_vars: &mut std::collections::HashSet<String>,
        seen_nodes: &mut std::collections::HashSet<usize>,
    ) {
        if !seen_nodes.insert(self.ptr()) {
            return;
        }
        match self.node() {
            Node::Var(n, s) => {
                if seen_vars.insert(n.clone()) {
                    out.push((n.clone(), *s));
                }
            }
            Node::Shared(d) => d.body.collect_vars(out, seen_vars, seen_nodes),
            _ => self.children().for_each(|c| c.collect_vars(out, seen_vars, seen_nodes)),
        }
    }

    /// Direct children (shared bodies are not children).
    pub fn children(&self) -> Box<dyn Iterator<Item = &Expr> + '_> {
        match self.node() {
            Node::Int(_) | Node::Bool(_) | Node::Var(..) | Node::Shared(_) => {
                Box::new(std::iter::empty())
            }
            Node::Add(ts) | Node::And(ts) | Node::Or(ts) => Box::new(ts.iter()),
            Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Gt(a, b)
            | Node::Ge(a, b)
            | Node::Eq(a, b)
            | Node::Implies(a, b) => Box::new([a, b].into_iter()),
            Node::Not(a) => Box::new(std::iter::once(a)),
            Node::Ite(c, a, b) => Box::new([c, a, b].into_iter()),
        }
    }

    /// Whether a product of two non-literal factors remains anywhere.
    pub fn is_linear(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.linear_rec(&mut seen)
    }

    fn linear_rec(&self, seen: &mut std::collections::HashSet<usize>) -> bool {
        if !seen.insert(self.ptr()) {
            return true;
        }
        match self.node() {
            Node::Mul(a, b) if a.as_int().is_none() && b.as_int().is_none() => false,
            Node::Shared(d) => d.body.linear_rec(seen),
            _ => self.children().all(|c| c.linear_rec(seen)),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::print::print_expr(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::print::print_expr(self))
    }
}

/// Bounded integer in `[lo, hi]` realised as a chain of boolean selectors,
/// so that products with it can be linearised.
pub fn ite_range(prefix: &str, lo: i64, hi: i64) -> (Expr, Vec<String>) {
    assert!(lo <= hi);
    let mut names = Vec::new();
    let mut acc = Expr::int(lo);
    for v in lo + 1..=hi {
        let name = format!("{prefix}_{}", hi - v);
        acc = Expr::ite(Expr::bool_var(name.clone()), Expr::int(v), acc);
        names.push(name);
    }
    names.reverse();
    (acc, names)
}
