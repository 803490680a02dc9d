//! A weighted path order with all parameters fixed, read back from a model.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::smt::{Assignment, Expr};
use crate::trs::{Symbol, Term, Var};

use super::encode::Encoder;
use super::params::{ConstRange, OrderError, OrderParams};
use super::weight::Shape;

type IVec = Vec<BigInt>;
type IMat = Vec<Vec<BigInt>>;

/// Concrete interpretation, precedence, status and filter of one symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteSymbol {
    pub shape: Shape,
    pub w: IVec,
    pub p: Vec<IVec>,
    pub c: Vec<IMat>,
    pub precedence: BigInt,
    /// Argument indices in status order.
    pub status: Vec<usize>,
    pub collapse: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct CForm {
    constant: IVec,
    coeffs: BTreeMap<Var, IMat>,
}

fn mat_vec(m: &IMat, v: &IVec) -> IVec {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn mat_mat(a: &IMat, b: &IMat) -> IMat {
    let d = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..d)
                .map(|c| row.iter().zip(b).map(|(x, brow)| x * &brow[c]).sum())
                .collect()
        })
        .collect()
}

impl CForm {
    fn scale(&self, m: &IMat) -> CForm {
        CForm {
            constant: mat_vec(m, &self.constant),
            coeffs: self
                .coeffs
                .iter()
                .map(|(x, c)| (x.clone(), mat_mat(m, c)))
                .filter(|(_, c)| c.iter().flatten().any(|e| !e.is_zero()))
                .collect(),
        }
    }

    fn plus(&self, other: &CForm) -> CForm {
        let mut coeffs = self.coeffs.clone();
        for (x, c) in &other.coeffs {
            let merged = match coeffs.get(x) {
                Some(mine) => mine
                    .iter()
                    .zip(c)
                    .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| a + b).collect())
                    .collect(),
                None => c.clone(),
            };
            coeffs.insert(x.clone(), merged);
        }
        CForm {
            constant: self.constant.iter().zip(&other.constant).map(|(a, b)| a + b).collect(),
            coeffs,
        }
    }

    fn ge(&self, q: &CForm, strict: bool) -> bool {
        let consts = self
            .constant
            .iter()
            .zip(&q.constant)
            .enumerate()
            .all(|(r, (a, b))| if strict && r == 0 { a > b } else { a >= b });
        consts
            && q.coeffs.iter().all(|(x, qm)| match self.coeffs.get(x) {
                Some(pm) => pm.iter().flatten().zip(qm.iter().flatten()).all(|(a, b)| a >= b),
                None => qm.iter().flatten().all(|b| !b.is_positive()),
            })
    }

    fn eval(&self, env: &BTreeMap<Var, IVec>) -> Option<IVec> {
        let mut out = self.constant.clone();
        for (x, m) in &self.coeffs {
            let v = mat_vec(m, env.get(x)?);
            for (o, e) in out.iter_mut().zip(v) {
                *o += e;
            }
        }
        Some(out)
    }
}

/// An order decoded from a solver model.
#[derive(Clone, Debug)]
pub struct ConcreteOrder {
    pub params: OrderParams,
    pub symbols: BTreeMap<Symbol, ConcreteSymbol>,
    pub variable_weight: Option<BigInt>,
    plain: bool,
    weights: RefCell<HashMap<Term, Vec<CForm>>>,
    memo: RefCell<HashMap<(Term, Term, bool), bool>>,
}

fn eval_int(e: &Expr, env: &Assignment) -> Result<BigInt, OrderError> {
    e.eval_int(env).map_err(OrderError::Decode)
}

fn eval_bool(e: &Expr, env: &Assignment) -> Result<bool, OrderError> {
    e.eval_bool(env).map_err(OrderError::Decode)
}

impl ConcreteOrder {
    /// Reads every template of `enc` under `model`.
    pub fn decode(enc: &Encoder, model: &Assignment) -> Result<Self, OrderError> {
        let mut symbols = BTreeMap::new();
        let vec = |v: &[Expr]| v.iter().map(|e| eval_int(e, model)).collect::<Result<IVec, _>>();
        for (f, t) in enc.templates() {
            let mut c = Vec::new();
            for m in &t.c {
                let mut rows = Vec::new();
                for row in m {
                    rows.push(vec(row)?);
                }
                c.push(rows);
            }
            let mut status = Vec::new();
            for slot in &t.status {
                for (i, sel) in slot.iter().enumerate() {
                    if eval_bool(sel, model)? {
                        status.push(i);
                    }
                }
            }
            let mut collapse = None;
            for (i, sel) in t.collapse.iter().enumerate() {
                if eval_bool(sel, model)? {
                    collapse = Some(i);
                }
            }
            symbols.insert(
                f.clone(),
                ConcreteSymbol {
                    shape: t.shape,
                    w: vec(&t.w)?,
                    p: t.p.iter().map(|p| vec(p)).collect::<Result<_, _>>()?,
                    c,
                    precedence: eval_int(&t.precedence, model)?,
                    status,
                    collapse,
                },
            );
        }
        let variable_weight = enc
            .variable_weight()
            .map(|e| eval_int(e, model))
            .transpose()?;
        Ok(ConcreteOrder {
            params: enc.params().clone(),
            symbols,
            variable_weight,
            plain: eval_bool(enc.plain_weights(), model)?,
            weights: RefCell::default(),
            memo: RefCell::default(),
        })
    }

    fn symbol(&self, f: &Symbol) -> Result<&ConcreteSymbol, OrderError> {
        self.symbols
            .get(f)
            .ok_or_else(|| OrderError::UnknownSymbol(f.to_string()))
    }

    fn forms(&self, t: &Term) -> Result<Vec<CForm>, OrderError> {
        if let Some(w) = self.weights.borrow().get(t) {
            return Ok(w.clone());
        }
        let d = self.params.dimension;
        let zero = vec![BigInt::zero(); d];
        let forms = match t {
            Term::Var(x) => {
                let offset = match &self.variable_weight {
                    Some(w0) => vec![w0.clone()],
                    None => zero.clone(),
                };
                let id = (0..d)
                    .map(|r| (0..d).map(|c| BigInt::from(u8::from(r == c))).collect())
                    .collect();
                vec![CForm {
                    constant: offset,
                    coeffs: BTreeMap::from([(x.clone(), id)]),
                }]
            }
            Term::App(f, args) => {
                let sf = self.symbol(f)?.clone();
                let ws = args
                    .iter()
                    .map(|a| self.forms(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut out: Vec<CForm> = Vec::new();
                match sf.shape {
                    Shape::Sum => {
                        let mut acc = vec![CForm {
                            constant: sf.w.clone(),
                            coeffs: BTreeMap::new(),
                        }];
                        for (c, w) in sf.c.iter().zip(&ws) {
                            if c.iter().flatten().all(Zero::is_zero) {
                                continue;
                            }
                            let mut next = Vec::new();
                            for a in &acc {
                                for q in w {
                                    push_new(&mut next, a.plus(&q.scale(c)));
                                }
                            }
                            acc = next;
                        }
                        out = acc;
                    }
                    Shape::Max => {
                        for ((p, c), w) in sf.p.iter().zip(&sf.c).zip(&ws) {
                            let base = CForm {
                                constant: p.clone(),
                                coeffs: BTreeMap::new(),
                            };
                            for q in w {
                                push_new(&mut out, base.plus(&q.scale(c)));
                            }
                        }
                    }
                }
                if self.params.constant == ConstRange::Int {
                    push_new(
                        &mut out,
                        CForm {
                            constant: zero,
                            coeffs: BTreeMap::new(),
                        },
                    );
                }
                out
            }
        };
        self.weights.borrow_mut().insert(t.clone(), forms.clone());
        Ok(forms)
    }

    fn weight_ge(&self, s: &Term, t: &Term, strict: bool) -> Result<bool, OrderError> {
        let ps = self.forms(s)?;
        let qs = self.forms(t)?;
        Ok(qs.iter().all(|q| ps.iter().any(|p| p.ge(q, strict))))
    }

    /// Value of the weight of `t` when every variable `x` has value
    /// `env[x]` in each component (on top of the variable weight).
    /// Maxima are taken componentwise.
    pub fn eval_weight(&self, t: &Term, env: &BTreeMap<Var, BigInt>) -> Result<IVec, OrderError> {
        let d = self.params.dimension;
        let venv: BTreeMap<Var, IVec> = env
            .iter()
            .map(|(x, v)| (x.clone(), vec![v.clone(); d]))
            .collect();
        let mut best: Option<IVec> = None;
        for f in self.forms(t)? {
            let v = f
                .eval(&venv)
                .ok_or_else(|| OrderError::Decode(format!("unassigned variable in {t}")))?;
            best = Some(match best {
                None => v,
                Some(b) => b.into_iter().zip(v).map(|(x, y)| x.max(y)).collect(),
            });
        }
        best.ok_or_else(|| OrderError::Decode(format!("empty weight for {t}")))
    }

    pub fn gt(&self, s: &Term, t: &Term) -> Result<bool, OrderError> {
        self.cmp(s, t, true)
    }

    pub fn ge(&self, s: &Term, t: &Term) -> Result<bool, OrderError> {
        self.cmp(s, t, false)
    }

    fn cmp(&self, s: &Term, t: &Term, strict: bool) -> Result<bool, OrderError> {
        if s == t {
            return Ok(!strict);
        }
        let key = (s.clone(), t.clone(), strict);
        if let Some(b) = self.memo.borrow().get(&key) {
            return Ok(*b);
        }
        let b = self.cmp_uncached(s, t, strict)?;
        self.memo.borrow_mut().insert(key, b);
        Ok(b)
    }

    fn cmp_uncached(&self, s: &Term, t: &Term, strict: bool) -> Result<bool, OrderError> {
        if let Term::App(f, ss) = s {
            if let Some(i) = self.symbol(f)?.collapse {
                return self.cmp(&ss[i], t, strict);
            }
        }
        if let Term::App(g, ts) = t {
            if let Some(j) = self.symbol(g)?.collapse {
                return self.cmp(s, &ts[j], strict);
            }
        }
        let Term::App(f, ss) = s else {
            return Ok(!strict && self.plain && self.weight_ge(s, t, false)?);
        };
        if self.weight_ge(s, t, true)? {
            return Ok(true);
        }
        if !self.weight_ge(s, t, false)? {
            return Ok(false);
        }
        let sf = self.symbol(f)?;
        for &i in &sf.status {
            if self.cmp(&ss[i], t, false)? {
                return Ok(true);
            }
        }
        let Term::App(g, ts) = t else {
            return Ok(!strict && self.plain);
        };
        let sg = self.symbol(g)?;
        for &j in &sg.status {
            if !self.cmp(s, &ts[j], true)? {
                return Ok(false);
            }
        }
        if sf.precedence > sg.precedence {
            return Ok(true);
        }
        if sf.precedence < sg.precedence {
            return Ok(false);
        }
        let ls: Vec<&Term> = sf.status.iter().map(|&i| &ss[i]).collect();
        let lt: Vec<&Term> = sg.status.iter().map(|&j| &ts[j]).collect();
        for k in 0.. {
            match (ls.get(k), lt.get(k)) {
                (_, None) => return Ok(!strict || k < ls.len()),
                (None, Some(_)) => return Ok(false),
                (Some(a), Some(b)) => {
                    if self.cmp(a, b, true)? {
                        return Ok(true);
                    }
                    if !self.cmp(a, b, false)? {
                        return Ok(false);
                    }
                }
            }
        }
        unreachable!()
    }
}

fn push_new(out: &mut Vec<CForm>, f: CForm) {
    if !out.contains(&f) {
        out.push(f);
    }
}

fn show_linear(constant: &BigInt, terms: &[(BigInt, String)]) -> String {
    let mut parts: Vec<String> = terms
        .iter()
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, x)| if c.is_one() { x.clone() } else { format!("{c}*{x}") })
        .collect();
    if !constant.is_zero() || parts.is_empty() {
        parts.push(constant.to_string());
    }
    parts.join(" + ")
}

fn show_vector(v: &IVec) -> String {
    let items: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("[{}]", items.join(", "))
}

fn show_matrix(m: &IMat) -> String {
    let rows: Vec<String> = m.iter().map(show_vector).collect();
    format!("[{}]", rows.join(", "))
}

impl fmt::Display for ConcreteOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.params.name)?;
        if let Some(w0) = &self.variable_weight {
            writeln!(f, "  variable weight: {w0}")?;
        }
        let mut by_prec: BTreeMap<&BigInt, Vec<String>> = BTreeMap::new();
        for (g, s) in &self.symbols {
            by_prec.entry(&s.precedence).or_default().push(g.to_string());
            let xs: Vec<String> = (1..=s.c.len()).map(|i| format!("x{i}")).collect();
            let head = if xs.is_empty() {
                g.to_string()
            } else {
                format!("{g}({})", xs.join(","))
            };
            if let Some(i) = s.collapse {
                writeln!(f, "  {head} = x{}", i + 1)?;
                continue;
            }
            let body = if self.params.dimension > 1 {
                let mut parts = vec![show_vector(&s.w)];
                for (c, x) in s.c.iter().zip(&xs) {
                    if c.iter().flatten().any(|e| !e.is_zero()) {
                        parts.push(format!("{}*{x}", show_matrix(c)));
                    }
                }
                parts.join(" + ")
            } else {
                match s.shape {
                    Shape::Sum => {
                        let terms: Vec<(BigInt, String)> =
                            s.c.iter().zip(&xs).map(|(c, x)| (c[0][0].clone(), x.clone())).collect();
                        show_linear(&s.w[0], &terms)
                    }
                    Shape::Max => {
                        let pieces: Vec<String> = s
                            .p
                            .iter()
                            .zip(&s.c)
                            .zip(&xs)
                            .map(|((p, c), x)| show_linear(&p[0], &[(c[0][0].clone(), x.clone())]))
                            .collect();
                        if pieces.len() == 1 {
                            pieces.into_iter().next().unwrap_or_default()
                        } else {
                            format!("max({})", pieces.join(", "))
                        }
                    }
                }
            };
            let body = if self.params.constant == ConstRange::Int {
                format!("max(0, {body})")
            } else {
                body
            };
            write!(f, "  {head} = {body}")?;
            if !s.status.is_empty() {
                let st: Vec<String> = s.status.iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "  status [{}]", st.join(","))?;
            }
            writeln!(f)?;
        }
        if by_prec.len() > 1 {
            let levels: Vec<String> = by_prec.values().rev().map(|v| v.join(" = ")).collect();
            writeln!(f, "  precedence: {}", levels.join(" > "))?;
        }
        Ok(())
    }
}
