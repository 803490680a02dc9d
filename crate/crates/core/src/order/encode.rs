//! Symbolic encoding of weighted path order constraints.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::smt::{ite_range, Expr, NameGen, Sort};
use crate::trs::{Rule, Symbol, Term};

use super::params::{ConstRange, OrderError, OrderParams, PrecedenceKind, StatusKind, Template};
use super::weight::{dedup, identity, weight_ge, zero_vector, Form, Matrix, Shape, Vector, Weight};

/// Default cap on the number of linear pieces of a single weight.
pub const MAX_FORMS: usize = 64;

/// Template of one symbol's interpretation.
#[derive(Clone, Debug)]
pub struct SymbolTemplate {
    pub shape: Shape,
    pub arity: usize,
    /// Constant part of the sum shape.
    pub w: Vector,
    /// Per-argument constant parts of the max shape.
    pub p: Vec<Vector>,
    /// Per-argument coefficients.
    pub c: Vec<Matrix>,
    pub precedence: Expr,
    /// `status[k][i]`: slot `k` holds argument `i`.
    pub status: Vec<Vec<Expr>>,
    /// `collapse[i]`: the symbol is filtered to its `i`-th argument.
    pub collapse: Vec<Expr>,
}

impl SymbolTemplate {
    pub fn in_status(&self, i: usize) -> Expr {
        Expr::or(self.status.iter().map(|slot| slot[i].clone()))
    }

    pub fn has_slot(&self, k: usize) -> Expr {
        match self.status.get(k) {
            Some(slot) => Expr::or(slot.iter().cloned()),
            None => Expr::ff(),
        }
    }

    pub fn collapses(&self) -> Expr {
        Expr::or(self.collapse.iter().cloned())
    }

    fn selector(&self, k: usize, i: usize) -> Expr {
        self.status
            .get(k)
            .and_then(|slot| slot.get(i))
            .cloned()
            .unwrap_or_else(Expr::ff)
    }
}

/// Which symbols get the max shape under the mixed template: `g` does when
/// some right-hand side has an occurrence `g(..)` with a variable in two
/// different arguments that occurs more often on the right than on the left.
pub fn choose_shapes<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> BTreeMap<Symbol, Shape> {
    let mut out = BTreeMap::new();
    for rule in rules {
        let lhs_counts = rule.lhs.var_counts();
        let rhs_counts = rule.rhs.var_counts();
        for side in [&rule.lhs, &rule.rhs] {
            for (_, s) in side.subterms() {
                if let Some(g) = s.root() {
                    out.entry(g.clone()).or_insert(Shape::Sum);
                }
            }
        }
        for (_, s) in rule.rhs.subterms() {
            let Term::App(g, args) = s else { continue };
            if args.is_empty() {
                continue;
            }
            let duplicated = s.var_set().into_iter().any(|x| {
                let spread = args.iter().filter(|a| a.contains_var(&x)).count();
                spread >= 2
                    && rhs_counts.get(&x).copied().unwrap_or(0)
                        > lhs_counts.get(&x).copied().unwrap_or(0)
            });
            if duplicated {
                out.insert(g.clone(), Shape::Max);
            }
        }
    }
    out
}

/// Builds constraints for one parameter setting over a fixed signature.
pub struct Encoder {
    params: OrderParams,
    names: NameGen,
    templates: BTreeMap<Symbol, SymbolTemplate>,
    w0: Option<Expr>,
    vars: Vec<(String, Sort)>,
    constraints: Vec<Expr>,
    plain_weights: Expr,
    weights: HashMap<Term, Weight>,
    memo: HashMap<(Term, Term, bool), Expr>,
    max_forms: usize,
}

impl Encoder {
    /// `shapes` only matters for the mixed template; symbols missing from it get the sum shape.
    pub fn new(
        params: &OrderParams,
        symbols: impl IntoIterator<Item = Symbol>,
        shapes: &BTreeMap<Symbol, Shape>,
    ) -> Result<Self, OrderError> {
        params.validate()?;
        let mut enc = Encoder {
            params: params.clone(),
            names: NameGen::new(),
            templates: BTreeMap::new(),
            w0: None,
            vars: Vec::new(),
            constraints: Vec::new(),
            plain_weights: Expr::tt(),
            weights: HashMap::new(),
            memo: HashMap::new(),
            max_forms: MAX_FORMS,
        };
        let symbols: BTreeSet<Symbol> = symbols.into_iter().collect();
        if params.admissible {
            let w0 = enc.bounded_int("_w", 1, params.bound);
            enc.w0 = Some(w0);
        }
        let n_syms = symbols.len().max(1) as i64;
        for f in &symbols {
            let shape = match params.template {
                Template::Pol => Shape::Sum,
                Template::Max if f.arity() > 0 => Shape::Max,
                Template::Max => Shape::Sum,
                Template::MaxPol if f.arity() > 0 => shapes.get(f).copied().unwrap_or(Shape::Sum),
                Template::MaxPol => Shape::Sum,
            };
            let t = enc.make_template(f, shape, n_syms);
            enc.templates.insert(f.clone(), t);
        }
        enc.global_constraints(&symbols);
        Ok(enc)
    }

    pub fn params(&self) -> &OrderParams {
        &self.params
    }

    pub fn set_max_forms(&mut self, n: usize) {
        self.max_forms = n;
    }

    /// Every template variable, for reading back a model.
    pub fn vars(&self) -> &[(String, Sort)] {
        &self.vars
    }

    /// Range, status, precedence, filter and admissibility constraints.
    pub fn constraints(&self) -> &[Expr] {
        &self.constraints
    }

    pub fn template(&self, f: &Symbol) -> Option<&SymbolTemplate> {
        self.templates.get(f)
    }

    pub fn templates(&self) -> &BTreeMap<Symbol, SymbolTemplate> {
        &self.templates
    }

    pub fn variable_weight(&self) -> Option<&Expr> {
        self.w0.as_ref()
    }

    /// Holds when every comparison degenerates to comparing weights.
    pub fn plain_weights(&self) -> &Expr {
        &self.plain_weights
    }

    fn fresh_int(&mut self, prefix: &str) -> Expr {
        let name = self.names.fresh(prefix);
        self.vars.push((name.clone(), Sort::Int));
        Expr::int_var(name)
    }

    fn fresh_bool(&mut self, prefix: &str) -> Expr {
        let name = self.names.fresh(prefix);
        self.vars.push((name.clone(), Sort::Bool));
        Expr::bool_var(name)
    }

    fn bounded_int(&mut self, prefix: &str, lo: i64, hi: i64) -> Expr {
        if lo == hi {
            return Expr::int(lo);
        }
        let v = self.fresh_int(prefix);
        self.constraints.push(Expr::ge(v.clone(), Expr::int(lo)));
        self.constraints.push(Expr::le(v.clone(), Expr::int(hi)));
        v
    }

    fn coefficient(&mut self) -> Expr {
        let (lo, hi) = self.params.coeff.bounds(self.params.bound);
        if lo == hi {
            return Expr::int(lo);
        }
        if self.params.nonlinear {
            return self.bounded_int("_c", lo, hi);
        }
        let prefix = self.names.fresh("_c");
        let (e, sel) = ite_range(&prefix, lo, hi);
        self.vars.extend(sel.into_iter().map(|n| (n, Sort::Bool)));
        e
    }

    fn coefficient_matrix(&mut self) -> Matrix {
        let d = self.params.dimension;
        (0..d)
            .map(|_| (0..d).map(|_| self.coefficient()).collect())
            .collect()
    }

    fn constant_vector(&mut self, prefix: &str) -> Vector {
        let (lo, hi) = self.params.constant.bounds(self.params.bound);
        (0..self.params.dimension)
            .map(|_| self.bounded_int(prefix, lo, hi))
            .collect()
    }

    fn make_template(&mut self, f: &Symbol, shape: Shape, n_syms: i64) -> SymbolTemplate {
        let n = f.arity();
        let w = if shape == Shape::Sum {
            self.constant_vector("_w")
        } else {
            Vec::new()
        };
        let p = if shape == Shape::Max {
            (0..n).map(|_| self.constant_vector("_p")).collect()
        } else {
            Vec::new()
        };
        let c = (0..n).map(|_| self.coefficient_matrix()).collect();
        let precedence = match self.params.precedence {
            PrecedenceKind::None => Expr::int(0),
            _ => self.bounded_int("_pr", 0, n_syms - 1),
        };
        let status = match self.params.status {
            StatusKind::Empty => Vec::new(),
            _ => (0..n)
                .map(|_| (0..n).map(|_| self.fresh_bool("_st")).collect())
                .collect(),
        };
        let collapse = if self.params.collapse {
            (0..n).map(|_| self.fresh_bool("_b")).collect()
        } else {
            Vec::new()
        };
        SymbolTemplate {
            shape,
            arity: n,
            w,
            p,
            c,
            precedence,
            status,
            collapse,
        }
    }

    /// The first-row, first-column coefficient: the one deciding simplicity.
    fn lead(m: &Matrix) -> Expr {
        m[0][0].clone()
    }

    fn global_constraints(&mut self, symbols: &BTreeSet<Symbol>) {
        let d = self.params.dimension;
        let mut out = Vec::new();
        for f in symbols {
            let t = &self.templates[f];
            let n = t.arity;
            // status: a permutation of a subset of the arguments, slots contiguous
            if !t.status.is_empty() {
                for k in 0..n {
                    for i in 0..n {
                        for j in i + 1..n {
                            out.push(Expr::not(Expr::and2(t.status[k][i].clone(), t.status[k][j].clone())));
                            out.push(Expr::not(Expr::and2(t.status[i][k].clone(), t.status[j][k].clone())));
                        }
                    }
                    if k + 1 < n {
                        out.push(Expr::implies(t.has_slot(k + 1), t.has_slot(k)));
                    }
                }
                for i in 0..n {
                    let simple = self.simple(t, i);
                    out.push(Expr::implies(t.in_status(i), simple));
                    if self.params.status == StatusKind::Total {
                        let nonzero = Expr::ge(Self::lead(&t.c[i]), Expr::int(1));
                        out.push(Expr::implies(nonzero, t.in_status(i)));
                    }
                }
            }
            // collapsing filters: at most one, and the interpretation is that projection
            for i in 0..t.collapse.len() {
                for j in i + 1..t.collapse.len() {
                    out.push(Expr::not(Expr::and2(t.collapse[i].clone(), t.collapse[j].clone())));
                }
                let mut proj = Vec::new();
                match t.shape {
                    Shape::Sum => {
                        proj.extend(t.w.iter().map(|e| Expr::eq(e.clone(), Expr::int(0))));
                    }
                    Shape::Max => {
                        for (j, pj) in t.p.iter().enumerate() {
                            if j == i {
                                proj.extend(pj.iter().map(|e| Expr::eq(e.clone(), Expr::int(0))));
                            } else {
                                proj.extend(pj.iter().map(|e| Expr::le(e.clone(), Expr::int(0))));
                            }
                        }
                    }
                }
                let id = identity(d);
                for (j, cj) in t.c.iter().enumerate() {
                    for (r, row) in cj.iter().enumerate() {
                        for (col, e) in row.iter().enumerate() {
                            let want = if j == i { id[r][col].clone() } else { Expr::int(0) };
                            proj.push(Expr::eq(e.clone(), want));
                        }
                    }
                }
                out.push(Expr::implies(t.collapse[i].clone(), Expr::and(proj)));
            }
            if self.params.precedence == PrecedenceKind::Strict {
                for g in symbols.range((std::ops::Bound::Excluded(f), std::ops::Bound::Unbounded)) {
                    let tg = &self.templates[g];
                    out.push(Expr::not(Expr::eq(t.precedence.clone(), tg.precedence.clone())));
                }
            }
        }
        if let Some(w0) = self.w0.clone() {
            for f in symbols {
                let t = &self.templates[f];
                if t.arity == 0 {
                    out.push(Expr::ge(t.w[0].clone(), w0.clone()));
                    continue;
                }
                // the weights of all terms stay at least w0
                let closed = Expr::add(
                    std::iter::once(t.w[0].clone())
                        .chain(t.c.iter().map(|c| Expr::mul(c[0][0].clone(), w0.clone()))),
                );
                out.push(Expr::ge(closed, w0.clone()));
                if t.arity == 1 {
                    let zero = Expr::eq(t.w[0].clone(), Expr::int(0));
                    let top = Expr::and(symbols.iter().filter(|g| *g != f).map(|g| {
                        let pg = self.templates[g].precedence.clone();
                        match self.params.precedence {
                            PrecedenceKind::Strict => Expr::gt(t.precedence.clone(), pg),
                            _ => Expr::ge(t.precedence.clone(), pg),
                        }
                    }));
                    out.push(Expr::implies(zero, top));
                }
            }
        }
        self.plain_weights = if self.params.status == StatusKind::Empty
            && self.params.precedence == PrecedenceKind::None
        {
            Expr::tt()
        } else {
            let mut parts = Vec::new();
            let first = symbols.iter().next().map(|f| self.templates[f].precedence.clone());
            for f in symbols {
                let t = &self.templates[f];
                let no_status = Expr::and((0..t.arity).map(|i| Expr::not(t.in_status(i))));
                parts.push(Expr::or2(t.collapses(), no_status));
                if let Some(p0) = &first {
                    parts.push(Expr::eq(t.precedence.clone(), p0.clone()));
                }
            }
            let name = self.names.fresh("_b");
            Expr::shared(name, Expr::and(parts))
        };
        self.constraints.extend(out);
    }

    /// `f(x_1..x_n) >= x_i` for all values.
    fn simple(&self, t: &SymbolTemplate, i: usize) -> Expr {
        let d = self.params.dimension;
        let mut parts: Vec<Expr> = (0..d)
            .map(|r| Expr::ge(t.c[i][r][r].clone(), Expr::int(1)))
            .collect();
        if self.params.constant == ConstRange::Int {
            let consts = match t.shape {
                Shape::Sum => &t.w,
                Shape::Max => &t.p[i],
            };
            parts.extend(consts.iter().map(|e| Expr::ge(e.clone(), Expr::int(0))));
        }
        Expr::and(parts)
    }

    fn share(&mut self, prefix: &str, e: Expr) -> Expr {
        if e.is_atom() {
            return e;
        }
        let name = self.names.fresh(prefix);
        Expr::shared(name, e)
    }

    fn template_of(&self, f: &Symbol) -> Result<&SymbolTemplate, OrderError> {
        self.templates
            .get(f)
            .ok_or_else(|| OrderError::UnknownSymbol(f.to_string()))
    }

    /// Symbolic weight of `t` as a maximum of linear forms.
    pub fn weight(&mut self, t: &Term) -> Result<Weight, OrderError> {
        if let Some(w) = self.weights.get(t) {
            return Ok(w.clone());
        }
        let d = self.params.dimension;
        let forms = match t {
            Term::Var(x) => {
                let offset = match &self.w0 {
                    Some(w0) => vec![w0.clone()],
                    None => zero_vector(d),
                };
                vec![Form::variable(x, offset)]
            }
            Term::App(f, args) => {
                let arg_weights = args
                    .iter()
                    .map(|a| self.weight(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let tf = self.template_of(f)?.clone();
                let mut forms = match tf.shape {
                    Shape::Sum => {
                        let mut acc = vec![Form::constant(tf.w.clone())];
                        for (c, w) in tf.c.iter().zip(&arg_weights) {
                            if super::weight::is_zero_matrix(c) {
                                continue;
                            }
                            let mut next = Vec::new();
                            for a in &acc {
                                for q in w {
                                    next.push(a.plus(&q.scale(c)));
                                }
                            }
                            acc = dedup(next);
                            self.check_forms(t, acc.len())?;
                        }
                        acc
                    }
                    Shape::Max => {
                        let mut acc = Vec::new();
                        for ((p, c), w) in tf.p.iter().zip(&tf.c).zip(&arg_weights) {
                            for q in w {
                                acc.push(Form::constant(p.clone()).plus(&q.scale(c)));
                            }
                        }
                        dedup(acc)
                    }
                };
                if self.params.constant == ConstRange::Int {
                    let zero = Form::constant(zero_vector(d));
                    if !forms.contains(&zero) {
                        forms.push(zero);
                    }
                }
                self.check_forms(t, forms.len())?;
                forms
                    .iter()
                    .map(|f| f.map_exprs(&mut |e| self.share("_w", e)))
                    .collect()
            }
        };
        self.weights.insert(t.clone(), forms.clone());
        Ok(forms)
    }

    fn check_forms(&self, t: &Term, n: usize) -> Result<(), OrderError> {
        if n > self.max_forms {
            return Err(OrderError::TooManyForms {
                term: t.to_string(),
                limit: self.max_forms,
            });
        }
        Ok(())
    }

    pub fn weight_gt(&mut self, s: &Term, t: &Term) -> Result<Expr, OrderError> {
        let ws = self.weight(s)?;
        let wt = self.weight(t)?;
        Ok(weight_ge(&ws, &wt, true))
    }

    pub fn weight_ge(&mut self, s: &Term, t: &Term) -> Result<Expr, OrderError> {
        let ws = self.weight(s)?;
        let wt = self.weight(t)?;
        Ok(weight_ge(&ws, &wt, false))
    }

    /// `s > t`
    pub fn gt(&mut self, s: &Term, t: &Term) -> Result<Expr, OrderError> {
        self.cmp(s, t, true)
    }

    /// `s >= t`
    pub fn ge(&mut self, s: &Term, t: &Term) -> Result<Expr, OrderError> {
        self.cmp(s, t, false)
    }

    fn cmp(&mut self, s: &Term, t: &Term, strict: bool) -> Result<Expr, OrderError> {
        if s == t {
            return Ok(Expr::bool(!strict));
        }
        let key = (s.clone(), t.clone(), strict);
        if let Some(e) = self.memo.get(&key) {
            return Ok(e.clone());
        }
        let e = self.cmp_collapse_left(s, t, strict)?;
        let e = self.share("_b", e);
        self.memo.insert(key, e.clone());
        Ok(e)
    }

    fn cmp_collapse_left(&mut self, s: &Term, t: &Term, strict: bool) -> Result<Expr, OrderError> {
        if let Term::App(f, ss) = s {
            let col = self.template_of(f)?.collapse.clone();
            if !col.is_empty() {
                let mut branches = Vec::new();
                for (i, ci) in col.iter().enumerate() {
                    branches.push(Expr::and2(ci.clone(), self.cmp(&ss[i], t, strict)?));
                }
                let rest = self.cmp_collapse_right(s, t, strict)?;
                let any = Expr::or(col.iter().cloned());
                branches.push(Expr::and2(Expr::not(any), rest));
                return Ok(Expr::or(branches));
            }
        }
        self.cmp_collapse_right(s, t, strict)
    }

    fn cmp_collapse_right(&mut self, s: &Term, t: &Term, strict: bool) -> Result<Expr, OrderError> {
        if let Term::App(g, ts) = t {
            let col = self.template_of(g)?.collapse.clone();
            if !col.is_empty() {
                let mut branches = Vec::new();
                for (j, cj) in col.iter().enumerate() {
                    branches.push(Expr::and2(cj.clone(), self.cmp(s, &ts[j], strict)?));
                }
                let rest = self.cmp_core(s, t, strict)?;
                let any = Expr::or(col.iter().cloned());
                branches.push(Expr::and2(Expr::not(any), rest));
                return Ok(Expr::or(branches));
            }
        }
        self.cmp_core(s, t, strict)
    }

    fn cmp_core(&mut self, s: &Term, t: &Term, strict: bool) -> Result<Expr, OrderError> {
        let Term::App(f, ss) = s else {
            if strict {
                return Ok(Expr::ff());
            }
            let ge_a = self.weight_ge(s, t)?;
            return Ok(Expr::and2(self.plain_weights.clone(), ge_a));
        };
        let gt_a = self.weight_gt(s, t)?;
        if gt_a.is_true() {
            return Ok(gt_a);
        }
        let ge_a = self.weight_ge(s, t)?;
        if ge_a.is_false() {
            return Ok(gt_a);
        }
        let tf = self.template_of(f)?.clone();
        let mut rest = Vec::new();
        for (i, si) in ss.iter().enumerate() {
            let sel = tf.in_status(i);
            if sel.is_false() {
                continue;
            }
            rest.push(Expr::and2(sel, self.cmp(si, t, false)?));
        }
        match t {
            Term::Var(_) => {
                if !strict {
                    rest.push(self.plain_weights.clone());
                }
            }
            Term::App(g, ts) => {
                let tg = self.template_of(g)?.clone();
                let mut all = Vec::new();
                for (j, tj) in ts.iter().enumerate() {
                    let sel = tg.in_status(j);
                    if sel.is_false() {
                        continue;
                    }
                    all.push(Expr::implies(sel, self.cmp(s, tj, true)?));
                }
                let prec_gt = Expr::gt(tf.precedence.clone(), tg.precedence.clone());
                let prec_eq = Expr::eq(tf.precedence.clone(), tg.precedence.clone());
                let lex = if prec_eq.is_false() {
                    Expr::ff()
                } else {
                    self.lex(&tf, ss, &tg, ts, strict)?
                };
                let by_prec = Expr::or2(prec_gt, Expr::and2(prec_eq, lex));
                all.push(by_prec);
                rest.push(Expr::and(all));
            }
        }
        Ok(Expr::or2(gt_a, Expr::and2(ge_a, Expr::or(rest))))
    }

    /// Lexicographic comparison of the status-selected argument lists.
    fn lex(
        &mut self,
        tf: &SymbolTemplate,
        ss: &[Term],
        tg: &SymbolTemplate,
        ts: &[Term],
        strict: bool,
    ) -> Result<Expr, OrderError> {
        let slots = tf.status.len().max(tg.status.len());
        let mut acc = Expr::bool(!strict);
        for k in (0..slots).rev() {
            let has_s = tf.has_slot(k);
            let has_t = tg.has_slot(k);
            let mut gt_k = Vec::new();
            let mut ge_k = Vec::new();
            for (i, si) in ss.iter().enumerate() {
                let a = tf.selector(k, i);
                if a.is_false() {
                    continue;
                }
                for (j, tj) in ts.iter().enumerate() {
                    let b = tg.selector(k, j);
                    if b.is_false() {
                        continue;
                    }
                    let both = Expr::and2(a.clone(), b);
                    gt_k.push(Expr::and2(both.clone(), self.cmp(si, tj, true)?));
                    ge_k.push(Expr::and2(both, self.cmp(si, tj, false)?));
                }
            }
            let gt_k = Expr::or(gt_k);
            let ge_k = Expr::or(ge_k);
            let ends = if strict {
                Expr::and2(has_s, Expr::not(has_t))
            } else {
                Expr::not(has_t)
            };
            acc = Expr::or([ends, gt_k, Expr::and2(ge_k, acc)]);
        }
        Ok(acc)
    }
}
