//! Symbolic weights: maxima of linear forms over term variables.

use std::collections::BTreeMap;

use crate::smt::Expr;
use crate::trs::Var;

pub type Vector = Vec<Expr>;
pub type Matrix = Vec<Vec<Expr>>;

/// Interpretation shape of one symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Sum,
    Max,
}

/// `constant + sum_x coeffs[x] * x`, componentwise for vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    pub constant: Vector,
    pub coeffs: BTreeMap<Var, Matrix>,
}

/// A weight is the maximum of its forms.
pub type Weight = Vec<Form>;

pub fn zero_vector(d: usize) -> Vector {
    vec![Expr::int(0); d]
}

pub fn identity(d: usize) -> Matrix {
    (0..d)
        .map(|r| (0..d).map(|c| Expr::int(i64::from(r == c))).collect())
        .collect()
}

pub fn is_zero_matrix(m: &Matrix) -> bool {
    m.iter().flatten().all(|e| e.as_int() == Some(0))
}

pub fn mat_vec(m: &Matrix, v: &Vector) -> Vector {
    m.iter()
        .map(|row| Expr::add(row.iter().zip(v).map(|(a, b)| Expr::mul(a.clone(), b.clone()))))
        .collect()
}

pub fn mat_mat(a: &Matrix, b: &Matrix) -> Matrix {
    let d = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..d)
                .map(|c| {
                    Expr::add(
                        row.iter()
                            .zip(b)
                            .map(|(x, brow)| Expr::mul(x.clone(), brow[c].clone())),
                    )
                })
                .collect()
        })
        .collect()
}

fn vec_add(a: &Vector, b: &Vector) -> Vector {
    a.iter()
        .zip(b)
        .map(|(x, y)| Expr::add([x.clone(), y.clone()]))
        .collect()
}

fn mat_add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().zip(b).map(|(x, y)| vec_add(x, y)).collect()
}

impl Form {
    pub fn constant(c: Vector) -> Form {
        Form {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn variable(x: &Var, offset: Vector) -> Form {
        let d = offset.len();
        Form {
            constant: offset,
            coeffs: BTreeMap::from([(x.clone(), identity(d))]),
        }
    }

    /// `m * self`
    pub fn scale(&self, m: &Matrix) -> Form {
        Form {
            constant: mat_vec(m, &self.constant),
            coeffs: self
                .coeffs
                .iter()
                .map(|(x, c)| (x.clone(), mat_mat(m, c)))
                .filter(|(_, c)| !is_zero_matrix(c))
                .collect(),
        }
    }

    pub fn plus(&self, other: &Form) -> Form {
        let mut coeffs = self.coeffs.clone();
        for (x, c) in &other.coeffs {
            let merged = match coeffs.get(x) {
                Some(mine) => mat_add(mine, c),
                None => c.clone(),
            };
            coeffs.insert(x.clone(), merged);
        }
        Form {
            constant: vec_add(&self.constant, &other.constant),
            coeffs,
        }
    }

    pub fn map_exprs(&self, f: &mut impl FnMut(Expr) -> Expr) -> Form {
        Form {
            constant: self.constant.iter().cloned().map(&mut *f).collect(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(x, m)| {
                    (
                        x.clone(),
                        m.iter()
                            .map(|row| row.iter().cloned().map(&mut *f).collect())
                            .collect(),
                    )
                })
                .collect(),
        }
    }
}

/// `p >= q` for all variable values, strict in the first component when `strict`.
pub fn form_ge(p: &Form, q: &Form, strict: bool) -> Expr {
    let mut parts = Vec::new();
    for (r, (a, b)) in p.constant.iter().zip(&q.constant).enumerate() {
        parts.push(if strict && r == 0 {
            Expr::gt(a.clone(), b.clone())
        } else {
            Expr::ge(a.clone(), b.clone())
        });
    }
    for (x, qm) in &q.coeffs {
        match p.coeffs.get(x) {
            Some(pm) => {
                for (prow, qrow) in pm.iter().zip(qm) {
                    for (a, b) in prow.iter().zip(qrow) {
                        parts.push(Expr::ge(a.clone(), b.clone()));
                    }
                }
            }
            None => {
                for b in qm.iter().flatten() {
                    parts.push(Expr::ge(Expr::int(0), b.clone()));
                }
            }
        }
    }
    Expr::and(parts)
}

/// `max P >= max Q`: every form of `Q` is dominated by some form of `P`.
pub fn weight_ge(p: &Weight, q: &Weight, strict: bool) -> Expr {
    Expr::and(
        q.iter()
            .map(|qf| Expr::or(p.iter().map(|pf| form_ge(pf, qf, strict)))),
    )
}

/// Removes duplicate forms, keeping first occurrences.
pub fn dedup(forms: Vec<Form>) -> Weight {
    let mut out: Weight = Vec::with_capacity(forms.len());
    for f in forms {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}
