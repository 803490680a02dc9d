use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("unknown order preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid order parameters: {0}")]
    Invalid(String),
    #[error("weight of `{term}` needs more than {limit} linear pieces")]
    TooManyForms { term: String, limit: usize },
    #[error("symbol `{0}` has no interpretation")]
    UnknownSymbol(String),
    #[error("cannot decode model: {0}")]
    Decode(String),
}

/// Shape family of the weight algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Template {
    /// `w + sum c_i x_i`
    Pol,
    /// `max_i (p_i + c_i x_i)`, constants as in `Pol`
    Max,
    /// per symbol either of the above, chosen from the problem
    MaxPol,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoeffRange {
    One,
    ZeroOne,
    OneTwo,
    PosNat,
    Nat,
}

impl CoeffRange {
    pub fn bounds(self, bound: i64) -> (i64, i64) {
        match self {
            CoeffRange::One => (1, 1),
            CoeffRange::ZeroOne => (0, 1),
            CoeffRange::OneTwo => (1, 2),
            CoeffRange::PosNat => (1, bound.max(1)),
            CoeffRange::Nat => (0, bound.max(0)),
        }
    }

    pub fn allows_zero(self) -> bool {
        matches!(self, CoeffRange::ZeroOne | CoeffRange::Nat)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstRange {
    Zero,
    Nat,
    Int,
}

impl ConstRange {
    pub fn bounds(self, bound: i64) -> (i64, i64) {
        match self {
            ConstRange::Zero => (0, 0),
            ConstRange::Nat => (0, bound),
            ConstRange::Int => (-bound, bound),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrecedenceKind {
    None,
    Quasi,
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StatusKind {
    Empty,
    Total,
    Partial,
}

/// Search space of a weighted path order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderParams {
    pub name: String,
    pub template: Template,
    pub coeff: CoeffRange,
    pub constant: ConstRange,
    pub precedence: PrecedenceKind,
    pub status: StatusKind,
    pub collapse: bool,
    pub monotone: bool,
    pub admissible: bool,
    /// Side length of coefficient matrices; 1 for scalars.
    pub dimension: usize,
    /// Upper bound of unbounded ranges (lower bound `-bound` for `Int`).
    pub bound: i64,
    /// Keep non-linear products for the solver instead of failing.
    pub nonlinear: bool,
}

pub const DEFAULT_BOUND: i64 = 4;
pub const PRESET_NAMES: &[&str] = &[
    "POLO-linear-mono",
    "LPO-mono",
    "KBO",
    "TKBO",
    "POLO-linear",
    "MaxPOLO",
    "LPO-AF",
    "KBO-AF",
    "Matrix",
    "WPO-ms",
];

impl OrderParams {
    #[allow(clippy::too_many_arguments)]
    fn row(
        name: &str,
        template: Template,
        coeff: CoeffRange,
        constant: ConstRange,
        precedence: PrecedenceKind,
        status: StatusKind,
        collapse: bool,
        monotone: bool,
        admissible: bool,
    ) -> Self {
        OrderParams {
            name: name.to_string(),
            template,
            coeff,
            constant,
            precedence,
            status,
            collapse,
            monotone,
            admissible,
            dimension: 1,
            bound: DEFAULT_BOUND,
            nonlinear: false,
        }
    }

    /// A named parameter row. `Matrix(d)` sets the dimension.
    pub fn preset(name: &str) -> Result<Self, OrderError> {
        use CoeffRange as C;
        use ConstRange as K;
        use PrecedenceKind as P;
        use StatusKind as S;
        use Template as T;
        if let Some(d) = name
            .strip_prefix("Matrix(")
            .and_then(|r| r.strip_suffix(')'))
        {
            let d: usize = d
                .parse()
                .ok()
                .filter(|&d| d >= 1)
                .ok_or_else(|| OrderError::UnknownPreset(name.to_string()))?;
            let mut p = Self::preset("Matrix")?;
            p.dimension = d;
            p.name = name.to_string();
            return Ok(p);
        }
        let p = match name {
            "POLO-linear-mono" => Self::row(name, T::Pol, C::PosNat, K::Nat, P::None, S::Empty, false, true, false),
            "LPO-mono" => Self::row(name, T::Max, C::One, K::Zero, P::Quasi, S::Total, false, true, false),
            "KBO" => Self::row(name, T::Pol, C::One, K::Nat, P::Quasi, S::Total, false, true, true),
            "TKBO" => Self::row(name, T::Pol, C::PosNat, K::Nat, P::Quasi, S::Total, false, true, true),
            "POLO-linear" => Self::row(name, T::Pol, C::Nat, K::Nat, P::None, S::Empty, false, false, false),
            "MaxPOLO" => Self::row(name, T::MaxPol, C::Nat, K::Int, P::None, S::Empty, false, false, false),
            "LPO-AF" => Self::row(name, T::Max, C::ZeroOne, K::Zero, P::Quasi, S::Total, true, false, false),
            "KBO-AF" => Self::row(name, T::Pol, C::ZeroOne, K::Nat, P::Quasi, S::Total, true, false, false),
            "Matrix" => {
                let mut p = Self::row(name, T::Pol, C::Nat, K::Nat, P::None, S::Empty, false, false, false);
                p.dimension = 2;
                p
            }
            "WPO-ms" => Self::row(name, T::MaxPol, C::ZeroOne, K::Nat, P::Quasi, S::Partial, true, false, false),
            _ => return Err(OrderError::UnknownPreset(name.to_string())),
        };
        Ok(p)
    }

    /// Checks the constraints that make the described pair sound.
    pub fn validate(&self) -> Result<(), OrderError> {
        let bad = |m: &str| Err(OrderError::Invalid(format!("{}: {m}", self.name)));
        if self.dimension == 0 {
            return bad("dimension must be positive");
        }
        if self.bound < 1 {
            return bad("range bound must be positive");
        }
        if self.dimension > 1 && self.template != Template::Pol {
            return bad("matrix coefficients need the sum template");
        }
        if self.admissible {
            if self.template != Template::Pol || self.dimension != 1 {
                return bad("admissibility needs the scalar sum template");
            }
            if !matches!(
                self.coeff,
                CoeffRange::One | CoeffRange::ZeroOne | CoeffRange::PosNat
            ) {
                return bad("admissibility needs coefficients 1, {0,1} or positive");
            }
            if self.constant == ConstRange::Int {
                return bad("admissibility needs natural constants");
            }
        }
        if self.monotone {
            if self.coeff.allows_zero() {
                return bad("monotone orders need positive coefficients");
            }
            if self.collapse {
                return bad("monotone orders cannot use argument filters");
            }
            if self.status == StatusKind::Partial {
                return bad("monotone orders need total or empty status");
            }
            if self.constant == ConstRange::Int {
                return bad("monotone orders need natural constants");
            }
            let pure_weights = self.status == StatusKind::Empty
                && self.precedence == PrecedenceKind::None
                && self.template == Template::Pol;
            if self.status != StatusKind::Total && !pure_weights {
                return bad("monotone orders need total status unless they are plain polynomial interpretations");
            }
        }
        Ok(())
    }

    /// The monotone counterpart used before dependency pairs are formed.
    pub fn to_monotone(&self) -> Self {
        let mut p = self.clone();
        p.monotone = true;
        p.collapse = false;
        p.coeff = match p.coeff {
            CoeffRange::ZeroOne => CoeffRange::One,
            CoeffRange::Nat => CoeffRange::PosNat,
            c => c,
        };
        if p.constant == ConstRange::Int {
            p.constant = ConstRange::Nat;
        }
        if p.status == StatusKind::Partial {
            p.status = StatusKind::Total;
        }
        if p.status == StatusKind::Empty
            && (p.precedence != PrecedenceKind::None || p.template != Template::Pol)
        {
            p.status = StatusKind::Total;
        }
        p
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Template::Pol => "sum",
            Template::Max => "max",
            Template::MaxPol => "maxsum",
        })
    }
}

impl fmt::Display for CoeffRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoeffRange::One => "1",
            CoeffRange::ZeroOne => "01",
            CoeffRange::OneTwo => "12",
            CoeffRange::PosNat => "pos",
            CoeffRange::Nat => "nat",
        })
    }
}

impl fmt::Display for ConstRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstRange::Zero => "0",
            ConstRange::Nat => "nat",
            ConstRange::Int => "int",
        })
    }
}

impl fmt::Display for PrecedenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecedenceKind::None => "none",
            PrecedenceKind::Quasi => "quasi",
            PrecedenceKind::Strict => "strict",
        })
    }
}

impl fmt::Display for StatusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatusKind::Empty => "empty",
            StatusKind::Total => "total",
            StatusKind::Partial => "partial",
        })
    }
}

impl fmt::Display for OrderParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (template={} coeff={} const={} prec={} status={}",
            self.name, self.template, self.coeff, self.constant, self.precedence, self.status
        )?;
        if self.dimension > 1 {
            write!(f, " dim={}", self.dimension)?;
        }
        if self.collapse {
            f.write_str(" af")?;
        }
        if self.admissible {
            f.write_str(" admissible")?;
        }
        if self.monotone {
            f.write_str(" monotone")?;
        }
        f.write_str(")")
    }
}

macro_rules! from_str_table {
    ($ty:ty, $what:literal, { $($($s:literal)|+ => $v:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = OrderError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.to_ascii_lowercase().as_str() {
                    $($($s)|+ => Ok($v),)+
                    _ => Err(OrderError::Invalid(format!(concat!("unknown ", $what, " `{}`"), s))),
                }
            }
        }
    };
}

from_str_table!(Template, "template", {
    "sum" | "pol" | "poly" => Template::Pol,
    "max" => Template::Max,
    "maxsum" | "mp" | "maxpol" => Template::MaxPol,
});

from_str_table!(CoeffRange, "coefficient range", {
    "1" | "one" => CoeffRange::One,
    "01" | "0-1" | "bool" => CoeffRange::ZeroOne,
    "12" | "1-2" => CoeffRange::OneTwo,
    "pos" | "posnat" => CoeffRange::PosNat,
    "nat" => CoeffRange::Nat,
});

from_str_table!(ConstRange, "constant range", {
    "0" | "zero" => ConstRange::Zero,
    "nat" => ConstRange::Nat,
    "int" => ConstRange::Int,
});

from_str_table!(PrecedenceKind, "precedence", {
    "none" | "no" => PrecedenceKind::None,
    "quasi" => PrecedenceKind::Quasi,
    "strict" => PrecedenceKind::Strict,
});

from_str_table!(StatusKind, "status", {
    "empty" | "none" => StatusKind::Empty,
    "total" => StatusKind::Total,
    "partial" => StatusKind::Partial,
});

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let lpo = OrderParams::preset("LPO-mono").unwrap();
        assert_eq!(
            (lpo.template, lpo.coeff, lpo.constant, lpo.precedence, lpo.status),
            (Template::Max, CoeffRange::One, ConstRange::Zero, PrecedenceKind::Quasi, StatusKind::Total)
        );
        let mp = OrderParams::preset("MaxPOLO").unwrap();
        assert_eq!(
            (mp.template, mp.coeff, mp.constant, mp.precedence, mp.status),
            (Template::MaxPol, CoeffRange::Nat, ConstRange::Int, PrecedenceKind::None, StatusKind::Empty)
        );
        let m = OrderParams::preset("Matrix(3)").unwrap();
        assert_eq!((m.template, m.coeff, m.constant, m.dimension), (Template::Pol, CoeffRange::Nat, ConstRange::Nat, 3));
        let w = OrderParams::preset("WPO-ms").unwrap();
        assert!(w.collapse && w.status == StatusKind::Partial && w.template == Template::MaxPol);
        let k = OrderParams::preset("KBO").unwrap();
        assert!(k.admissible && k.monotone);
        assert!(OrderParams::preset("RPO").is_err());
        assert!(OrderParams::preset("Matrix(0)").is_err());
    }

    #[test]
    fn presets_validate() {
        for name in PRESET_NAMES {
            OrderParams::preset(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn monotone_rejections() {
        let mut p = OrderParams::preset("POLO-linear").unwrap();
        p.monotone = true;
        assert!(p.validate().is_err());
        assert!(p.to_monotone().validate().is_ok());
        let mut p = OrderParams::preset("LPO-AF").unwrap();
        p.monotone = true;
        assert!(p.validate().is_err());
        let m = p.to_monotone();
        m.validate().unwrap();
        assert!(!m.collapse);
        for name in PRESET_NAMES {
            OrderParams::preset(name).unwrap().to_monotone().validate().unwrap();
        }
    }

    #[test]
    fn parse_ranges() {
        assert_eq!("01".parse::<CoeffRange>().unwrap(), CoeffRange::ZeroOne);
        assert_eq!("INT".parse::<ConstRange>().unwrap(), ConstRange::Int);
        assert!("weird".parse::<StatusKind>().is_err());
    }
}
