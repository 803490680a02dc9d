use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// A function symbol. Identity is structural over name, kind and arity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<SymbolData>);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum SymbolData {
    Plain { name: String, arity: usize },
    /// The marked copy `f#` used as root of dependency pairs.
    Sharp { base: Symbol },
    /// `app^level base`, produced by uncurrying.
    Uncurried {
        app: Symbol,
        base: Symbol,
        level: usize,
        arity: usize,
    },
}

/// Coarse classification of a [`Symbol`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Plain,
    Sharp,
    Uncurried,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Symbol(Arc::new(SymbolData::Plain {
            name: name.into(),
            arity,
        }))
    }

    /// The marked version of this symbol. Marking is idempotent.
    pub fn sharp(&self) -> Self {
        if self.is_sharp() {
            return self.clone();
        }
        Symbol(Arc::new(SymbolData::Sharp { base: self.clone() }))
    }

    /// The symbol `app^level base`; `level == 0` yields `base` itself.
    pub fn uncurried(app: &Symbol, base: &Symbol, level: usize) -> Self {
        if level == 0 {
            return base.clone();
        }
        let arity = base.arity() + level * (app.arity() - 1);
        Symbol(Arc::new(SymbolData::Uncurried {
            app: app.clone(),
            base: base.clone(),
            level,
            arity,
        }))
    }

    pub fn arity(&self) -> usize {
        match &*self.0 {
            SymbolData::Plain { arity, .. } => *arity,
            SymbolData::Sharp { base } => base.arity(),
            SymbolData::Uncurried { arity, .. } => *arity,
        }
    }

    pub fn kind(&self) -> SymbolKind {
        match &*self.0 {
            SymbolData::Plain { .. } => SymbolKind::Plain,
            SymbolData::Sharp { .. } => SymbolKind::Sharp,
            SymbolData::Uncurried { .. } => SymbolKind::Uncurried,
        }
    }

    pub fn is_sharp(&self) -> bool {
        self.kind() == SymbolKind::Sharp
    }

    /// For a marked symbol, the unmarked one; otherwise the symbol itself.
    pub fn unsharp(&self) -> Symbol {
        match &*self.0 {
            SymbolData::Sharp { base } => base.clone(),
            _ => self.clone(),
        }
    }

    /// For `app^l g`, returns `(app, g, l)`.
    pub fn uncurried_parts(&self) -> Option<(&Symbol, &Symbol, usize)> {
        match &*self.0 {
            SymbolData::Uncurried {
                app, base, level, ..
            } => Some((app, base, *level)),
            _ => None,
        }
    }

    /// Printable name: `f`, `f#`, or `app_2_g` for uncurried symbols.
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            SymbolData::Plain { name, .. } => f.write_str(name),
            SymbolData::Sharp { base } => write!(f, "{base}#"),
            SymbolData::Uncurried {
                app, base, level, ..
            } => write!(f, "{app}_{level}_{base}"),
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self, self.arity())
    }
}

/// A variable. Parsed variables carry tag 0; renamed copies get fresh tags.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    name: Arc<str>,
    tag: u32,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var {
            name: name.into(),
            tag: 0,
        }
    }

    pub fn with_tag(&self, tag: u32) -> Self {
        Var {
            name: self.name.clone(),
            tag,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tag(&self) -> u32 {
        self.tag
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tag == 0 {
            f.write_str(&self.name)
        } else {
            write!(f, "{}'{}", self.name, self.tag)
        }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A first-order term.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
}

/// Path from the root: the i-th entry selects argument `i` (0-based).
pub type Position = Vec<usize>;

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn app(sym: Symbol, args: Vec<Term>) -> Term {
        debug_assert_eq!(sym.arity(), args.len(), "arity mismatch for {sym}");
        Term::App(sym, args)
    }

    pub fn constant(sym: Symbol) -> Term {
        Term::app(sym, Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.args().iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables in left-to-right order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.visit_vars(&mut |v| {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        });
        out
    }

    pub fn var_set(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    /// Number of occurrences of each variable.
    pub fn var_counts(&self) -> BTreeMap<Var, usize> {
        let mut out = BTreeMap::new();
        self.visit_vars(&mut |v| *out.entry(v.clone()).or_insert(0) += 1);
        out
    }

    fn visit_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Term::Var(v) => f(v),
            Term::App(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit_symbols(&mut |s| {
            out.insert(s.clone());
        });
        out
    }

    fn visit_symbols(&self, f: &mut impl FnMut(&Symbol)) {
        if let Term::App(s, args) = self {
            f(s);
            args.iter().for_each(|a| a.visit_symbols(f));
        }
    }

    pub fn contains_symbol(&self, sym: &Symbol) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(s, args) => s == sym || args.iter().any(|a| a.contains_symbol(sym)),
        }
    }

    pub fn contains_var(&self, var: &Var) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(var)),
        }
    }

    /// Pre-order (leftmost-outermost) list of subterms with their positions.
    pub fn subterms(&self) -> Vec<(Position, &Term)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_subterms(&mut path, &mut out);
        out
    }

    fn collect_subterms<'a>(&'a self, path: &mut Position, out: &mut Vec<(Position, &'a Term)>) {
        out.push((path.clone(), self));
        for (i, a) in self.args().iter().enumerate() {
            path.push(i);
            a.collect_subterms(path, out);
            path.pop();
        }
    }

    pub fn at(&self, pos: &[usize]) -> Option<&Term> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.args().get(i)?.at(rest),
        }
    }

    /// Replaces the subterm at `pos`. Returns `None` for an invalid position.
    pub fn replace_at(&self, pos: &[usize], with: Term) -> Option<Term> {
        match pos.split_first() {
            None => Some(with),
            Some((&i, rest)) => match self {
                Term::Var(_) => None,
                Term::App(f, args) => {
                    let mut args = args.clone();
                    let new = args.get(i)?.replace_at(rest, with)?;
                    args[i] = new;
                    Some(Term::App(f.clone(), args))
                }
            },
        }
    }

    /// Applies `f` to every variable, building a new term.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::App(s, args) => Term::App(s.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }

    /// Renames every variable to carry `tag`.
    pub fn retag(&self, tag: u32) -> Term {
        self.map_vars(&mut |v| Term::Var(v.with_tag(tag)))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(s, args) if args.is_empty() => write!(f, "{s}"),
            Term::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A rewrite rule `lhs -> rhs` with a stable index.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub id: usize,
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    pub fn new(id: usize, lhs: Term, rhs: Term) -> Self {
        Rule { id, lhs, rhs }
    }

    /// Well-formedness: non-variable lhs and `Var(rhs) ⊆ Var(lhs)`.
    pub fn is_well_formed(&self) -> bool {
        !self.lhs.is_var() && self.rhs.var_set().is_subset(&self.lhs.var_set())
    }

    /// Copy with all variables carrying `tag`.
    pub fn retag(&self, tag: u32) -> Rule {
        Rule::new(self.id, self.lhs.retag(tag), self.rhs.retag(tag))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.id, self)
    }
}

/// A term rewrite system: rules in input order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trs {
    pub rules: Vec<Rule>,
}

impl Trs {
    pub fn new(rules: Vec<Rule>) -> Self {
        Trs { rules }
    }

    /// Builds a TRS from lhs/rhs pairs, numbering rules from 0.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Term, Term)>) -> Self {
        Trs {
            rules: pairs
                .into_iter()
                .enumerate()
                .map(|(i, (l, r))| Rule::new(i, l, r))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn rule(&self, id: usize) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// All symbols occurring in the rules.
    pub fn signature(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            out.extend(r.lhs.symbols());
            out.extend(r.rhs.symbols());
        }
        out
    }

    /// Root symbols of left-hand sides.
    pub fn defined_symbols(&self) -> BTreeSet<Symbol> {
        self.rules
            .iter()
            .filter_map(|r| r.lhs.root().cloned())
            .collect()
    }

    /// Renumbers rules 0..n in order.
    pub fn renumbered(mut self) -> Self {
        for (i, r) in self.rules.iter_mut().enumerate() {
            r.id = i;
        }
        self
    }
}

/// Root symbols of left-hand sides of `trs`.
pub fn defined_symbols(trs: &Trs) -> BTreeSet<Symbol> {
    trs.defined_symbols()
}
