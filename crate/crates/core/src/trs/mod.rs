//! Terms, rules, rewrite systems and the syntactic algorithms on them.

mod parse;
mod subst;
mod term;

pub use parse::{parse_term_with_vars, parse_trs, print_trs, ParseError};
pub use subst::{
    apply_substitution, match_term, normalize, rewrite_at, rewrite_step, rewrite_steps, unify,
    Substitution,
};
pub use term::{defined_symbols, Position, Rule, Symbol, SymbolKind, Term, Trs, Var};
