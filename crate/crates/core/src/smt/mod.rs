//! SMT expressions, linearisation, SMT-LIB printing and the solver session.

mod expr;
mod linearize;
mod print;
mod session;
mod sexp;

pub use expr::{ite_range, Assignment, Definition, Expr, Node, Sort, Value};
pub use linearize::{linearize, Linearizer, NameGen, NonlinearResidual};
pub use print::{definitions, inline_single_use, print_assertion, print_define_fun, print_expr, print_smtlib};
pub use session::{
    unusable_fraction, CheckResult, SessionStats, SolverConfig, SolverError, SolverSession,
    DEFAULT_SOLVER, DEFAULT_TIMEOUT, STALE_THRESHOLD,
};
pub use sexp::{is_complete, parse_get_value, parse_sexp, parse_sexp_bytes, parse_value, SExp, SExpError};
