//! Termination analysis for first-order term rewrite systems.
//!
//! The analyzer follows the dependency pair framework. Reduction pairs are
//! all instances of the weighted path order, searched for by encoding the
//! order constraints as linear integer arithmetic and handing them to an
//! external SMT-LIB 2.0 solver over a pipe.

pub mod dp;
pub mod nonterm;
pub mod order;
pub mod pipeline;
pub mod smt;
pub mod trs;
pub mod uncurry;
