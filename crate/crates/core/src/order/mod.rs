//! Weighted path orders as reduction pairs.

mod concrete;
mod encode;
mod params;
mod weight;

pub use concrete::{ConcreteOrder, ConcreteSymbol};
pub use encode::{choose_shapes, Encoder, SymbolTemplate, MAX_FORMS};
pub use params::{
    CoeffRange, ConstRange, OrderError, OrderParams, PrecedenceKind, StatusKind, Template,
    DEFAULT_BOUND, PRESET_NAMES,
};
pub use weight::{form_ge, weight_ge, Form, Shape, Weight};
