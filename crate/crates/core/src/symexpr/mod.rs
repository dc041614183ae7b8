//! Exact symbolic expressions over rational coefficients.
//!
//! An [`Expr`] is a sum of polynomial multiples of transcendental factors
//! (`exp` of a polynomial, fractional powers and absolute values of
//! polynomials) over a product of polynomial denominator atoms. Every
//! constructor returns the canonical form, so structural equality is
//! mathematical equality for rational functions.

mod calculus;
mod eval;
mod expr;
mod parse;
pub mod poly;
mod print;

pub use eval::{env, equals, Compiled, Env, Equality};
pub use expr::{Expr, Extra};
pub use parse::{parse, parse_rational, parse_with};
pub use poly::{Rational, SymMono, SymPoly};

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier '{name}' at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("unknown function '{name}' at {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole: denominator factor {factor} vanishes")]
    Pole { factor: String },
    #[error("unbound symbol '{0}'")]
    Unbound(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
}
