//! Invertibility decisions for limit operators: symbol infima on abelian
//! groups and a reduction to a Bessel-type ODE on the affine group.

use serde::Serialize;
use thiserror::Error;

use crate::limits::LimitError;
use crate::opalgebra::OpError;
use crate::symexpr::ExprError;

mod affine;
mod symbol;
pub mod upoly;

pub use affine::{
    affine_reduce, bessel_injectivity, decide_affine, reduced_boundary_ops, AffineEvidence, BesselBranch, BesselTable,
    ReducedOp,
};
pub use symbol::{decide_abelian, decide_tangency, fourier_symbol, minimize, symbol_vars, PolyMin, SymbolPoly};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum InvertError {
    #[error("operator does not live on an abelian group")]
    NotAbelian,
    #[error("operator does not live on the affine group")]
    NotAffine,
    #[error("coefficient {0} is not a polynomial in the parameters")]
    NonPolynomialCoefficient(String),
    #[error("polynomial is unbounded below")]
    Unbounded,
    #[error("Bessel order is imaginary or zero for h0 = {0}")]
    ImaginaryOrder(String),
    #[error("Bessel order depends on unbound parameters: h0 = {0}")]
    SymbolicOrder(String),
    #[error("unsupported operator shape: {0}")]
    UnsupportedShape(String),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    LeftInvertible,
    NotLeftInvertible,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Evidence {
    SymbolInfimum {
        infimum: f64,
        infimum_exact: Option<String>,
        minimizer: Vec<f64>,
        minimizer_exact: Option<Vec<String>>,
        constant: f64,
    },
    Witness {
        xi: Vec<f64>,
        xi_exact: Option<Vec<String>>,
        symbol_modulus: f64,
    },
    Affine(Box<AffineEvidence>),
    Reason {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub evidence: Evidence,
}

impl Verdict {
    pub fn inconclusive(reason: impl Into<String>) -> Verdict {
        Verdict {
            status: Status::Inconclusive,
            evidence: Evidence::Reason { reason: reason.into() },
        }
    }
}
