//! Numerical cross-checks: weighted quadrature with singular endpoints,
//! weighted Sobolev norms, Bessel integrability probes, semiboundedness
//! estimates and the embedding spot-check.

use thiserror::Error;

use crate::invert::InvertError;
use crate::specfun::SpecError;
use crate::symexpr::ExprError;

pub mod embedding;
pub mod norms;
pub mod probes;
pub mod quad;
pub mod semibound;

pub use embedding::{dyadic_centres, embedding_spotcheck, EmbeddingReport, EmbeddingRow};
pub use norms::{domain_membership_probe, quad_weighted, sobolev_norm, Membership, TestFunction, WeightedMeasure};
pub use probes::{integrability_probe, BesselKind, Endpoint, IntegrabilityProbe};
pub use quad::Integral;
pub use semibound::{gaussian_ratio, semibound_estimate, GaussianFamily, SemiboundEstimate};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum NumError {
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Invert(#[from] InvertError),
}
