//! Differential operators over vector-field frames: composition in PBW
//! normal form, Lie brackets, weight conjugation and rewriting into a
//! Lie-manifold frame with smoothness certificates.

mod diffop;
mod field;
mod frame;
mod transform;

pub(crate) use diffop::render_terms;
pub use diffop::{DiffOp, Word};
pub use field::{commutator, VectorField};
pub use frame::Frame;
pub use transform::{change_variable, conjugate_by_weight, smoothness_check, to_frame};

use thiserror::Error;

use crate::symexpr::ExprError;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OpError {
    #[error("operators are declared over different frames")]
    FrameMismatch,
    #[error("frame fields are linearly dependent")]
    DegenerateFrame,
    #[error("coefficient of {word} is not smooth on the singular set: {coefficient}")]
    NotInFrameAlgebra { word: String, coefficient: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
