//! Splitting of a divergence-free field into exactly solvable pieces and
//! their composition into first- and second-order volume-preserving steps.

mod edfvf;
mod scheme;
mod shear;

use thiserror::Error;

use crate::polyfield::{MultiIndex, PolyError};

pub use edfvf::{real_monomial, Edfvf, C_BRANCH_TOL};
pub use scheme::{decompose_diagonal, Flow, Order, SingularPolicy, SplitScheme, MAX_SUBSTEP_DEPTH};
pub use shear::ShearField;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("field is not divergence-free: monomial x^{j} has residual coefficient {residual:e}")]
    NotDivergenceFree { j: MultiIndex, residual: f64 },
    #[error("component {} term x^{exponent} does not depend on x_{}", component + 1, component + 1)]
    NotDiagonal {
        component: usize,
        exponent: MultiIndex,
    },
    #[error("shear component {} depends on x_{}", axis + 1, axis + 1)]
    InvalidShear { axis: usize },
    #[error("step crosses the blow-up time t* = {t_star:e} of the flow for x^{j}")]
    SingularStep { j: MultiIndex, t_star: f64 },
    #[error("elementary field with a = 0 has no integral basis")]
    DegenerateField,
    #[error("invalid elementary field: {0}")]
    InvalidEdfvf(String),
    #[error("unsupported composition order {0}")]
    InvalidOrder(u8),
    #[error(transparent)]
    Domain(#[from] PolyError),
}
