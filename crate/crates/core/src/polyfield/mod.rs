//! Sparse multivariate (Laurent) polynomials with exact rational exponents,
//! and polynomial vector fields built from them.

mod field;
pub mod io;
mod multi_index;
mod polynomial;

use thiserror::Error;

pub use field::{coefficient_count, VectorField};
pub(crate) use multi_index::is_minus_one;
pub use multi_index::{
    exponent_to_f64, format_exponent, parse_exponent, pow_exact, Exponent, MultiIndex,
};
pub use polynomial::SparsePolynomial;

/// Relative tolerance for treating a summed divergence coefficient as zero.
pub const TAU_DIV: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("x_{} = {value} is outside the domain of exponent {exponent}", axis + 1)]
    Domain {
        axis: usize,
        value: f64,
        exponent: Exponent,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("zero denominator in exponent")]
    ZeroDenominator,
    #[error("coefficient count N({n}, {d}) overflows u64")]
    Overflow { n: u64, d: u64 },
    #[error("{0}")]
    Parse(String),
    #[error("invalid problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
