//! Explicit volume-preserving splitting integrators for divergence-free
//! vector fields with (Laurent) polynomial components.
//!
//! The diagonal part of the field is split by the monomials of its divergence
//! into elementary divergence-free fields `x_i' = a_i x_i x^j`, each integrated
//! in closed form. The off-diagonal part is integrated by canonical shears.
//! Composing the exact flows gives first-order (Lie-Trotter) and second-order
//! (Strang) methods that preserve phase-space volume.

pub mod cli;
pub mod integrate;
pub mod oracle;
pub mod polyfield;
pub mod splitting;

pub use polyfield::{MultiIndex, SparsePolynomial, VectorField};
pub use splitting::{Edfvf, Order, SplitScheme};
