//! Independent reference machinery: an adaptive Dormand-Prince integrator and
//! finite-difference Jacobian determinants.

mod jacobian;
mod rk45;

pub use jacobian::{fd_jacobian, jacobian_det, lu_det, Stencil, DEFAULT_DELTA};
pub use rk45::{rk45, rk45_endpoint, rk45_with, RkError, RkOptions};
