//! Fixed-step trajectories, Poincaré sections and the built-in problems.

mod driver;
mod poincare;
pub mod problems;
mod trajectory;

pub use driver::{default_record_every, run, step_count, Method, RunError};
pub use poincare::{poincare, Direction, Section, SectionSpec, CROSSING_TOL, MAX_BISECTIONS};
pub use trajectory::{norm2, norm_inf, AbortReason, Status, Trajectory};

/// Runs stop once `|x|_inf` exceeds this.
pub const OVERFLOW_GUARD: f64 = 1e12;

/// Upper bound on stored states when `record_every` is chosen automatically.
pub const MAX_RECORDED_STATES: usize = 1_000_000;
