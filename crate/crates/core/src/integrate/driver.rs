use thiserror::Error;

use crate::oracle::{rk45_with, RkOptions};
use crate::polyfield::VectorField;
use crate::splitting::{SplitError, SplitScheme};

use super::trajectory::{norm_inf, AbortReason, Trajectory};
use super::{MAX_RECORDED_STATES, OVERFLOW_GUARD};

/// What advances the state.
#[derive(Clone, Copy, Debug)]
pub enum Method<'a> {
    Split(&'a SplitScheme),
    /// Adaptive reference integrator; the nominal step is used as its initial step.
    Rk45 {
        field: &'a VectorField,
        opts: RkOptions,
    },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("horizon must be non-negative and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("initial state has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("initial state is not finite")]
    NonFiniteState,
}

/// Number of fixed steps covering `[0, t_end]`; the last one may be shorter.
pub fn step_count(h: f64, t_end: f64) -> usize {
    if t_end <= 0.0 {
        return 0;
    }
    let ratio = t_end / h;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Keeps at most [`MAX_RECORDED_STATES`] states.
pub fn default_record_every(steps: usize) -> usize {
    steps.div_ceil(MAX_RECORDED_STATES).max(1)
}

pub(crate) fn abort_reason(err: &SplitError) -> AbortReason {
    match err {
        SplitError::SingularStep { j, t_star } => AbortReason::SingularStep {
            j: j.to_string(),
            t_star: *t_star,
        },
        other => AbortReason::DomainError {
            message: other.to_string(),
        },
    }
}

pub(crate) fn check_inputs(dim: usize, x0: &[f64], h: f64, t_end: f64) -> Result<(), RunError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(RunError::InvalidStep(h));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(RunError::InvalidHorizon(t_end));
    }
    if x0.len() != dim {
        return Err(RunError::DimensionMismatch {
            expected: dim,
            found: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(RunError::NonFiniteState);
    }
    Ok(())
}

/// Integrates from `x0` over `[0, t_end]`.
///
/// Runtime failures (singular steps, domain errors, `|x|_inf > 1e12`) stop the
/// run and are reported in the trajectory status; only invalid arguments are errors.
pub fn run(
    method: &Method<'_>,
    x0: &[f64],
    h: f64,
    t_end: f64,
    record_every: usize,
) -> Result<Trajectory, RunError> {
    match method {
        Method::Split(scheme) => {
            check_inputs(scheme.dim(), x0, h, t_end)?;
            Ok(run_split(scheme, x0, h, t_end, record_every))
        }
        Method::Rk45 { field, opts } => {
            check_inputs(field.dim(), x0, h, t_end)?;
            let opts = RkOptions { h_init: h, ..*opts };
            Ok(rk45_with(
                |x, out| field.evaluate_into(x, out),
                x0,
                t_end,
                &opts,
                record_every,
            ))
        }
    }
}

fn run_split(
    scheme: &SplitScheme,
    x0: &[f64],
    h: f64,
    t_end: f64,
    record_every: usize,
) -> Trajectory {
    let record_every = record_every.max(1);
    let steps = step_count(h, t_end);
    let mut traj = Trajectory::start(0.0, x0);
    let mut x = x0.to_vec();
    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = if k == steps { t_end } else { k as f64 * h };
        if let Err(e) = scheme.step_in_place(&mut x, t_next - t) {
            traj.abort(abort_reason(&e), t);
            break;
        }
        t = t_next;
        traj.visit(&x);
        if x.iter().any(|v| !v.is_finite()) {
            traj.abort(AbortReason::NonFinite, t);
            break;
        }
        let ninf = norm_inf(&x);
        if ninf > OVERFLOW_GUARD {
            traj.record(t, &x);
            traj.abort(AbortReason::Overflow { norm_inf: ninf }, t);
            return traj;
        }
        if k == steps || k % record_every == 0 {
            traj.record(t, &x);
        }
    }
    if traj.final_time() < t {
        traj.record(t, &x);
    }
    traj
}
