//! Dormand-Prince 5(4) with a PI step-size controller.

use std::fmt::Display;

use thiserror::Error;

use crate::integrate::{norm_inf, AbortReason, Trajectory, OVERFLOW_GUARD};
use crate::polyfield::VectorField;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RkOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; `0.0` selects one automatically.
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            abs_tol: 1e-6,
            h_init: 0.0,
            h_min: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

impl RkOptions {
    /// Same relative and absolute tolerance.
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), RkError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.h_min > 0.0
            && self.h_init >= 0.0
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(RkError::InvalidOptions(*self))
        }
    }
}

#[derive(Debug, Error)]
pub enum RkError {
    #[error("step size {h:e} fell below h_min at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("maximum number of steps reached at t = {t}")]
    MaxSteps { t: f64 },
    #[error("integration aborted at t = {t}: {reason:?}")]
    Aborted { t: f64, reason: AbortReason },
    #[error("invalid options {0:?}")]
    InvalidOptions(RkOptions),
}

// Butcher tableau (autonomous right-hand side, so the nodes c_i are unused)
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// 5th minus 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const SHRINK_LIMIT: f64 = 0.2;
const GROWTH_LIMIT: f64 = 5.0;

/// Integrates a polynomial field, failing if the run aborts.
pub fn rk45(
    field: &VectorField,
    x0: &[f64],
    t_end: f64,
    opts: &RkOptions,
) -> Result<Trajectory, RkError> {
    opts.validate()?;
    let traj = rk45_with(|x, out| field.evaluate_into(x, out), x0, t_end, opts, 1);
    into_result(traj)
}

/// Final state of a run with an arbitrary right-hand side.
pub fn rk45_endpoint<F, E>(
    rhs: F,
    x0: &[f64],
    t_end: f64,
    opts: &RkOptions,
) -> Result<Vec<f64>, RkError>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<(), E>,
    E: Display,
{
    opts.validate()?;
    let traj = rk45_with(rhs, x0, t_end, opts, usize::MAX);
    into_result(traj).map(|t| t.final_state().to_vec())
}

fn into_result(traj: Trajectory) -> Result<Trajectory, RkError> {
    match traj.status().clone() {
        crate::integrate::Status::Completed => Ok(traj),
        crate::integrate::Status::Aborted { reason, t_abort } => Err(match reason {
            AbortReason::StepUnderflow { h } => RkError::StepUnderflow { t: t_abort, h },
            AbortReason::MaxSteps { .. } => RkError::MaxSteps { t: t_abort },
            reason => RkError::Aborted { t: t_abort, reason },
        }),
    }
}

/// Adaptive integration from `t = 0` to `t_end`; failures are encoded in the
/// trajectory status. Every `record_every`-th accepted state and the final one are kept.
///
/// # Panics
/// If `opts` is invalid; use [`RkOptions::validate`] first.
pub fn rk45_with<F, E>(
    mut rhs: F,
    x0: &[f64],
    t_end: f64,
    opts: &RkOptions,
    record_every: usize,
) -> Trajectory
where
    F: FnMut(&[f64], &mut [f64]) -> Result<(), E>,
    E: Display,
{
    opts.validate().expect("invalid RkOptions");
    let n = x0.len();
    let record_every = record_every.max(1);
    let mut traj = Trajectory::start(0.0, x0);
    if t_end <= 0.0 {
        return traj;
    }

    let mut t = 0.0;
    let mut y = x0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    macro_rules! eval {
        ($x:expr, $out:expr) => {
            if let Err(e) = rhs($x, $out) {
                traj.abort(
                    AbortReason::DomainError {
                        message: e.to_string(),
                    },
                    t,
                );
                if traj.final_time() < t {
                    traj.record(t, &y);
                }
                return traj;
            }
        };
    }

    eval!(&y, &mut k1);
    let mut h = if opts.h_init > 0.0 {
        opts.h_init
    } else {
        initial_step(&mut rhs, &y, &k1, opts).unwrap_or(1e-6)
    };
    h = h.min(t_end);

    let mut err_old: f64 = 1e-4;
    let mut rejected_last = false;
    let mut attempts = 0usize;

    loop {
        if attempts >= opts.max_steps {
            traj.abort(AbortReason::MaxSteps { steps: attempts }, t);
            break;
        }
        if h < opts.h_min {
            traj.abort(AbortReason::StepUnderflow { h }, t);
            break;
        }
        let mut last = false;
        if t + h >= t_end || t_end - (t + h) <= 1e-14 * t_end.abs().max(1.0) {
            h = t_end - t;
            last = true;
        }
        attempts += 1;

        for i in 0..n {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        eval!(&stage, &mut k2);
        for i in 0..n {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        eval!(&stage, &mut k3);
        for i in 0..n {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        eval!(&stage, &mut k4);
        for i in 0..n {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        eval!(&stage, &mut k5);
        for i in 0..n {
            stage[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        eval!(&stage, &mut k6);
        for i in 0..n {
            y_new[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        eval!(&y_new, &mut k7);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max(e.abs() / sc);
        }
        if !err.is_finite() {
            // treat as a hard rejection
            h *= SHRINK_LIMIT;
            rejected_last = true;
            continue;
        }

        // PI controller, Hairer-Wanner form
        let expo = 0.2 - 0.75 * BETA;
        let fac11 = err.powf(expo);
        if err <= 1.0 {
            let fac =
                (fac11 / err_old.powf(BETA) / SAFETY).clamp(1.0 / GROWTH_LIMIT, 1.0 / SHRINK_LIMIT);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            err_old = err.max(1e-4);
            rejected_last = false;

            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            traj.visit(&y);

            if y.iter().any(|v| !v.is_finite()) {
                traj.abort(AbortReason::NonFinite, t);
                break;
            }
            let ninf = norm_inf(&y);
            if ninf > OVERFLOW_GUARD {
                traj.record(t, &y);
                traj.abort(AbortReason::Overflow { norm_inf: ninf }, t);
                return traj;
            }
            if last || traj.steps().is_multiple_of(record_every) {
                traj.record(t, &y);
            }
            if last {
                break;
            }
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(1.0 / SHRINK_LIMIT);
            rejected_last = true;
        }
    }
    if traj.final_time() < t {
        traj.record(t, &y);
    }
    traj
}

fn initial_step<F, E>(rhs: &mut F, y: &[f64], f0: &[f64], opts: &RkOptions) -> Option<f64>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<(), E>,
{
    let n = y.len() as f64;
    let sc: Vec<f64> = y
        .iter()
        .map(|v| opts.abs_tol + opts.rel_tol * v.abs())
        .collect();
    let rms = |v: &[f64]| (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n).sqrt();
    let d0 = rms(y);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    rhs(&y1, &mut f1).ok()?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Some((100.0 * h0).min(h1))
}
