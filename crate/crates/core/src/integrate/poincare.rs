use std::str::FromStr;

use serde::Serialize;

use crate::splitting::SplitScheme;

use super::driver::{abort_reason, check_inputs, step_count, RunError};
use super::trajectory::{norm_inf, AbortReason, Status};
use super::OVERFLOW_GUARD;

/// Crossing tolerance `|x_axis - level|` for refined section points.
pub const CROSSING_TOL: f64 = 1e-10;
/// Bisection cap for crossing refinement.
pub const MAX_BISECTIONS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `x_axis - level` goes from negative to non-negative.
    Up,
    /// `x_axis - level` goes from positive to non-positive.
    Down,
    Both,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+1" | "1" | "up" | "+" => Ok(Direction::Up),
            "-1" | "down" | "-" => Ok(Direction::Down),
            "both" | "0" => Ok(Direction::Both),
            other => Err(format!(
                "unknown direction {other:?} (expected +1, -1 or both)"
            )),
        }
    }
}

/// The hyperplane `x_axis = level` (axis zero-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionSpec {
    pub axis: usize,
    pub level: f64,
    pub direction: Direction,
}

impl SectionSpec {
    fn crosses(&self, before: f64, after: f64) -> bool {
        let up = before < 0.0 && after >= 0.0;
        let down = before > 0.0 && after <= 0.0;
        match self.direction {
            Direction::Up => up,
            Direction::Down => down,
            Direction::Both => up || down,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Section {
    /// Crossing points with the section coordinate removed.
    pub points: Vec<Vec<f64>>,
    /// Approximate crossing times.
    pub times: Vec<f64>,
    pub status: Status,
}

/// Intersections of the trajectory from `x0` with the section plane.
///
/// Each detected sign change is refined by bisecting the step fraction:
/// the step map is re-applied from the pre-crossing state with a reduced step.
pub fn poincare(
    scheme: &SplitScheme,
    x0: &[f64],
    h: f64,
    t_end: f64,
    sec: &SectionSpec,
) -> Result<Section, RunError> {
    check_inputs(scheme.dim(), x0, h, t_end)?;
    if sec.axis >= scheme.dim() {
        return Err(RunError::DimensionMismatch {
            expected: scheme.dim(),
            found: sec.axis + 1,
        });
    }
    let drop_axis = |y: &[f64]| -> Vec<f64> {
        y.iter()
            .enumerate()
            .filter(|(k, _)| *k != sec.axis)
            .map(|(_, v)| *v)
            .collect()
    };

    let mut out = Section {
        points: Vec::new(),
        times: Vec::new(),
        status: Status::Completed,
    };
    let steps = step_count(h, t_end);
    let mut x = x0.to_vec();
    let mut next = x.clone();
    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = if k == steps { t_end } else { k as f64 * h };
        let dt = t_next - t;
        next.copy_from_slice(&x);
        if let Err(e) = scheme.step_in_place(&mut next, dt) {
            out.status = Status::Aborted {
                reason: abort_reason(&e),
                t_abort: t,
            };
            return Ok(out);
        }
        if next.iter().any(|v| !v.is_finite()) {
            out.status = Status::Aborted {
                reason: AbortReason::NonFinite,
                t_abort: t_next,
            };
            return Ok(out);
        }
        let ninf = norm_inf(&next);
        if ninf > OVERFLOW_GUARD {
            out.status = Status::Aborted {
                reason: AbortReason::Overflow { norm_inf: ninf },
                t_abort: t_next,
            };
            return Ok(out);
        }

        let before = x[sec.axis] - sec.level;
        let after = next[sec.axis] - sec.level;
        if sec.crosses(before, after) {
            match refine(scheme, &x, dt, sec, before) {
                Ok((frac, y)) => {
                    out.points.push(drop_axis(&y));
                    out.times.push(t + frac * dt);
                }
                Err(e) => {
                    out.status = Status::Aborted {
                        reason: abort_reason(&e),
                        t_abort: t,
                    };
                    return Ok(out);
                }
            }
        }
        std::mem::swap(&mut x, &mut next);
        t = t_next;
    }
    Ok(out)
}

fn refine(
    scheme: &SplitScheme,
    x: &[f64],
    dt: f64,
    sec: &SectionSpec,
    g_lo: f64,
) -> Result<(f64, Vec<f64>), crate::splitting::SplitError> {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut best = scheme.step(x, dt)?;
    let mut best_frac = 1.0;
    if (best[sec.axis] - sec.level).abs() <= CROSSING_TOL {
        return Ok((best_frac, best));
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let y = scheme.step(x, mid * dt)?;
        let g = y[sec.axis] - sec.level;
        best = y;
        best_frac = mid;
        if g.abs() <= CROSSING_TOL {
            break;
        }
        if (g < 0.0) == (g_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((best_frac, best))
}
