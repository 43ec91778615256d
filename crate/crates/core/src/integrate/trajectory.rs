use serde::Serialize;

/// Why a run stopped before reaching the horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbortReason {
    SingularStep { j: String, t_star: f64 },
    DomainError { message: String },
    Overflow { norm_inf: f64 },
    NonFinite,
    StepUnderflow { h: f64 },
    MaxSteps { steps: usize },
}

impl AbortReason {
    /// Short machine-readable tag.
    pub fn code(&self) -> &'static str {
        match self {
            AbortReason::SingularStep { .. } => "singular_step",
            AbortReason::DomainError { .. } => "domain_error",
            AbortReason::Overflow { .. } => "overflow",
            AbortReason::NonFinite => "non_finite",
            AbortReason::StepUnderflow { .. } => "step_underflow",
            AbortReason::MaxSteps { .. } => "max_steps",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Completed,
    Aborted { reason: AbortReason, t_abort: f64 },
}

impl Status {
    pub fn is_completed(&self) -> bool {
        matches!(self, Status::Completed)
    }
}

/// Recorded states of one run.
///
/// `max_norm` is the largest Euclidean norm over every state the integrator
/// visited, recorded or not.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    status: Status,
    steps: usize,
    max_norm: f64,
}

impl Trajectory {
    pub(crate) fn start(t0: f64, x0: &[f64]) -> Self {
        Self {
            times: vec![t0],
            states: vec![x0.to_vec()],
            status: Status::Completed,
            steps: 0,
            max_norm: norm2(x0),
        }
    }

    pub(crate) fn visit(&mut self, x: &[f64]) {
        self.steps += 1;
        self.max_norm = self.max_norm.max(norm2(x));
    }

    pub(crate) fn record(&mut self, t: f64, x: &[f64]) {
        debug_assert!(t > *self.times.last().unwrap(), "times must increase");
        self.times.push(t);
        self.states.push(x.to_vec());
    }

    pub(crate) fn abort(&mut self, reason: AbortReason, t_abort: f64) {
        self.status = Status::Aborted { reason, t_abort };
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn is_completed(&self) -> bool {
        self.status.is_completed()
    }

    /// Number of steps taken (accepted steps for adaptive methods).
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}
