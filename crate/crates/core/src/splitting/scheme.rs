use std::collections::BTreeMap;

use crate::polyfield::{MultiIndex, SparsePolynomial, VectorField};

use super::edfvf::Edfvf;
use super::shear::{shear_in_place, ShearField};
use super::SplitError;

/// Maximum number of recursive step halvings in [`SingularPolicy::Substep`].
pub const MAX_SUBSTEP_DEPTH: u32 = 40;

/// Composition order of a splitting scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    /// Lie-Trotter: each flow once with the full step.
    First,
    /// Strang: the palindrome of half steps.
    Second,
}

impl Order {
    pub fn from_int(order: u8) -> Result<Self, SplitError> {
        match order {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            other => Err(SplitError::InvalidOrder(other)),
        }
    }

    pub fn as_int(self) -> u8 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

/// What a step does when some elementary flow would pass its blow-up time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SingularPolicy {
    #[default]
    Fail,
    /// Retry as two half steps, recursively, up to [`MAX_SUBSTEP_DEPTH`] levels.
    Substep,
}

/// One exactly solvable piece of the split field.
#[derive(Clone, Debug, PartialEq)]
pub enum Flow {
    Elementary(Edfvf),
    Shear { axis: usize, g: SparsePolynomial },
}

impl Flow {
    pub fn apply(&self, x: &mut [f64], h: f64) -> Result<(), SplitError> {
        match self {
            Flow::Elementary(e) => e.flow_in_place(x, h),
            Flow::Shear { axis, g } => shear_in_place(g, *axis, x, h),
        }
    }

    /// The vector field this flow integrates, evaluated at `x`.
    pub fn generator(&self, x: &[f64]) -> Result<Vec<f64>, SplitError> {
        match self {
            Flow::Elementary(e) => e.evaluate(x),
            Flow::Shear { axis, g } => {
                let mut v = vec![0.0; x.len()];
                v[*axis] = g.evaluate(x)?;
                Ok(v)
            }
        }
    }
}

/// Split a diagonal field into elementary divergence-free fields, one per
/// monomial `x^j` of the divergence.
///
/// The term `a x^k` of component `i` belongs to `j = k - e_i` with `a_i = a`.
/// Since `k_i != 0`, no term ever lands on an axis with `j_i = -1`; those axes
/// stay frozen. Each term is used exactly once. Output is in lexicographic `j` order.
pub fn decompose_diagonal(diag: &VectorField) -> Result<Vec<Edfvf>, SplitError> {
    let n = diag.dim();
    let mut groups: BTreeMap<MultiIndex, Vec<f64>> = BTreeMap::new();
    for (i, comp) in diag.components().iter().enumerate() {
        for (k, coef) in comp.terms() {
            let ki = k.get(i);
            if ki == num_traits::Zero::zero() {
                return Err(SplitError::NotDiagonal {
                    component: i,
                    exponent: k.clone(),
                });
            }
            let j = k.sub(&MultiIndex::unit(n, i));
            groups.entry(j).or_insert_with(|| vec![0.0; n])[i] = coef;
        }
    }
    groups.into_iter().map(|(j, a)| Edfvf::new(j, a)).collect()
}

/// Ordered list of exact flows together with a composition rule.
#[derive(Clone, Debug)]
pub struct SplitScheme {
    dim: usize,
    flows: Vec<Flow>,
    order: Order,
    policy: SingularPolicy,
}

impl SplitScheme {
    /// Elementary fields in lexicographic `j` order, then the non-trivial
    /// shears by ascending axis.
    pub fn build(field: &VectorField, order: Order) -> Result<Self, SplitError> {
        let (diag, offdiag) = field.diag_offdiag_split();
        let edfvfs = decompose_diagonal(&diag)?;
        let shears = ShearField::new(&offdiag)?;
        let mut flows: Vec<Flow> = edfvfs.into_iter().map(Flow::Elementary).collect();
        for axis in shears.active_axes() {
            flows.push(Flow::Shear {
                axis,
                g: shears.component(axis).clone(),
            });
        }
        Ok(Self {
            dim: field.dim(),
            flows,
            order,
            policy: SingularPolicy::Fail,
        })
    }

    pub fn with_policy(mut self, policy: SingularPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn policy(&self) -> SingularPolicy {
        self.policy
    }

    pub fn edfvfs(&self) -> impl Iterator<Item = &Edfvf> + '_ {
        self.flows.iter().filter_map(|f| match f {
            Flow::Elementary(e) => Some(e),
            Flow::Shear { .. } => None,
        })
    }

    /// Number of exact flow evaluations in one step.
    pub fn applications_per_step(&self) -> usize {
        match self.order {
            Order::First => self.flows.len(),
            Order::Second => 2 * self.flows.len(),
        }
    }

    /// Sum of all flow generators at `x`; equals the original field.
    pub fn generator_sum(&self, x: &[f64]) -> Result<Vec<f64>, SplitError> {
        let mut acc = vec![0.0; self.dim];
        for f in &self.flows {
            for (a, v) in acc.iter_mut().zip(f.generator(x)?) {
                *a += v;
            }
        }
        Ok(acc)
    }

    pub fn step(&self, x0: &[f64], h: f64) -> Result<Vec<f64>, SplitError> {
        let mut x = x0.to_vec();
        self.step_in_place(&mut x, h)?;
        Ok(x)
    }

    /// Advances `x` by one step. On error `x` holds the state before the step.
    pub fn step_in_place(&self, x: &mut [f64], h: f64) -> Result<(), SplitError> {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        match self.policy {
            SingularPolicy::Fail => {
                let mut y = x.to_vec();
                self.compose(&mut y, h)?;
                x.copy_from_slice(&y);
                Ok(())
            }
            SingularPolicy::Substep => {
                let y = self.substep(x, h, 0)?;
                x.copy_from_slice(&y);
                Ok(())
            }
        }
    }

    fn substep(&self, x: &[f64], h: f64, depth: u32) -> Result<Vec<f64>, SplitError> {
        let mut y = x.to_vec();
        match self.compose(&mut y, h) {
            Ok(()) => Ok(y),
            Err(SplitError::SingularStep { .. }) if depth < MAX_SUBSTEP_DEPTH => {
                let mid = self.substep(x, 0.5 * h, depth + 1)?;
                self.substep(&mid, 0.5 * h, depth + 1)
            }
            Err(e) => Err(e),
        }
    }

    fn compose(&self, x: &mut [f64], h: f64) -> Result<(), SplitError> {
        match self.order {
            Order::First => {
                for f in &self.flows {
                    f.apply(x, h)?;
                }
            }
            Order::Second => {
                let half = 0.5 * h;
                for f in &self.flows {
                    f.apply(x, half)?;
                }
                for f in self.flows.iter().rev() {
                    f.apply(x, half)?;
                }
            }
        }
        Ok(())
    }
}
