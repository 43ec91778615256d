use crate::polyfield::{is_minus_one, MultiIndex, TAU_DIV};

use super::SplitError;

/// Relative threshold below which `c = a . j` is treated as zero and the
/// exponential form of the flow is used.
pub const C_BRANCH_TOL: f64 = 1e-14;

/// Elementary divergence-free vector field `x_i' = a_i x_i x^j`.
///
/// Divergence-freeness is the single linear condition `a . (j + 1) = 0`.
/// The monomial obeys `m' = c m^2` with `c = a . j`, which makes the flow
/// available in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct Edfvf {
    j: MultiIndex,
    j_f64: Vec<f64>,
    a: Vec<f64>,
    c: f64,
    /// `r_i = a_i / c`; `None` on the exponential branch.
    r: Option<Vec<f64>>,
}

impl Edfvf {
    /// Validates the closure condition and the exclusion `j_i = -1 => a_i = 0`.
    pub fn new(j: MultiIndex, a: Vec<f64>) -> Result<Self, SplitError> {
        if a.len() != j.dim() {
            return Err(SplitError::InvalidEdfvf(format!(
                "coefficient vector has length {} but j has dimension {}",
                a.len(),
                j.dim()
            )));
        }
        for (i, &ai) in a.iter().enumerate() {
            if !ai.is_finite() {
                return Err(SplitError::InvalidEdfvf(format!(
                    "a_{} is not finite",
                    i + 1
                )));
            }
            if ai != 0.0 && is_minus_one(&j.get(i)) {
                return Err(SplitError::InvalidEdfvf(format!(
                    "a_{} must vanish because j_{} = -1",
                    i + 1,
                    i + 1
                )));
            }
        }
        let j_f64 = j.to_f64_vec();

        let mut residual = 0.0;
        let mut scale: f64 = 0.0;
        for (&ai, &ji) in a.iter().zip(&j_f64) {
            let v = ai * (ji + 1.0);
            residual += v;
            scale = scale.max(v.abs());
        }
        if residual.abs() > TAU_DIV * scale {
            return Err(SplitError::NotDivergenceFree { j, residual });
        }

        let c: f64 = a.iter().zip(&j_f64).map(|(ai, ji)| ai * ji).sum();
        let a_l1: f64 = a.iter().map(|v| v.abs()).sum();
        let j_l1: f64 = j_f64.iter().map(|v| v.abs()).sum();
        let r = if c.abs() <= C_BRANCH_TOL * (a_l1 * j_l1 + 1.0) {
            None
        } else {
            Some(a.iter().map(|ai| ai / c).collect())
        };
        Ok(Self { j, j_f64, a, c, r })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn j(&self) -> &MultiIndex {
        &self.j
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn r(&self) -> Option<&[f64]> {
        self.r.as_deref()
    }

    /// True when the flow uses `x_i exp(a_i m0 h)` rather than the power law.
    pub fn is_exponential_branch(&self) -> bool {
        self.r.is_none()
    }

    /// Axes with `a_i = 0`, which the flow leaves untouched.
    pub fn frozen_axes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.a[i] == 0.0).collect()
    }

    /// `(a_i x_i x^j)_i`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, SplitError> {
        let m = self.j.monomial(x)?;
        Ok(self.a.iter().zip(x).map(|(ai, xi)| ai * xi * m).collect())
    }

    /// Blow-up time `1 / (c m0)` when it lies ahead of (or behind) `x`,
    /// `None` on the exponential branch or when `c m0 = 0`.
    pub fn blowup_time(&self, x: &[f64]) -> Result<Option<f64>, SplitError> {
        if self.r.is_none() {
            return Ok(None);
        }
        let cm = self.c * self.j.monomial(x)?;
        Ok((cm != 0.0).then(|| 1.0 / cm))
    }

    /// Exact time-`h` flow from `x0`.
    pub fn flow(&self, x0: &[f64], h: f64) -> Result<Vec<f64>, SplitError> {
        let mut x = x0.to_vec();
        self.flow_in_place(&mut x, h)?;
        Ok(x)
    }

    /// Exact flow applied in place. `x` is left unchanged on error.
    pub fn flow_in_place(&self, x: &mut [f64], h: f64) -> Result<(), SplitError> {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        let m0 = self.j.monomial(x)?;
        match &self.r {
            Some(r) => {
                let z = self.c * m0 * h;
                if z >= 1.0 {
                    return Err(SplitError::SingularStep {
                        j: self.j.clone(),
                        t_star: 1.0 / (self.c * m0),
                    });
                }
                // (1 - z)^(-r_i) = exp(-r_i ln(1 - z))
                let log_base = (-z).ln_1p();
                for ((xi, &ri), &ai) in x.iter_mut().zip(r).zip(&self.a) {
                    if ai != 0.0 {
                        *xi *= (-ri * log_base).exp();
                    }
                }
            }
            None => {
                for (xi, &ai) in x.iter_mut().zip(&self.a) {
                    if ai != 0.0 {
                        *xi *= (ai * m0 * h).exp();
                    }
                }
            }
        }
        Ok(())
    }

    /// Exponent vectors `b` with `a . b = 0`: the monomials `x^b` are first integrals.
    ///
    /// The first is `j + 1`; the remaining `n - 2` come from Gram-Schmidt on the
    /// canonical basis against `a` and `j + 1`, and are returned with unit length.
    pub fn integrals_basis(&self) -> Result<Vec<Vec<f64>>, SplitError> {
        let n = self.dim();
        if self.a.iter().all(|&v| v == 0.0) {
            return Err(SplitError::DegenerateField);
        }
        let b1: Vec<f64> = self.j_f64.iter().map(|j| j + 1.0).collect();
        if n == 1 {
            return Ok(Vec::new());
        }
        let mut ortho: Vec<Vec<f64>> = vec![normalized(&self.a), normalized(&b1)];
        let mut out = vec![b1];
        for k in 0..n {
            if out.len() == n - 1 {
                break;
            }
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            // modified Gram-Schmidt, two passes for stability
            for _ in 0..2 {
                for q in &ortho {
                    let p = dot(&v, q);
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= p * qi;
                    }
                }
            }
            if norm(&v) > 1e-8 {
                let v = normalized(&v);
                ortho.push(v.clone());
                out.push(v);
            }
        }
        Ok(out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(a: &[f64]) -> Vec<f64> {
    let s = norm(a);
    a.iter().map(|v| v / s).collect()
}

/// `x^b` for a real exponent vector, positive orthant only.
pub fn real_monomial(x: &[f64], b: &[f64]) -> f64 {
    x.iter()
        .zip(b)
        .map(|(xi, bi)| if *bi == 0.0 { 1.0 } else { xi.powf(*bi) })
        .product()
}
