use std::collections::BTreeMap;

use num_traits::Zero;

use super::multi_index::{exponent_to_f64, Exponent, MultiIndex};
use super::polynomial::SparsePolynomial;
use super::{PolyError, TAU_DIV};

/// The system `x' = f(x)` with one sparse polynomial per component.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<SparsePolynomial>,
}

impl VectorField {
    pub fn new(components: Vec<SparsePolynomial>) -> Result<Self, PolyError> {
        let n = components.len();
        if n == 0 {
            return Err(PolyError::EmptyDimension);
        }
        for c in &components {
            if c.dim() != n {
                return Err(PolyError::DimensionMismatch {
                    expected: n,
                    found: c.dim(),
                });
            }
        }
        Ok(Self { components })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            components: (0..dim).map(|_| SparsePolynomial::zero(dim)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[SparsePolynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &SparsePolynomial {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(SparsePolynomial::is_zero)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, PolyError> {
        self.components.iter().map(|c| c.evaluate(x)).collect()
    }

    /// Writes `f(x)` into `out`.
    pub fn evaluate_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), PolyError> {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.evaluate(x)?;
        }
        Ok(())
    }

    pub fn scale(&self, alpha: f64) -> VectorField {
        Self {
            components: self.components.iter().map(|c| c.scale(alpha)).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.dim(), other.dim(), "vector field dimension mismatch");
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    /// `sum_i d f_i / d x_i`, with cancelled monomials pruned.
    ///
    /// Contributions to each monomial are summed in canonical order (component
    /// then term). A monomial is dropped when `|sum| <= TAU_DIV * max |contribution|`.
    pub fn divergence(&self) -> SparsePolynomial {
        let n = self.dim();
        let mut acc: BTreeMap<MultiIndex, (f64, f64)> = BTreeMap::new();
        for (i, comp) in self.components.iter().enumerate() {
            for (k, coef) in comp.terms() {
                let ki = k.get(i);
                if ki.is_zero() {
                    continue;
                }
                let v = coef * exponent_to_f64(&ki);
                let j = k.shifted(i, -Exponent::from_integer(1));
                let e = acc.entry(j).or_insert((0.0, 0.0));
                e.0 += v;
                e.1 = e.1.max(v.abs());
            }
        }
        let mut out = SparsePolynomial::zero(n);
        for (j, (sum, scale)) in acc {
            if sum.abs() > TAU_DIV * scale {
                out.add_term(j, sum);
            }
        }
        out
    }

    /// Split into the terms of `f_i` that depend on `x_i` and those that do not.
    pub fn diag_offdiag_split(&self) -> (VectorField, VectorField) {
        let n = self.dim();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n);
        for (i, comp) in self.components.iter().enumerate() {
            let mut d = SparsePolynomial::zero(n);
            let mut o = SparsePolynomial::zero(n);
            for (k, coef) in comp.terms() {
                if k.get(i).is_zero() {
                    o.add_term(k.clone(), coef);
                } else {
                    d.add_term(k.clone(), coef);
                }
            }
            diag.push(d);
            off.push(o);
        }
        (Self { components: diag }, Self { components: off })
    }

    /// True when every term of component `i` carries a nonzero exponent on axis `i`.
    pub fn is_diagonal(&self) -> bool {
        self.components
            .iter()
            .enumerate()
            .all(|(i, c)| c.terms().all(|(k, _)| !k.get(i).is_zero()))
    }
}

/// Number of monomials of degree `d` in `n` variables: `binomial(n + d - 1, d)`.
pub fn coefficient_count(n: u64, d: u64) -> Result<u64, PolyError> {
    if n == 0 {
        return Err(PolyError::EmptyDimension);
    }
    let overflow = || PolyError::Overflow { n, d };
    let top = n.checked_add(d).ok_or_else(overflow)? - 1;
    let k = d.min(n - 1);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (top - k + i) / i stays an integer at every step
        acc = acc
            .checked_mul(u128::from(top - k + i))
            .ok_or_else(overflow)?
            / u128::from(i);
    }
    u64::try_from(acc).map_err(|_| overflow())
}
