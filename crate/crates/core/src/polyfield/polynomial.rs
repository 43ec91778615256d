use std::collections::BTreeMap;

use num_traits::Zero;

use super::multi_index::{exponent_to_f64, Exponent, MultiIndex};
use super::PolyError;

/// Sparse (Laurent) polynomial in `dim` variables with rational exponents.
///
/// Terms are kept in a `BTreeMap`, so iteration and summation always follow
/// lexicographic `MultiIndex` order. Exactly-zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePolynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl SparsePolynomial {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "polynomial dimension must be >= 1");
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Collects terms, merging repeated multi-indices.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        if dim == 0 {
            return Err(PolyError::EmptyDimension);
        }
        let mut p = Self::zero(dim);
        for (idx, coef) in terms {
            if idx.dim() != dim {
                return Err(PolyError::DimensionMismatch {
                    expected: dim,
                    found: idx.dim(),
                });
            }
            if !coef.is_finite() {
                return Err(PolyError::Parse(format!("non-finite coefficient {coef}")));
            }
            p.add_term(idx, coef);
        }
        Ok(p)
    }

    /// Single-term polynomial with integer exponents. Handy for literals.
    pub fn monomial(coef: f64, exps: &[i64]) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(MultiIndex::from_ints(exps), coef);
        p
    }

    /// Constant polynomial.
    pub fn constant(dim: usize, value: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::zeros(dim), value);
        p
    }

    /// Adds `coef * x^idx`, dropping the entry if it cancels to exactly zero.
    ///
    /// # Panics
    /// If `idx` has the wrong dimension.
    pub fn add_term(&mut self, idx: MultiIndex, coef: f64) {
        assert_eq!(idx.dim(), self.dim, "term dimension mismatch");
        if coef == 0.0 {
            return;
        }
        let entry = self.terms.entry(idx);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + coef;
                if sum == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored terms; [`is_zero`](Self::is_zero) is the emptiness check.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> + '_ {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    /// Coefficient of `x^idx`, zero when absent.
    pub fn coefficient(&self, idx: &MultiIndex) -> f64 {
        self.terms.get(idx).copied().unwrap_or(0.0)
    }

    /// True if some term carries a nonzero exponent on `axis`.
    pub fn depends_on(&self, axis: usize) -> bool {
        self.terms.keys().any(|k| !k.get(axis).is_zero())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, PolyError> {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        let mut acc = 0.0;
        for (idx, coef) in &self.terms {
            acc += coef * idx.monomial(x)?;
        }
        Ok(acc)
    }

    /// Term-wise derivative with respect to `x_axis`.
    pub fn partial(&self, axis: usize) -> SparsePolynomial {
        assert!(axis < self.dim, "axis out of range");
        let mut out = Self::zero(self.dim);
        for (idx, &coef) in &self.terms {
            let e = idx.get(axis);
            if e.is_zero() {
                continue;
            }
            out.add_term(
                idx.shifted(axis, -Exponent::from_integer(1)),
                coef * exponent_to_f64(&e),
            );
        }
        out
    }

    pub fn scale(&self, alpha: f64) -> SparsePolynomial {
        let mut out = Self::zero(self.dim);
        for (idx, &coef) in &self.terms {
            out.add_term(idx.clone(), alpha * coef);
        }
        out
    }

    /// Sum; like terms merged in canonical order.
    pub fn add(&self, other: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.dim, other.dim, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (idx, &coef) in &other.terms {
            out.add_term(idx.clone(), coef);
        }
        out
    }

    pub fn sub(&self, other: &SparsePolynomial) -> SparsePolynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.dim, other.dim, "polynomial dimension mismatch");
        let mut out = Self::zero(self.dim);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }

    /// Drops terms with `|coef| <= tol`.
    pub fn pruned(&self, tol: f64) -> SparsePolynomial {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(k, &c)| (k.clone(), c))
                .collect(),
        }
    }

    /// Largest coefficient magnitude, zero for the zero polynomial.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}
