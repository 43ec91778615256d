use crate::polyfield::{SparsePolynomial, VectorField};

use super::SplitError;

/// Off-diagonal part of a field, integrated one axis at a time.
///
/// Component `g_i` must not depend on `x_i`, so the flow of `x_i' = g_i(x)`
/// with all other coordinates frozen is the shear `x_i += h g_i(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShearField {
    components: Vec<SparsePolynomial>,
}

impl ShearField {
    pub fn new(offdiag: &VectorField) -> Result<Self, SplitError> {
        for (i, g) in offdiag.components().iter().enumerate() {
            if g.depends_on(i) {
                return Err(SplitError::InvalidShear { axis: i });
            }
        }
        Ok(Self {
            components: offdiag.components().to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, axis: usize) -> &SparsePolynomial {
        &self.components[axis]
    }

    /// Axes whose shear is not the identity.
    pub fn active_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(|&i| !self.components[i].is_zero())
    }

    pub fn flow(&self, axis: usize, x0: &[f64], h: f64) -> Result<Vec<f64>, SplitError> {
        let mut x = x0.to_vec();
        shear_in_place(&self.components[axis], axis, &mut x, h)?;
        Ok(x)
    }
}

pub(crate) fn shear_in_place(
    g: &SparsePolynomial,
    axis: usize,
    x: &mut [f64],
    h: f64,
) -> Result<(), SplitError> {
    let v = g.evaluate(x)?;
    x[axis] += h * v;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::MultiIndex;

    fn rotation() -> VectorField {
        VectorField::new(vec![
            SparsePolynomial::monomial(1.0, &[0, 1]),
            SparsePolynomial::monomial(1.0, &[1, 0]),
        ])
        .unwrap()
    }

    #[test]
    fn linear_drift() {
        let s = ShearField::new(&rotation()).unwrap();
        assert_eq!(s.flow(0, &[0.0, 1.0], 0.5).unwrap(), vec![0.5, 1.0]);
    }

    #[test]
    fn zero_shear_is_identity() {
        let s = ShearField::new(&VectorField::zero(2)).unwrap();
        assert_eq!(s.flow(1, &[0.3, 0.4], 2.0).unwrap(), vec![0.3, 0.4]);
        assert_eq!(s.active_axes().count(), 0);
    }

    #[test]
    fn quad_stokes_axis_two() {
        let mut g = SparsePolynomial::zero(3);
        g.add_term(MultiIndex::from_ints(&[2, 0, 0]), 11.0);
        g.add_term(MultiIndex::from_ints(&[0, 0, 2]), 1.0);
        g.add_term(MultiIndex::from_ints(&[0, 0, 0]), -3.0);
        let off = VectorField::new(vec![
            SparsePolynomial::monomial(0.1, &[0, 0, 1]),
            g,
            SparsePolynomial::monomial(-0.1, &[1, 0, 0]),
        ])
        .unwrap();
        let s = ShearField::new(&off).unwrap();
        let x = [0.2, 0.3, -0.5];
        let h = 0.01;
        let y = s.flow(1, &x, h).unwrap();
        assert_eq!(y[0], x[0]);
        assert_eq!(y[2], x[2]);
        assert_eq!(y[1], x[1] + h * (11.0 * 0.04 + 0.25 - 3.0));
    }

    #[test]
    fn rejects_diagonal_terms() {
        let f = VectorField::new(vec![
            SparsePolynomial::monomial(1.0, &[1, 0]),
            SparsePolynomial::zero(2),
        ])
        .unwrap();
        assert!(matches!(
            ShearField::new(&f),
            Err(SplitError::InvalidShear { axis: 0 })
        ));
    }
}
