/// Default finite-difference perturbation.
pub const DEFAULT_DELTA: f64 = 1e-5;

/// Central-difference stencil.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Stencil {
    /// `(f(x+d) - f(x-d)) / 2d`, truncation error O(d^2).
    TwoPoint,
    /// `(-f(x+2d) + 8f(x+d) - 8f(x-d) + f(x-2d)) / 12d`, truncation error O(d^4).
    #[default]
    FourPoint,
}

/// Central-difference Jacobian of `map` at `x`, column `k` perturbed by
/// `delta * max(1, |x_k|)`. Returned row-major.
pub fn fd_jacobian<F, E>(
    mut map: F,
    x: &[f64],
    delta: f64,
    stencil: Stencil,
) -> Result<Vec<Vec<f64>>, E>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, E>,
{
    let n = x.len();
    let mut jac = vec![vec![0.0; n]; n];
    let mut xp = x.to_vec();
    let mut eval = |k: usize, offset: f64| {
        xp[k] = x[k] + offset;
        let y = map(&xp);
        xp[k] = x[k];
        y
    };
    for k in 0..n {
        let d = delta * x[k].abs().max(1.0);
        let p1 = eval(k, d)?;
        let m1 = eval(k, -d)?;
        match stencil {
            Stencil::TwoPoint => {
                for (i, row) in jac.iter_mut().enumerate() {
                    row[k] = (p1[i] - m1[i]) / (2.0 * d);
                }
            }
            Stencil::FourPoint => {
                let p2 = eval(k, 2.0 * d)?;
                let m2 = eval(k, -2.0 * d)?;
                for (i, row) in jac.iter_mut().enumerate() {
                    row[k] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * d);
                }
            }
        }
    }
    Ok(jac)
}

/// Determinant of the finite-difference Jacobian of `map` at `x`.
pub fn jacobian_det<F, E>(map: F, x: &[f64], delta: f64, stencil: Stencil) -> Result<f64, E>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, E>,
{
    Ok(lu_det(fd_jacobian(map, x, delta, stencil)?))
}

/// Determinant by LU factorization with partial pivoting.
pub fn lu_det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        let (upper, lower) = m.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower {
            let factor = row[col] / p;
            if factor == 0.0 {
                continue;
            }
            for (r, q) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *r -= factor * q;
            }
        }
    }
    det
}
