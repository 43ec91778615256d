//! Built-in test problems: a quadratic Stokes-type flow, the cubic Stokes flow
//! inside a drop in a linear ambient flow, and a two-dimensional Laurent field.

use std::f64::consts::PI;
use std::str::FromStr;

use thiserror::Error;

use crate::polyfield::{SparsePolynomial, VectorField};

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("alpha = -1 makes the strain tensor singular")]
    SingularAlpha,
    #[error("constructed field has non-zero divergence with {terms} residual terms")]
    NotDivergenceFree { terms: usize },
}

/// `x1' = -8 x1 x2 + eps x3`, `x2' = 11 x1^2 + 3 x2^2 + x3^2 - 3`, `x3' = 2 x2 x3 - eps x1`.
pub fn quadratic_stokes(epsilon: f64) -> VectorField {
    let m = SparsePolynomial::monomial;
    VectorField::new(vec![
        m(-8.0, &[1, 1, 0]).add(&m(epsilon, &[0, 0, 1])),
        m(11.0, &[2, 0, 0])
            .add(&m(3.0, &[0, 2, 0]))
            .add(&m(1.0, &[0, 0, 2]))
            .add(&m(-3.0, &[0, 0, 0])),
        m(2.0, &[0, 1, 1]).add(&m(-epsilon, &[1, 0, 0])),
    ])
    .expect("three components of dimension three")
}

/// `x' = ((5 r^2 - 3) E x - 2 x (x^T E x)) / 2 + (w x x) / 2` with
/// `E = diag(1, alpha, -(1 + alpha)) / (1 + alpha)` and
/// `w = w_norm (sin theta, 0, cos theta)`.
pub fn cubic_stokes(alpha: f64, w_norm: f64, theta: f64) -> Result<VectorField, ConstructionError> {
    if alpha == -1.0 {
        return Err(ConstructionError::SingularAlpha);
    }
    let e = [1.0 / (1.0 + alpha), alpha / (1.0 + alpha), -1.0];
    let w = [w_norm * theta.sin(), 0.0, w_norm * theta.cos()];

    let x: Vec<SparsePolynomial> = (0..3)
        .map(|i| {
            let mut exps = [0i64; 3];
            exps[i] = 1;
            SparsePolynomial::monomial(1.0, &exps)
        })
        .collect();
    let r2 = x[0].mul(&x[0]).add(&x[1].mul(&x[1])).add(&x[2].mul(&x[2]));
    let quad = (0..3).fold(SparsePolynomial::zero(3), |acc, k| {
        acc.add(&x[k].mul(&x[k]).scale(e[k]))
    });
    let radial = r2.scale(5.0).add(&SparsePolynomial::constant(3, -3.0));
    // w x x
    let rotation = [
        x[2].scale(w[1]).sub(&x[1].scale(w[2])),
        x[0].scale(w[2]).sub(&x[2].scale(w[0])),
        x[1].scale(w[0]).sub(&x[0].scale(w[1])),
    ];

    let components = (0..3)
        .map(|i| {
            let strain = radial
                .mul(&x[i])
                .scale(e[i])
                .sub(&x[i].mul(&quad).scale(2.0));
            strain.scale(0.5).add(&rotation[i].scale(0.5))
        })
        .collect();
    let field = VectorField::new(components).expect("three components of dimension three");
    let div = field.divergence();
    if !div.is_zero() {
        return Err(ConstructionError::NotDivergenceFree { terms: div.len() });
    }
    Ok(field)
}

/// `x1' = 3 x1^-2 x2^2 + 2 x1^3 x2^-3`, `x2' = 2 x1^-3 x2^3 + 3 x1^2 x2^-2`.
pub fn laurent() -> VectorField {
    let m = SparsePolynomial::monomial;
    VectorField::new(vec![
        m(3.0, &[-2, 2]).add(&m(2.0, &[3, -3])),
        m(2.0, &[-3, 3]).add(&m(3.0, &[2, -2])),
    ])
    .expect("two components of dimension two")
}

/// Built-in problem names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    QuadStokes,
    CubicStokes,
    Laurent,
}

impl FromStr for Builtin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quad_stokes" => Ok(Builtin::QuadStokes),
            "cubic_stokes" => Ok(Builtin::CubicStokes),
            "laurent" => Ok(Builtin::Laurent),
            other => Err(format!("unknown builtin problem {other:?}")),
        }
    }
}

/// Parameters of the built-in problems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub w_norm: f64,
    pub theta: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            alpha: 1.0,
            w_norm: 1.5,
            theta: 0.275 * PI,
        }
    }
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::QuadStokes, Builtin::CubicStokes, Builtin::Laurent];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::QuadStokes => "quad_stokes",
            Builtin::CubicStokes => "cubic_stokes",
            Builtin::Laurent => "laurent",
        }
    }

    pub fn field(self, params: &ProblemParams) -> Result<VectorField, ConstructionError> {
        match self {
            Builtin::QuadStokes => Ok(quadratic_stokes(params.epsilon)),
            Builtin::CubicStokes => cubic_stokes(params.alpha, params.w_norm, params.theta),
            Builtin::Laurent => Ok(laurent()),
        }
    }

    pub fn default_x0(self) -> Vec<f64> {
        match self {
            Builtin::QuadStokes => vec![0.0, 0.0, 0.96],
            Builtin::CubicStokes => vec![-0.1689, 0.0, -0.0437],
            Builtin::Laurent => vec![-0.5689, 0.0437],
        }
    }

    pub fn default_h(self) -> f64 {
        match self {
            Builtin::QuadStokes | Builtin::CubicStokes => 0.01,
            Builtin::Laurent => 0.001,
        }
    }

    pub fn default_horizon(self) -> f64 {
        match self {
            Builtin::QuadStokes => 500.0,
            Builtin::CubicStokes => 20_000.0,
            Builtin::Laurent => 10.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::MultiIndex;
    use approx::assert_relative_eq;

    /// Direct evaluation of the cubic Stokes right-hand side.
    fn cubic_rhs(alpha: f64, w: [f64; 3], x: [f64; 3]) -> [f64; 3] {
        let e = [1.0 / (1.0 + alpha), alpha / (1.0 + alpha), -1.0];
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let q = e[0] * x[0] * x[0] + e[1] * x[1] * x[1] + e[2] * x[2] * x[2];
        let cross = [
            w[1] * x[2] - w[2] * x[1],
            w[2] * x[0] - w[0] * x[2],
            w[0] * x[1] - w[1] * x[0],
        ];
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = 0.5 * ((5.0 * r2 - 3.0) * e[i] * x[i] - 2.0 * x[i] * q) + 0.5 * cross[i];
        }
        out
    }

    #[test]
    fn cubic_expansion_matches_direct_formula() {
        for &(alpha, wn, th) in &[
            (1.0, 1.5, 0.275 * PI),
            (0.3, 2.5, 0.2 * PI),
            (2.0, 0.0, 0.0),
        ] {
            let f = cubic_stokes(alpha, wn, th).unwrap();
            let w = [wn * th.sin(), 0.0, wn * th.cos()];
            for x in [[0.1, -0.3, 0.5], [-0.7, 0.2, 0.05], [0.3, 0.3, -0.6]] {
                let got = f.evaluate(&x).unwrap();
                let want = cubic_rhs(alpha, w, x);
                for k in 0..3 {
                    assert_relative_eq!(got[k], want[k], epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn cubic_divergence_vanishes() {
        for alpha in [0.0, 0.5, 1.0, 3.0, -0.5] {
            for wn in [0.0, 1.5, 4.0] {
                for th in [0.0, 0.02 * PI, 0.4 * PI] {
                    assert!(cubic_stokes(alpha, wn, th).unwrap().divergence().is_zero());
                }
            }
        }
    }

    #[test]
    fn zero_angle_has_no_x1_vorticity() {
        let f = cubic_stokes(1.0, 2.0, 0.0).unwrap();
        // w1 = 0 removes the x3 term from x2' and the x2 term from x3'
        assert_eq!(
            f.component(1)
                .coefficient(&MultiIndex::from_ints(&[0, 0, 1])),
            0.0
        );
        assert_eq!(
            f.component(2)
                .coefficient(&MultiIndex::from_ints(&[0, 1, 0])),
            0.0
        );
        assert_eq!(
            f.component(0)
                .coefficient(&MultiIndex::from_ints(&[0, 1, 0])),
            -1.0
        );
    }

    #[test]
    fn singular_alpha_rejected() {
        assert!(matches!(
            cubic_stokes(-1.0, 1.0, 0.0),
            Err(ConstructionError::SingularAlpha)
        ));
    }

    #[test]
    fn builtin_names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(b.name().parse::<Builtin>().unwrap(), b);
        }
        assert!("lorenz".parse::<Builtin>().is_err());
    }
}
