use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::PolyError;

/// Exact rational exponent. Always stored in lowest terms with a positive denominator.
pub type Exponent = Ratio<i64>;

/// Exponent vector of a monomial `x^j = x_1^{j_1} ... x_n^{j_n}`.
///
/// Ordering is lexicographic over the exact rational entries, which gives
/// the canonical term order used for every iteration and summation in the crate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    exps: Vec<Exponent>,
}

impl MultiIndex {
    /// # Panics
    /// If `exps` is empty.
    pub fn new(exps: Vec<Exponent>) -> Self {
        assert!(!exps.is_empty(), "multi-index must have dimension >= 1");
        Self { exps }
    }

    pub fn from_ints(exps: &[i64]) -> Self {
        Self::new(exps.iter().map(|&e| Exponent::from_integer(e)).collect())
    }

    /// Build from `(numerator, denominator)` pairs.
    pub fn from_pairs(exps: &[(i64, i64)]) -> Result<Self, PolyError> {
        let exps = exps
            .iter()
            .map(|&(p, q)| {
                if q == 0 {
                    Err(PolyError::ZeroDenominator)
                } else {
                    Ok(Exponent::new(p, q))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if exps.is_empty() {
            return Err(PolyError::EmptyDimension);
        }
        Ok(Self::new(exps))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![Exponent::zero(); dim])
    }

    /// The unit multi-index `e_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut idx = Self::zeros(dim);
        idx.exps[axis] = Exponent::one();
        idx
    }

    /// The all-ones multi-index.
    pub fn ones(dim: usize) -> Self {
        Self::new(vec![Exponent::one(); dim])
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn get(&self, axis: usize) -> Exponent {
        self.exps[axis]
    }

    pub fn exps(&self) -> &[Exponent] {
        &self.exps
    }

    /// `|j| = sum of the entries`.
    pub fn degree(&self) -> Exponent {
        self.exps.iter().copied().sum()
    }

    pub fn is_integral(&self) -> bool {
        self.exps.iter().all(|e| e.is_integer())
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.exps.iter().map(exponent_to_f64).collect()
    }

    /// Returns `self + other`.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim(), "multi-index dimension mismatch");
        MultiIndex::new(
            self.exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Returns `self - other`.
    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim(), "multi-index dimension mismatch");
        MultiIndex::new(
            self.exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Returns `self` with `delta` added to one entry.
    pub fn shifted(&self, axis: usize, delta: Exponent) -> MultiIndex {
        let mut out = self.clone();
        out.exps[axis] += delta;
        out
    }

    /// Evaluate the monomial `x^self`.
    ///
    /// Axes with a zero exponent contribute a factor of one whatever the value of `x_i`.
    pub fn monomial(&self, x: &[f64]) -> Result<f64, PolyError> {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        let mut acc = 1.0;
        for (axis, (&e, &xi)) in self.exps.iter().zip(x).enumerate() {
            if e.is_zero() {
                continue;
            }
            acc *= pow_exact(xi, e, axis)?;
        }
        Ok(acc)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.exps.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

pub fn exponent_to_f64(e: &Exponent) -> f64 {
    // i64 numerators and denominators convert exactly up to 2^53; beyond that
    // the rounded quotient is still the nearest useful value.
    e.numer().to_f64().unwrap_or(f64::NAN) / e.denom().to_f64().unwrap_or(f64::NAN)
}

/// `x^e` with the evaluation domain policy:
/// negative exponents need `x != 0`, non-integer exponents need `x > 0`.
pub fn pow_exact(x: f64, e: Exponent, axis: usize) -> Result<f64, PolyError> {
    let domain = || PolyError::Domain {
        axis,
        value: x,
        exponent: e,
    };
    if e.is_integer() {
        let n = *e.numer();
        if n < 0 && x == 0.0 {
            return Err(domain());
        }
        let mag = powi_squaring(x, n.unsigned_abs());
        Ok(if n < 0 { 1.0 / mag } else { mag })
    } else {
        if x <= 0.0 {
            return Err(domain());
        }
        Ok((exponent_to_f64(&e) * x.ln()).exp())
    }
}

fn powi_squaring(mut base: f64, mut n: u64) -> f64 {
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        n >>= 1;
        if n > 0 {
            base *= base;
        }
    }
    acc
}

/// Parse `"p/q"`, `"p"`, or an integer literal into an exponent.
pub fn parse_exponent(s: &str) -> Result<Exponent, PolyError> {
    let s = s.trim();
    let bad = || PolyError::Parse(format!("invalid exponent {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(PolyError::ZeroDenominator);
            }
            Ok(Exponent::new(p, q))
        }
        None => s
            .parse::<i64>()
            .map(Exponent::from_integer)
            .map_err(|_| bad()),
    }
}

/// Renders an exponent the way problem files store it: an integer, or `"p/q"`.
pub fn format_exponent(e: &Exponent) -> String {
    if e.is_integer() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

pub(crate) fn is_minus_one(e: &Exponent) -> bool {
    e.is_integer() && e.is_negative() && *e.numer() == -1
}
