//! Random divergence-free fields and small numeric helpers shared by the
//! integration tests.
#![allow(dead_code)]

use rand::Rng;
use vpsplit::polyfield::{MultiIndex, SparsePolynomial, VectorField};
use vpsplit::Edfvf;

/// Coefficient vector `a` orthogonal to `j + 1` with `a_i = 0` wherever `j_i = -1`.
/// `None` when fewer than two axes are free.
pub fn closing_coefficients<R: Rng>(j: &[i64], rng: &mut R) -> Option<Vec<f64>> {
    let free: Vec<usize> = (0..j.len()).filter(|&i| j[i] != -1).collect();
    if free.len() < 2 {
        return None;
    }
    let u: Vec<f64> = j.iter().map(|&v| (v + 1) as f64).collect();
    let mut a = vec![0.0; j.len()];
    for &i in &free {
        a[i] = rng.gen_range(-2.0..2.0);
    }
    let uu: f64 = free.iter().map(|&i| u[i] * u[i]).sum();
    let au: f64 = free.iter().map(|&i| a[i] * u[i]).sum();
    for &i in &free {
        a[i] -= au / uu * u[i];
    }
    // skip nearly degenerate draws
    (a.iter().map(|v| v.abs()).sum::<f64>() > 0.1).then_some(a)
}

/// Random elementary field with integer `j` in `[-2, 2]^n`.
pub fn random_edfvf<R: Rng>(n: usize, rng: &mut R) -> Edfvf {
    loop {
        let j: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        if let Some(a) = closing_coefficients(&j, rng) {
            return Edfvf::new(MultiIndex::from_ints(&j), a).expect("closed by construction");
        }
    }
}

/// Random divergence-free Laurent field: a few elementary fields plus
/// off-diagonal terms (component `i` independent of `x_i`).
pub fn random_df_field<R: Rng>(n: usize, rng: &mut R) -> VectorField {
    let mut comps = vec![SparsePolynomial::zero(n); n];
    for _ in 0..rng.gen_range(1..=3) {
        let e = random_edfvf(n, rng);
        let j: Vec<i64> = e.j().exps().iter().map(|v| *v.numer()).collect();
        for i in 0..n {
            if e.a()[i] != 0.0 {
                let mut k = j.clone();
                k[i] += 1;
                comps[i] = comps[i].add(&SparsePolynomial::monomial(e.a()[i], &k));
            }
        }
    }
    for _ in 0..rng.gen_range(0..=3) {
        let i = rng.gen_range(0..n);
        let mut k: Vec<i64> = (0..n).map(|_| rng.gen_range(-1..=2)).collect();
        k[i] = 0;
        comps[i] = comps[i].add(&SparsePolynomial::monomial(rng.gen_range(-1.0..1.0), &k));
    }
    VectorField::new(comps).unwrap()
}

/// Uniform point with every coordinate in `[lo, hi]`.
pub fn positive_point<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `|a - b|_inf / max(1, |b|_inf)`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    max_abs_diff(a, b) / scale
}
