#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use pspca::matrix::assume_centered;
use pspca::{center, CenteredData, DenseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// n×p data with correlated columns: Z·M plus a little independent noise.
pub fn correlated_data(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DenseMatrix {
    let r = (p / 2).max(1);
    let z: Vec<f64> = (0..n * r).map(|_| normal(rng)).collect();
    let m: Vec<f64> = (0..r * p).map(|_| normal(rng)).collect();
    let mut data = vec![0.0; n * p];
    for j in 0..p {
        for i in 0..n {
            let mut v = 0.3 * normal(rng);
            for l in 0..r {
                v += z[l * n + i] * m[j * r + l];
            }
            data[j * n + i] = v;
        }
    }
    DenseMatrix::from_col_major(n, p, data).unwrap()
}

pub fn centered(rng: &mut ChaCha8Rng, n: usize, p: usize) -> CenteredData {
    center(&correlated_data(rng, n, p), false).unwrap()
}

pub fn random_psd(rng: &mut ChaCha8Rng, dim: usize) -> DenseMatrix {
    let b = correlated_data(rng, dim + 3, dim);
    let s = b.transpose().matmul(&b).unwrap();
    let sym: Vec<f64> = (0..dim * dim)
        .map(|idx| {
            let (i, j) = (idx % dim, idx / dim);
            0.5 * (s.get(i, j) + s.get(j, i))
        })
        .collect();
    DenseMatrix::from_col_major(dim, dim, sym).unwrap()
}

pub fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.as_slice())
}

/// Eigenvalues in decreasing order with matching eigenvectors.
pub fn oracle_eigen(s: &DenseMatrix) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(to_na(s));
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..s.rows())
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn abs_cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).abs() / (dot(a, a) * dot(b, b)).sqrt()
}

/// R² from a fresh least-squares solve via nalgebra's SVD.
pub fn oracle_r2(cd: &CenteredData, t: &[f64], support: &[usize]) -> f64 {
    let xj = to_na(&cd.matrix().select_columns(support).unwrap());
    let tv = nalgebra::DVector::from_column_slice(t);
    let coef = xj.clone().svd(true, true).solve(&tv, 1e-12).unwrap();
    let fitted = xj * coef;
    fitted.norm_squared() / tv.norm_squared()
}

pub fn centered_from(m: DenseMatrix) -> CenteredData {
    assume_centered(m).unwrap()
}
