//! Dominant eigenpairs of symmetric positive semidefinite matrices by power
//! iteration, with Hotelling deflation for the trailing pairs and a Gram
//! (n x n) route for data with many more variables than observations.
//!
//! Iteration stops once the Rayleigh quotient changes by less than `tol`
//! (relative) between sweeps *and* the residual `‖Sv − λv‖` is at most
//! `tol · λ`. A small floor proportional to machine epsilon times the
//! matrix norm is added to the residual target so that pairs far down a
//! deflated spectrum can still be certified.
//!
//! When eigenvalues are clustered (relative gap below about 1e-6) the
//! returned vector is some unit vector in the cluster's invariant subspace;
//! which one is not meaningful, but the variance it carries is.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, gram, norm, CenteredData, DenseMatrix};

/// Eigenvalues at or below this fraction of the leading one end a deflation
/// sequence.
pub const SPECTRAL_CUTOFF: f64 = 1e-12;

/// Covariance matrices are only formed when `p <= max(n, COVARIANCE_PATH_LIMIT)`.
pub const COVARIANCE_PATH_LIMIT: usize = 2048;

const MAX_START_ATTEMPTS: u64 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: f64,
    /// Unit norm; the largest-magnitude entry (lowest index on ties) is positive.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// `‖S v − λ v‖₂` at exit.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Whether the p x p covariance should be formed for an n x p data matrix.
pub fn use_covariance_path(n: usize, p: usize) -> bool {
    p <= n.max(COVARIANCE_PATH_LIMIT)
}

fn start_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
/// Returns whether a flip happened.
pub(crate) fn apply_sign_convention(v: &mut [f64]) -> bool {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
        true
    } else {
        false
    }
}

/// Power iteration on the operator `apply`. `scale` is a norm of the matrix
/// the operator came from and sets the roundoff floor of the residual test.
fn power_iterate<F>(apply: F, dim: usize, cfg: &PowerConfig, scale: f64) -> Result<EigenPair>
where
    F: Fn(&[f64], &mut [f64]),
{
    cfg.validate()?;
    let floor = 8.0 * dim as f64 * f64::EPSILON * scale;
    let mut w = vec![0.0; dim];

    let mut v = Vec::new();
    for attempt in 0..MAX_START_ATTEMPTS {
        let candidate = start_vector(dim, cfg.seed.wrapping_add(attempt));
        apply(&candidate, &mut w);
        if norm(&w) > 1e-14 * scale {
            v = candidate;
            break;
        }
    }
    if v.is_empty() {
        return Err(Error::ZeroMatrix);
    }

    let mut lambda = dot(&v, &w);
    let mut residual = f64::INFINITY;
    for iteration in 1..=cfg.max_iter {
        let wn = norm(&w);
        if wn == 0.0 {
            // v fell exactly into the null space
            break;
        }
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / wn);
        apply(&v, &mut w);
        let next = dot(&v, &w);
        let mut r = w.clone();
        axpy(-next, &v, &mut r);
        residual = norm(&r);
        let settled = (next - lambda).abs() < cfg.tol * next.abs();
        lambda = next;
        if settled && residual <= cfg.tol * lambda.abs() + floor {
            apply_sign_convention(&mut v);
            return Ok(EigenPair {
                value: lambda,
                vector: v,
                iterations: iteration,
                residual,
            });
        }
    }
    apply_sign_convention(&mut v);
    Err(Error::NoConvergence {
        max_iter: cfg.max_iter,
        best: Box::new(EigenPair {
            value: lambda,
            vector: v,
            iterations: cfg.max_iter,
            residual,
        }),
    })
}

fn symmetric_apply(s: &DenseMatrix) -> impl Fn(&[f64], &mut [f64]) + '_ {
    move |v, out| {
        for (o, col) in out.iter_mut().zip(s.columns()) {
            *o = dot(col, v);
        }
    }
}

fn check_symmetric(s: &DenseMatrix) -> Result<()> {
    if !s.is_square() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", s.rows(), s.cols())));
    }
    if !s.is_symmetric(1e-12 * s.max_abs()) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    Ok(())
}

/// Dominant eigenpair of a symmetric PSD matrix.
pub fn leading_eigenpair(s: &DenseMatrix, cfg: &PowerConfig) -> Result<EigenPair> {
    check_symmetric(s)?;
    if s.max_abs() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    power_iterate(symmetric_apply(s), s.rows(), cfg, s.frobenius_norm())
}

/// Up to `k` leading eigenpairs via repeated power iteration and Hotelling
/// deflation `S ← S − λ v vᵀ`. Returns fewer than `k` pairs when the
/// remaining spectrum is negligible relative to the first eigenvalue.
pub fn top_k_eigenpairs(s: &DenseMatrix, k: usize, cfg: &PowerConfig) -> Result<Vec<EigenPair>> {
    check_symmetric(s)?;
    if k == 0 || k > s.rows() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={}",
            s.rows()
        )));
    }
    if s.max_abs() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let scale = s.frobenius_norm();
    let mut work = s.clone();
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(k);
    for index in 0..k {
        if let Some(prev) = pairs.last() {
            deflate_matrix(&mut work, prev);
            if work.frobenius_norm() <= SPECTRAL_CUTOFF * pairs[0].value {
                break;
            }
        }
        let pair = match power_iterate(symmetric_apply(&work), work.rows(), cfg, scale) {
            Ok(pair) => pair,
            Err(Error::NoConvergence { best, .. })
                if index > 0 && best.value <= SPECTRAL_CUTOFF * pairs[0].value =>
            {
                break
            }
            Err(Error::ZeroMatrix) if index > 0 => break,
            Err(e) => return Err(e.in_component(index)),
        };
        if index > 0 && pair.value <= SPECTRAL_CUTOFF * pairs[0].value {
            break;
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

fn deflate_matrix(work: &mut DenseMatrix, pair: &EigenPair) {
    let v = &pair.vector;
    for j in 0..work.cols() {
        axpy(-pair.value * v[j], v, work.column_mut(j));
    }
    work.symmetrize();
}

/// Leading pairs of the covariance computed through the Gram matrix
/// `K = XXᵀ/(n−1)`. Each loading is recovered as `Xᵀu / ‖Xᵀu‖` and returned
/// with its score `X v`. The recorded residual is the covariance residual.
pub fn top_k_eigenpairs_gram(
    cd: &CenteredData,
    k: usize,
    cfg: &PowerConfig,
) -> Result<Vec<(EigenPair, Vec<f64>)>> {
    let x = cd.matrix();
    let k_pairs = top_k_eigenpairs(&gram(cd), k.min(cd.n()), cfg)?;
    let denom = (cd.n() - 1) as f64;
    k_pairs
        .into_iter()
        .map(|pair| {
            let mut loading = x.tr_matvec(&pair.vector);
            let ln = norm(&loading);
            if ln == 0.0 {
                return Err(Error::ZeroMatrix);
            }
            loading.iter_mut().for_each(|l| *l /= ln);
            apply_sign_convention(&mut loading);
            let score = x.matvec(&loading);
            let mut sv = x.tr_matvec(&score);
            sv.iter_mut().for_each(|e| *e /= denom);
            axpy(-pair.value, &loading, &mut sv);
            Ok((
                EigenPair {
                    value: pair.value,
                    vector: loading,
                    iterations: pair.iterations,
                    residual: norm(&sv),
                },
                score,
            ))
        })
        .collect()
}

/// Leading covariance eigenpair and its score, computed in n x n space.
pub fn leading_eigenpair_gram(cd: &CenteredData, cfg: &PowerConfig) -> Result<(EigenPair, Vec<f64>)> {
    let mut pairs = top_k_eigenpairs_gram(cd, 1, cfg)?;
    Ok(pairs.remove(0))
}

/// Leading pair and score of the covariance, choosing the covariance or Gram
/// route by shape.
pub fn leading_component(cd: &CenteredData, cfg: &PowerConfig) -> Result<(EigenPair, Vec<f64>)> {
    if use_covariance_path(cd.n(), cd.p()) {
        let pair = leading_eigenpair(&crate::matrix::covariance(cd), cfg)?;
        let score = cd.matrix().matvec(&pair.vector);
        Ok((pair, score))
    } else {
        leading_eigenpair_gram(cd, cfg)
    }
}
