//! Full-cardinality PCA: the parent components that sparse components approximate.

use serde::{Deserialize, Serialize};

use crate::eigen::{top_k_eigenpairs, top_k_eigenpairs_gram, use_covariance_path, EigenPair, PowerConfig};
use crate::error::{Error, Result};
use crate::matrix::{covariance, CenteredData, DenseMatrix};

/// Components whose eigenvalue is at most this fraction of the first are
/// dropped when `k` is not given.
pub const DEFAULT_RANK_CUTOFF: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub centered: bool,
    pub scaled: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    loadings: DenseMatrix,
    eigenvalues: Vec<f64>,
    scores: DenseMatrix,
    total_variance: f64,
    n: usize,
    p: usize,
    preprocessing: Preprocessing,
}

impl PcaModel {
    /// p x k, unit-norm orthogonal columns.
    pub fn loadings(&self) -> &DenseMatrix {
        &self.loadings
    }

    pub fn loading(&self, i: usize) -> &[f64] {
        self.loadings.column(i)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// n x k, `X · loadings`.
    pub fn scores(&self) -> &DenseMatrix {
        &self.scores
    }

    pub fn score(&self, i: usize) -> &[f64] {
        self.scores.column(i)
    }

    /// Trace of the sample covariance.
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn preprocessing(&self) -> &Preprocessing {
        &self.preprocessing
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        explained_variance_ratio(self)
    }
}

/// Fits `k` principal components, or every component above
/// [`DEFAULT_RANK_CUTOFF`] when `k` is `None`. The covariance route is used
/// when `p <= max(n, 2048)`, the Gram route otherwise.
pub fn fit_pca(cd: &CenteredData, k: Option<usize>, cfg: &PowerConfig) -> Result<PcaModel> {
    let (n, p) = (cd.n(), cd.p());
    let k_max = (n - 1).min(p);
    let requested = match k {
        Some(k) if k == 0 || k > k_max => {
            return Err(Error::InvalidArgument(format!("k = {k} outside 1..={k_max}")));
        }
        Some(k) => k,
        None => k_max,
    };

    let pairs: Vec<(EigenPair, Vec<f64>)> = if use_covariance_path(n, p) {
        top_k_eigenpairs(&covariance(cd), requested, cfg)?
            .into_iter()
            .map(|pair| {
                let score = cd.matrix().matvec(&pair.vector);
                (pair, score)
            })
            .collect()
    } else {
        top_k_eigenpairs_gram(cd, requested, cfg)?
    };

    let lead = pairs[0].0.value;
    let keep = if k.is_some() {
        pairs.len()
    } else {
        pairs
            .iter()
            .take_while(|(pair, _)| pair.value > DEFAULT_RANK_CUTOFF * lead)
            .count()
    };

    let eigenvalues = pairs[..keep].iter().map(|(pair, _)| pair.value).collect();
    let loadings = DenseMatrix::from_columns(
        &pairs[..keep]
            .iter()
            .map(|(pair, _)| pair.vector.clone())
            .collect::<Vec<_>>(),
    )?;
    let scores = DenseMatrix::from_columns(
        &pairs[..keep]
            .iter()
            .map(|(_, score)| score.clone())
            .collect::<Vec<_>>(),
    )?;
    Ok(PcaModel {
        loadings,
        eigenvalues,
        scores,
        total_variance: cd.total_variance(),
        n,
        p,
        preprocessing: Preprocessing {
            centered: true,
            scaled: cd.is_scaled(),
        },
    })
}

/// Eigenvalue shares of the total variance.
pub fn explained_variance_ratio(model: &PcaModel) -> Vec<f64> {
    model
        .eigenvalues
        .iter()
        .map(|l| (l / model.total_variance).clamp(0.0, 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{assume_centered, center};

    #[test]
    fn correlated_pair() {
        let x = DenseMatrix::from_row_major(3, 2, &[-1.0, -1.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        let model = fit_pca(&assume_centered(x).unwrap(), Some(1), &PowerConfig::default()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r2 = std::f64::consts::SQRT_2;
        assert!((model.eigenvalues()[0] - 2.0).abs() < 1e-12);
        assert!((model.loading(0)[0] - h).abs() < 1e-10 && (model.loading(0)[1] - h).abs() < 1e-10);
        for (s, e) in model.score(0).iter().zip([-r2, 0.0, r2]) {
            assert!((s - e).abs() < 1e-10);
        }
        assert_eq!(model.explained_variance_ratio(), vec![1.0]);
    }

    #[test]
    fn isotropic_data() {
        let x = DenseMatrix::from_row_major(4, 2, &[1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, -1.0]).unwrap();
        let cd = assume_centered(x).unwrap();
        let model = fit_pca(&cd, Some(2), &PowerConfig::default()).unwrap();
        let ev = model.eigenvalues();
        assert!((ev[0] - ev[1]).abs() < 1e-12);
        let total: f64 = model.explained_variance_ratio().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_k_drops_null_components() {
        // two columns, one a multiple of the other: rank one
        let x = DenseMatrix::from_row_major(4, 2, &[1.0, 2.0, 2.0, 4.0, -1.0, -2.0, 3.0, 6.0]).unwrap();
        let model = fit_pca(&center(&x, false).unwrap(), None, &PowerConfig::default()).unwrap();
        assert_eq!(model.k(), 1);
    }

    #[test]
    fn k_range_is_checked() {
        let x = DenseMatrix::from_row_major(3, 2, &[1.0, 2.0, 0.0, 4.0, -1.0, 5.0]).unwrap();
        let cd = center(&x, false).unwrap();
        assert!(fit_pca(&cd, Some(0), &PowerConfig::default()).is_err());
        assert!(fit_pca(&cd, Some(3), &PowerConfig::default()).is_err());
    }

    #[test]
    fn ratio_arithmetic() {
        let model = PcaModel {
            loadings: DenseMatrix::identity(2),
            eigenvalues: vec![3.0, 1.0],
            scores: DenseMatrix::identity(2),
            total_variance: 4.0,
            n: 2,
            p: 2,
            preprocessing: Preprocessing {
                centered: true,
                scaled: false,
            },
        };
        assert_eq!(explained_variance_ratio(&model), vec![0.75, 0.25]);
    }
}
