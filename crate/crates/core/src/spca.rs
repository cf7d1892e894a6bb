//! Projection sparse components.
//!
//! A sparse component is the least-squares projection of a parent principal
//! component score `t` onto the span of a small set of columns `X_J`:
//! the coefficients solve `(X_Jᵀ X_J) a = X_Jᵀ t`, the loadings are `a`
//! normalized to unit length and zero-padded to `p` entries, and the share of
//! the parent score's variance the projection keeps,
//!
//! ```text
//! R²(J) = ‖P_J t‖² / ‖t‖²,
//! ```
//!
//! is the guarantee statistic the selectors in [`crate::selection`] drive to a
//! target `alpha`.
//!
//! [`fit_spca`] extracts components one at a time. With
//! [`DeflationMode::Projection`] each step takes the leading PC of the current
//! data, approximates it, and then removes the reported sparse score from the
//! data (`X ← X − s (sᵀs)⁻¹ sᵀ X`), so every later score is orthogonal to the
//! earlier ones. Explained variance of the resulting (possibly correlated)
//! scores is credited in extraction order by [`adjusted_vexp`].

use serde::{Deserialize, Serialize};

use crate::eigen::{leading_component, PowerConfig};
use crate::error::{Error, Result};
use crate::matrix::{dot, norm, solve_spd, CenteredData, DenseMatrix, OrthoBasis};
use crate::pca::fit_pca;
use crate::selection::{select, SelectionPolicy, SelectionTrace};

/// `fit_spca` stops once the deflated data keeps no more than this fraction
/// of the original total variance.
pub const RESIDUAL_VARIANCE_CUTOFF: f64 = 1e-10;

/// Strictly increasing list of column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Sorts the indices; duplicates are rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "duplicate index in support {indices:?}"
            )));
        }
        Ok(Self(indices))
    }

    pub fn full(p: usize) -> Self {
        Self((0..p).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn intersection_len(&self, other: &IndexSet) -> usize {
        self.0.iter().filter(|i| other.contains(**i)).count()
    }

    fn check(&self, p: usize) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptySupport);
        }
        match self.0.last() {
            Some(&last) if last >= p => Err(Error::IndexOutOfRange { index: last, len: p }),
            _ => Ok(()),
        }
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(set: IndexSet) -> Self {
        set.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseComponent {
    pub support: IndexSet,
    /// p entries, exactly zero off the support, unit ℓ₂ norm.
    pub loadings: Vec<f64>,
    /// Unnormalized least-squares coefficients, one per support index.
    pub raw_coefficients: Vec<f64>,
    /// `X_J · loadings_J` on the data the component was fitted to.
    pub score: Vec<f64>,
    /// Share of the parent score's variance captured by the projection.
    pub projection_r2: f64,
    /// Sample variance of `score`.
    pub component_variance: f64,
    /// Sample variance of the parent score (its eigenvalue for a true PC).
    pub parent_variance: f64,
    pub parent_index: usize,
    pub cardinality: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeflationMode {
    /// Remove each sparse score from the data before the next component.
    #[default]
    Projection,
    /// Approximate the leading PCs of the undeflated data independently.
    None,
}

impl std::str::FromStr for DeflationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(Self::Projection),
            "none" => Ok(Self::None),
            other => Err(Error::InvalidArgument(format!("unknown deflation mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for DeflationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Projection => "projection",
            Self::None => "none",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpcaOptions {
    pub deflation: DeflationMode,
    pub power: PowerConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpcaFit {
    pub components: Vec<SparseComponent>,
    /// One per component, same order.
    pub traces: Vec<SelectionTrace>,
    /// Cumulative, nondecreasing.
    pub adjusted_cumulative_vexp: Vec<f64>,
    pub deflation_mode: DeflationMode,
    pub policy: SelectionPolicy,
    pub options: SpcaOptions,
    pub k_requested: usize,
    pub total_variance: f64,
    pub n: usize,
    pub p: usize,
}

impl SpcaFit {
    /// Sparse scores as an n x k matrix.
    pub fn scores(&self) -> Option<DenseMatrix> {
        let cols: Vec<Vec<f64>> = self.components.iter().map(|c| c.score.clone()).collect();
        DenseMatrix::from_columns(&cols).ok()
    }
}

fn check_score(cd: &CenteredData, t: &[f64]) -> Result<()> {
    if t.len() != cd.n() {
        return Err(Error::Shape(format!(
            "score has {} entries, data has {} rows",
            t.len(),
            cd.n()
        )));
    }
    if t.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroScore);
    }
    Ok(())
}

/// R² of regressing `t` on the columns in `support`. Rank-deficient supports
/// are handled by dropping dependent columns from the basis.
pub fn projection_r2(cd: &CenteredData, t: &[f64], support: &IndexSet) -> Result<f64> {
    support.check(cd.p())?;
    check_score(cd, t)?;
    let mut basis = OrthoBasis::new(cd.n());
    for &j in support.indices() {
        basis.push(cd.matrix().column(j));
    }
    Ok(basis.projected_sq_norm(t) / dot(t, t))
}

/// Least-squares projection of the score `t` onto the columns in `support`.
pub fn project_loadings(cd: &CenteredData, t: &[f64], support: &IndexSet) -> Result<SparseComponent> {
    support.check(cd.p())?;
    check_score(cd, t)?;
    let x = cd.matrix();
    let xj = x.select_columns(support.indices())?;
    let k = support.len();

    let mut normal = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let v = dot(xj.column(a), xj.column(b));
            normal[a * k + b] = v;
            normal[b * k + a] = v;
        }
    }
    let normal = DenseMatrix::from_parts(k, k, normal);
    let rhs = DenseMatrix::from_parts(k, 1, xj.tr_matvec(t));
    let coefficients = match solve_spd(&normal, &rhs) {
        Ok(z) => z.column(0).to_vec(),
        Err(Error::Singular { .. }) => {
            return Err(Error::SingularSubmatrix(support.indices().to_vec()));
        }
        Err(e) => return Err(e),
    };

    let coef_norm = norm(&coefficients);
    if coef_norm <= 1e-14 * norm(t) / x.frobenius_norm() {
        return Err(Error::ZeroProjection);
    }
    let mut loadings = vec![0.0; cd.p()];
    let mut restricted = Vec::with_capacity(k);
    for (&j, c) in support.indices().iter().zip(&coefficients) {
        loadings[j] = c / coef_norm;
        restricted.push(c / coef_norm);
    }
    let score = xj.matvec(&restricted);
    let denom = (cd.n() - 1) as f64;
    Ok(SparseComponent {
        support: support.clone(),
        loadings,
        raw_coefficients: coefficients,
        projection_r2: projection_r2(cd, t, support)?,
        component_variance: dot(&score, &score) / denom,
        parent_variance: dot(t, t) / denom,
        score,
        parent_index: 0,
        cardinality: k,
    })
}

/// Removes the direction `s` from every column: `X ← X − s (sᵀs)⁻¹ sᵀ X`.
pub fn deflate(cd: &CenteredData, s: &[f64]) -> Result<CenteredData> {
    check_score(cd, s)?;
    let ss = dot(s, s);
    let mut out = cd.matrix().clone();
    for j in 0..out.cols() {
        let col = out.column_mut(j);
        let c = dot(s, col) / ss;
        col.iter_mut().zip(s).for_each(|(x, si)| *x -= c * si);
    }
    Ok(cd.with_matrix(out))
}

/// Cumulative share of the original total variance explained by the scores,
/// crediting each score only with what is orthogonal to its predecessors.
pub fn adjusted_vexp(cd_original: &CenteredData, scores: &DenseMatrix) -> Vec<f64> {
    let x = cd_original.matrix();
    let total: f64 = x.as_slice().iter().map(|v| v * v).sum();
    let mut basis = OrthoBasis::new(scores.rows());
    let mut explained = 0.0;
    scores
        .columns()
        .map(|col| {
            if basis.push(col) {
                let q = basis.column(basis.rank() - 1);
                explained += x.tr_matvec(q).iter().map(|v| v * v).sum::<f64>();
            }
            if total > 0.0 {
                (explained / total).min(1.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// Extracts up to `k` sparse components; see the module docs.
pub fn fit_spca(
    cd: &CenteredData,
    k: usize,
    policy: &SelectionPolicy,
    options: &SpcaOptions,
) -> Result<SpcaFit> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    policy.validate()?;
    options.power.validate()?;
    let total = cd.total_variance();

    let mut components = Vec::with_capacity(k);
    let mut traces = Vec::with_capacity(k);
    match options.deflation {
        DeflationMode::Projection => {
            let mut current = cd.clone();
            for index in 0..k {
                if index > 0 && current.total_variance() <= RESIDUAL_VARIANCE_CUTOFF * total {
                    break;
                }
                let (pair, t) = match leading_component(&current, &options.power) {
                    Ok(found) => found,
                    Err(Error::ZeroMatrix) if index > 0 => break,
                    Err(e) => return Err(e.in_component(index)),
                };
                let (component, trace) = approximate(&current, &t, &pair.vector, policy, index)
                    .map_err(|e| e.in_component(index))?;
                current = deflate(&current, &component.score).map_err(|e| e.in_component(index))?;
                components.push(component);
                traces.push(trace);
            }
        }
        DeflationMode::None => {
            let model = fit_pca(cd, Some(k.min(cd.n() - 1).min(cd.p())), &options.power)?;
            for index in 0..model.k() {
                let (component, trace) =
                    approximate(cd, model.score(index), model.loading(index), policy, index)
                        .map_err(|e| e.in_component(index))?;
                components.push(component);
                traces.push(trace);
            }
        }
    }

    let scores: Vec<Vec<f64>> = components.iter().map(|c| c.score.clone()).collect();
    let adjusted = DenseMatrix::from_columns(&scores)
        .map(|s| adjusted_vexp(cd, &s))
        .unwrap_or_default();
    Ok(SpcaFit {
        components,
        traces,
        adjusted_cumulative_vexp: adjusted,
        deflation_mode: options.deflation,
        policy: *policy,
        options: *options,
        k_requested: k,
        total_variance: total,
        n: cd.n(),
        p: cd.p(),
    })
}

fn approximate(
    cd: &CenteredData,
    t: &[f64],
    loading: &[f64],
    policy: &SelectionPolicy,
    index: usize,
) -> Result<(SparseComponent, SelectionTrace)> {
    let (support, trace) = select(cd, t, loading, policy)?;
    let mut component = project_loadings(cd, t, &support)?;
    component.parent_index = index;
    Ok((component, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::assume_centered;

    fn pair_data() -> CenteredData {
        assume_centered(DenseMatrix::from_row_major(3, 2, &[-1.0, -1.0, 0.0, 0.0, 1.0, 1.0]).unwrap())
            .unwrap()
    }

    fn orthogonal_data() -> CenteredData {
        assume_centered(
            DenseMatrix::from_row_major(4, 2, &[1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, -1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn index_set_sorts_and_rejects_duplicates() {
        assert_eq!(IndexSet::new(vec![3, 1, 2]).unwrap().indices(), &[1, 2, 3]);
        assert!(IndexSet::new(vec![1, 1]).is_err());
    }

    #[test]
    fn single_column_spans_pc_of_correlated_pair() {
        let s2 = std::f64::consts::SQRT_2;
        let t = [-s2, 0.0, s2];
        let comp = project_loadings(&pair_data(), &t, &IndexSet::new(vec![0]).unwrap()).unwrap();
        assert!((comp.raw_coefficients[0] - s2).abs() < 1e-12);
        assert_eq!(comp.loadings, vec![1.0, 0.0]);
        // the fitted values reproduce t; the score uses the unit loading
        for (i, e) in t.iter().enumerate() {
            let fitted = comp.raw_coefficients[0] * pair_data().matrix().get(i, 0);
            assert!((fitted - e).abs() < 1e-12);
        }
        assert_eq!(comp.score, vec![-1.0, 0.0, 1.0]);
        assert!((comp.projection_r2 - 1.0).abs() < 1e-12);
        assert_eq!(comp.cardinality, 1);
    }

    #[test]
    fn orthogonal_column_gives_zero_projection() {
        let cd = orthogonal_data();
        let t = cd.matrix().column(0).to_vec();
        let j1 = IndexSet::new(vec![1]).unwrap();
        assert!(matches!(project_loadings(&cd, &t, &j1), Err(Error::ZeroProjection)));
        assert_eq!(projection_r2(&cd, &t, &j1).unwrap(), 0.0);
        assert_eq!(projection_r2(&cd, &t, &IndexSet::full(2)).unwrap(), 1.0);
    }

    #[test]
    fn support_errors() {
        let cd = pair_data();
        let t = [1.0, 0.0, -1.0];
        assert!(matches!(
            project_loadings(&cd, &t, &IndexSet::default()),
            Err(Error::EmptySupport)
        ));
        assert!(matches!(
            projection_r2(&cd, &t, &IndexSet::new(vec![2]).unwrap()),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
        assert!(matches!(
            project_loadings(&cd, &[0.0; 3], &IndexSet::full(2)),
            Err(Error::ZeroScore)
        ));
    }

    #[test]
    fn duplicate_columns_are_singular_for_loadings_but_fine_for_r2() {
        let cd = pair_data();
        let t = [1.0, 0.0, -1.0];
        let full = IndexSet::full(2);
        assert!(matches!(
            project_loadings(&cd, &t, &full),
            Err(Error::SingularSubmatrix(ref j)) if j == &vec![0, 1]
        ));
        assert!((projection_r2(&cd, &t, &full).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deflation_examples() {
        let cd = orthogonal_data();
        let s = cd.matrix().column(0).to_vec();
        let out = deflate(&cd, &s).unwrap();
        assert!(out.matrix().column(0).iter().all(|v| v.abs() < 1e-15));
        assert_eq!(out.matrix().column(1), cd.matrix().column(1));
        assert!(matches!(deflate(&cd, &[0.0; 4]), Err(Error::ZeroScore)));
    }

    #[test]
    fn adjusted_vexp_does_not_double_count() {
        let cd = orthogonal_data();
        let s = cd.matrix().column(0).to_vec();
        let scores = DenseMatrix::from_columns(&[s.clone(), s]).unwrap();
        let v = adjusted_vexp(&cd, &scores);
        assert!((v[0] - 0.5).abs() < 1e-15);
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn deflation_mode_parses() {
        assert_eq!("none".parse::<DeflationMode>().unwrap(), DeflationMode::None);
        assert!("bogus".parse::<DeflationMode>().is_err());
        assert_eq!(DeflationMode::Projection.to_string(), "projection");
    }
}
