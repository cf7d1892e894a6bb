//! Dense column-major matrices and the handful of linear-algebra kernels the
//! rest of the crate is built on: centering, covariance and Gram products,
//! a Cholesky solver with a deterministic singularity floor, and
//! Gram-Schmidt orthonormalization with re-orthogonalization.

use crate::error::{Error, Result};

/// Relative pivot floor used by [`solve_spd`].
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Columns whose residual after orthogonalization falls to this fraction of
/// their original norm are treated as linearly dependent.
pub const DEPENDENCE_TOL: f64 = 1e-10;

/// Real matrix stored column-major. Entries are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("{rows}x{cols} matrix has no entries")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let mut out = vec![0.0; data.len()];
        for i in 0..rows {
            for j in 0..cols {
                out[j * rows + i] = data[i * cols + j];
            }
        }
        Self::from_col_major(rows, cols, out)
    }

    /// Builds a matrix from equal-length column vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Shape("columns differ in length".into()));
        }
        Self::from_col_major(rows, columns.len(), columns.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Self::from_col_major(n, n, data)
    }

    /// Internal constructor for results of arithmetic on finite inputs.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub(crate) fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.rows)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    /// Raw column-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = vec![0.0; self.data.len()];
        for j in 0..self.cols {
            for i in 0..self.rows {
                out[i * self.cols + j] = self.data[j * self.rows + i];
            }
        }
        Self::from_parts(self.cols, self.rows, out)
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![0.0; self.rows * other.cols];
        for (j, out_col) in out.chunks_exact_mut(self.rows).enumerate() {
            for (l, a_col) in self.columns().enumerate() {
                axpy(other.get(l, j), a_col, out_col);
            }
        }
        Ok(Self::from_parts(self.rows, other.cols, out))
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (col, xj) in self.columns().zip(x) {
            axpy(*xj, col, &mut out);
        }
        out
    }

    /// `Aᵀ x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "tr_matvec dimension mismatch");
        self.columns().map(|col| dot(col, x)).collect()
    }

    /// Copies the listed columns, in the order given.
    pub fn select_columns(&self, indices: &[usize]) -> Result<DenseMatrix> {
        if indices.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut data = Vec::with_capacity(indices.len() * self.rows);
        for &j in indices {
            if j >= self.cols {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    len: self.cols,
                });
            }
            data.extend_from_slice(self.column(j));
        }
        Ok(Self::from_parts(self.rows, indices.len(), data))
    }

    pub fn scaled(&self, factor: f64) -> Result<DenseMatrix> {
        Self::from_col_major(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * factor).collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// Replaces the matrix with `(A + Aᵀ)/2`, making it bitwise symmetric.
    pub(crate) fn symmetrize(&mut self) {
        let n = self.rows;
        for j in 0..n {
            for i in (j + 1)..n {
                let avg = 0.5 * (self.data[j * n + i] + self.data[i * n + j]);
                self.data[j * n + i] = avg;
                self.data[i * n + j] = avg;
            }
        }
    }
}

/// Data matrix with zero column means, plus what was removed to get there.
#[derive(Clone, Debug, PartialEq)]
pub struct CenteredData {
    matrix: DenseMatrix,
    column_means: Vec<f64>,
    scaled: bool,
    scale_factors: Vec<f64>,
}

impl CenteredData {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn scale_factors(&self) -> &[f64] {
        &self.scale_factors
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of variables.
    pub fn p(&self) -> usize {
        self.matrix.cols()
    }

    /// Trace of the sample covariance, computed without forming it.
    pub fn total_variance(&self) -> f64 {
        let ss: f64 = self.matrix.as_slice().iter().map(|v| v * v).sum();
        ss / (self.n() - 1) as f64
    }

    /// Same preprocessing record, different (still centered) data.
    pub(crate) fn with_matrix(&self, matrix: DenseMatrix) -> CenteredData {
        debug_assert_eq!(matrix.cols(), self.p());
        CenteredData {
            matrix,
            column_means: self.column_means.clone(),
            scaled: self.scaled,
            scale_factors: self.scale_factors.clone(),
        }
    }

    /// Undoes scaling and centering.
    pub fn restore(&self) -> DenseMatrix {
        let mut out = self.matrix.clone();
        for j in 0..self.p() {
            let (mean, factor) = (self.column_means[j], self.scale_factors[j]);
            for v in out.column_mut(j) {
                *v = *v * factor + mean;
            }
        }
        out
    }
}

/// Subtracts column means and, when `scale` is set, divides each column by
/// its sample standard deviation (divisor `n - 1`).
pub fn center(raw: &DenseMatrix, scale: bool) -> Result<CenteredData> {
    let n = raw.rows();
    if n < 2 {
        return Err(Error::Shape("centering needs at least two rows".into()));
    }
    if raw.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut matrix = raw.clone();
    let mut column_means = Vec::with_capacity(raw.cols());
    let mut scale_factors = Vec::with_capacity(raw.cols());
    for j in 0..raw.cols() {
        let col = matrix.column_mut(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        col.iter_mut().for_each(|v| *v -= mean);
        let mut factor = 1.0;
        if scale {
            let sd = (dot(col, col) / (n - 1) as f64).sqrt();
            let magnitude = raw.column(j).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if sd <= 1e-14 * magnitude || sd == 0.0 {
                return Err(Error::ConstantColumn(j));
            }
            col.iter_mut().for_each(|v| *v /= sd);
            factor = sd;
        }
        column_means.push(mean);
        scale_factors.push(factor);
    }
    Ok(CenteredData {
        matrix,
        column_means,
        scaled: scale,
        scale_factors,
    })
}

/// Wraps data whose columns are already centered. Means are recorded as zero.
pub fn assume_centered(matrix: DenseMatrix) -> Result<CenteredData> {
    if matrix.rows() < 2 {
        return Err(Error::Shape("need at least two rows".into()));
    }
    let p = matrix.cols();
    Ok(CenteredData {
        matrix,
        column_means: vec![0.0; p],
        scaled: false,
        scale_factors: vec![1.0; p],
    })
}

/// Sample covariance `XᵀX / (n - 1)`.
pub fn covariance(cd: &CenteredData) -> DenseMatrix {
    let x = cd.matrix();
    let p = x.cols();
    let denom = (x.rows() - 1) as f64;
    let mut s = vec![0.0; p * p];
    for j in 0..p {
        for i in j..p {
            s[j * p + i] = dot(x.column(i), x.column(j)) / denom;
        }
    }
    let mut s = DenseMatrix::from_parts(p, p, s);
    mirror_lower(&mut s);
    s.symmetrize();
    s
}

/// Gram matrix `XXᵀ / (n - 1)`; shares its nonzero spectrum with the covariance.
pub fn gram(cd: &CenteredData) -> DenseMatrix {
    let x = cd.matrix();
    let n = x.rows();
    let denom = (n - 1) as f64;
    let mut k = vec![0.0; n * n];
    for col in x.columns() {
        for b in 0..n {
            let cb = col[b];
            if cb != 0.0 {
                // lower triangle only: rows b..n of column b
                axpy(cb, &col[b..], &mut k[b * n + b..(b + 1) * n]);
            }
        }
    }
    k.iter_mut().for_each(|v| *v /= denom);
    let mut k = DenseMatrix::from_parts(n, n, k);
    mirror_lower(&mut k);
    k
}

fn mirror_lower(m: &mut DenseMatrix) {
    let n = m.rows;
    for j in 0..n {
        for i in (j + 1)..n {
            m.data[i * n + j] = m.data[j * n + i];
        }
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `a` using its lower triangle. Fails with [`Error::Singular`]
    /// when a pivot is at most `PIVOT_FLOOR` times the mean diagonal.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!(
                "{}x{} matrix is not square",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let floor = PIVOT_FLOOR * a.trace() / n as f64;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[k * n + j] * l[k * n + j];
            }
            if !(d > floor) || floor <= 0.0 {
                return Err(Error::Singular { pivot: j });
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[k * n + i] * l[k * n + j];
                }
                l[j * n + i] = s / d;
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve_vec(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }
}

/// Solves `A Z = B` for symmetric positive definite `A`.
pub fn solve_spd(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if b.rows() != a.rows() {
        return Err(Error::Shape(format!(
            "right-hand side has {} rows, system has {}",
            b.rows(),
            a.rows()
        )));
    }
    let chol = Cholesky::factor(a)?;
    let mut z = b.clone();
    for j in 0..z.cols() {
        chol.solve_vec(z.column_mut(j));
    }
    Ok(z)
}

/// Orthonormal basis built one vector at a time by Gram-Schmidt with a second
/// orthogonalization pass. Vectors that are numerically dependent on the
/// current basis are dropped.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    n: usize,
    q: Vec<f64>,
    kept: Vec<usize>,
    offered: usize,
}

impl OrthoBasis {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            q: Vec::new(),
            kept: Vec::new(),
            offered: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    /// Positions (in offering order) of the vectors that survived.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.q[i * self.n..(i + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.q.chunks_exact(self.n)
    }

    /// Offers a vector; returns whether it extended the basis.
    pub fn push(&mut self, v: &[f64]) -> bool {
        assert_eq!(v.len(), self.n, "basis dimension mismatch");
        let position = self.offered;
        self.offered += 1;
        let original = norm(v);
        if original == 0.0 {
            return false;
        }
        let mut w = v.to_vec();
        for _ in 0..2 {
            for q in self.q.chunks_exact(self.n) {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let residual = norm(&w);
        if residual <= DEPENDENCE_TOL * original {
            return false;
        }
        w.iter_mut().for_each(|x| *x /= residual);
        self.q.extend_from_slice(&w);
        self.kept.push(position);
        true
    }

    /// `‖Qᵀ t‖²`, the squared norm of the projection of `t` onto the span.
    pub fn projected_sq_norm(&self, t: &[f64]) -> f64 {
        self.columns().map(|q| dot(q, t).powi(2)).sum()
    }

    pub fn to_matrix(&self) -> Option<DenseMatrix> {
        (self.rank() > 0).then(|| DenseMatrix::from_parts(self.n, self.rank(), self.q.clone()))
    }
}

/// Orthonormalizes the columns of `m` in order, dropping dependent ones.
pub fn orthonormalize(m: &DenseMatrix) -> OrthoBasis {
    let mut basis = OrthoBasis::new(m.rows());
    for col in m.columns() {
        basis.push(col);
    }
    basis
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, row_major: &[f64]) -> DenseMatrix {
        DenseMatrix::from_row_major(rows, cols, row_major).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        assert!(matches!(
            DenseMatrix::from_col_major(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite)
        ));
        assert!(DenseMatrix::from_col_major(0, 2, vec![]).is_err());
        assert!(DenseMatrix::from_col_major(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn center_subtracts_mean() {
        let cd = center(&m(2, 1, &[1.0, 3.0]), false).unwrap();
        assert_eq!(cd.matrix().column(0), &[-1.0, 1.0]);
        assert_eq!(cd.column_means(), &[2.0]);
        assert_eq!(cd.scale_factors(), &[1.0]);
    }

    #[test]
    fn center_leaves_zero_mean_data_alone() {
        let x = m(3, 2, &[-1.0, 2.0, 0.0, -4.0, 1.0, 2.0]);
        let cd = center(&x, false).unwrap();
        assert_eq!(cd.matrix(), &x);
    }

    #[test]
    fn center_with_scaling() {
        let cd = center(&m(3, 1, &[0.0, 1.0, 2.0]), true).unwrap();
        assert_eq!(cd.matrix().column(0), &[-1.0, 0.0, 1.0]);
        assert_eq!(cd.column_means(), &[1.0]);
        assert_eq!(cd.scale_factors(), &[1.0]);
        assert!(cd.is_scaled());
    }

    #[test]
    fn center_rejects_constant_column_when_scaling() {
        let x = m(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        assert!(matches!(center(&x, true), Err(Error::ConstantColumn(1))));
        assert!(center(&x, false).is_ok());
    }

    #[test]
    fn center_needs_two_rows() {
        assert!(center(&m(1, 2, &[1.0, 2.0]), false).is_err());
    }

    #[test]
    fn restore_round_trips() {
        let x = m(3, 2, &[1.0, 10.0, 2.0, 30.0, 4.0, 20.0]);
        let cd = center(&x, true).unwrap();
        let back = cd.restore();
        for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn covariance_examples() {
        let cd = assume_centered(m(2, 1, &[-1.0, 1.0])).unwrap();
        assert_eq!(covariance(&cd).as_slice(), &[2.0]);

        let cd = assume_centered(m(3, 2, &[-1.0, -1.0, 0.0, 0.0, 1.0, 1.0])).unwrap();
        assert_eq!(covariance(&cd).as_slice(), &[1.0, 1.0, 1.0, 1.0]);

        // orthogonal, equal-norm centered columns
        let cd = assume_centered(m(4, 2, &[1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, -1.0])).unwrap();
        let s = covariance(&cd);
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.get(0, 0), s.get(1, 1));
    }

    #[test]
    fn gram_example() {
        let cd = assume_centered(m(2, 1, &[-1.0, 1.0])).unwrap();
        assert_eq!(gram(&cd).as_slice(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn gram_matches_direct_product() {
        let x = m(3, 4, &[1.0, 2.0, -1.0, 0.5, -2.0, 0.0, 3.0, 1.0, 1.0, -2.0, -2.0, -1.5]);
        let cd = center(&x, false).unwrap();
        let k = gram(&cd);
        let direct = cd.matrix().matmul(&cd.matrix().transpose()).unwrap();
        for (a, b) in k.as_slice().iter().zip(direct.as_slice()) {
            assert!((a - b / 2.0).abs() < 1e-12);
        }
        assert!(k.is_symmetric(0.0));
    }

    #[test]
    fn solve_spd_examples() {
        let b = m(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(solve_spd(&DenseMatrix::identity(3), &b).unwrap(), b);

        let z = solve_spd(&m(2, 2, &[2.0, 0.0, 0.0, 4.0]), &m(2, 1, &[2.0, 8.0])).unwrap();
        assert!((z.get(0, 0) - 1.0).abs() < 1e-15 && (z.get(1, 0) - 2.0).abs() < 1e-15);

        let z = solve_spd(&m(2, 2, &[2.0, 1.0, 1.0, 2.0]), &m(2, 1, &[3.0, 3.0])).unwrap();
        assert!((z.get(0, 0) - 1.0).abs() < 1e-15 && (z.get(1, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solve_spd_flags_singular_systems() {
        let a = m(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = m(2, 1, &[1.0, 1.0]);
        assert!(matches!(solve_spd(&a, &b), Err(Error::Singular { pivot: 1 })));
        let z = DenseMatrix::from_col_major(2, 2, vec![0.0; 4]).unwrap();
        assert!(matches!(solve_spd(&z, &b), Err(Error::Singular { .. })));
    }

    #[test]
    fn orthonormalize_keeps_orthonormal_input() {
        let q = m(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let basis = orthonormalize(&q);
        assert_eq!(basis.to_matrix().unwrap(), q);
    }

    #[test]
    fn orthonormalize_drops_duplicates() {
        let basis = orthonormalize(&m(3, 2, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(basis.rank(), 1);
        assert_eq!(basis.kept(), &[0]);
        assert_eq!(basis.column(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn orthonormalize_general() {
        let basis = orthonormalize(&m(3, 2, &[1.0, 1.0, 1.0, 0.0, 0.0, 1.0]));
        let q = basis.to_matrix().unwrap();
        let qtq = q.transpose().matmul(&q).unwrap();
        let eye = DenseMatrix::identity(2);
        for (a, b) in qtq.as_slice().iter().zip(eye.as_slice()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn orthonormalize_drops_zero_columns() {
        let basis = orthonormalize(&m(2, 2, &[0.0, 1.0, 0.0, 1.0]));
        assert_eq!(basis.kept(), &[1]);
        assert!(orthonormalize(&m(2, 1, &[0.0, 0.0])).to_matrix().is_none());
    }
}
