//! Dense matrix type and the pseudoinverse-based solvers everything else is
//! built on.
//!
//! [`Matrix`] wraps a `nalgebra::DMatrix<f64>` and enforces two invariants at
//! every public construction point: at least one row and one column, and no
//! NaN or infinite entries. Operations that can overflow (products, solves)
//! re-check finiteness and report [`Error::NonFinite`].
//!
//! The pseudoinverse is always formed from a thin SVD (computed by `faer`)
//! with a singular-value cutoff. For full-rank inputs this coincides with the primal
//! `(AᵀA)⁻¹Aᵀ` (tall) or dual `Aᵀ(AAᵀ)⁻¹` (wide) forms; for rank-deficient
//! inputs it still yields the minimum-norm least-squares solution.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Matrix {
    inner: DMatrix<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::DataLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &data))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::dimension(
                    "Matrix::from_rows",
                    format!("{cols} columns"),
                    format!("{} columns in row {i}", row.len()),
                ));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn column_vector(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    /// Wraps an existing nalgebra matrix, checking the invariants.
    pub fn from_dmatrix(inner: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = inner.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        // nalgebra storage is column-major.
        if let Some(pos) = inner.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % rows,
                col: pos / rows,
            });
        }
        Ok(Self { inner })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_dmatrix(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        Self::from_dmatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.inner.row(row).iter().copied().collect()
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        self.inner.column(col).iter().copied().collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.inner.transpose().as_slice().to_vec()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn transpose(&self) -> Matrix {
        Matrix {
            inner: self.inner.transpose(),
        }
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::dimension(
                "matmul",
                format!("lhs cols == rhs rows ({})", self.cols()),
                format!("{:?} x {:?}", self.shape(), rhs.shape()),
            ));
        }
        Self::from_dmatrix(&self.inner * &rhs.inner)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.same_shape("sub", rhs)?;
        Self::from_dmatrix(&self.inner - &rhs.inner)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.same_shape("add", rhs)?;
        Self::from_dmatrix(&self.inner + &rhs.inner)
    }

    pub fn scale(&self, factor: f64) -> Result<Matrix> {
        Self::from_dmatrix(&self.inner * factor)
    }

    /// Elementwise map. The closure must keep values finite; this is checked.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Matrix> {
        Self::from_dmatrix(self.inner.map(f))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `[1, self]`: prepends a column of ones.
    pub fn with_ones_column(&self) -> Matrix {
        let (rows, cols) = self.shape();
        let mut out = DMatrix::from_element(rows, cols + 1, 1.0);
        out.columns_mut(1, cols).copy_from(&self.inner);
        Matrix { inner: out }
    }

    /// Splits off the first row: `(bias row, remaining rows)`.
    ///
    /// Returns `None` for the remainder when the matrix has a single row.
    pub fn split_first_row(&self) -> (Matrix, Option<Matrix>) {
        let (rows, cols) = self.shape();
        let head = Matrix {
            inner: self.inner.rows(0, 1).into_owned(),
        };
        let tail = (rows > 1).then(|| Matrix {
            inner: self.inner.rows(1, rows - 1).into_owned(),
        });
        debug_assert_eq!(head.cols(), cols);
        (head, tail)
    }

    /// Broadcasts a `1 x c` row over `rows` rows, i.e. `1 · rowᵀ`.
    pub fn broadcast_row(row: &Matrix, rows: usize) -> Result<Matrix> {
        if row.rows() != 1 {
            return Err(Error::dimension(
                "broadcast_row",
                "a single row",
                format!("{:?}", row.shape()),
            ));
        }
        Self::from_fn(rows, row.cols(), |_, c| row.get(0, c))
    }

    pub fn select_rows(&self, indices: &[usize]) -> Result<Matrix> {
        if indices.is_empty() {
            return Err(Error::EmptyMatrix {
                rows: 0,
                cols: self.cols(),
            });
        }
        let cols = self.cols();
        Ok(Matrix {
            inner: DMatrix::from_fn(indices.len(), cols, |r, c| self.inner[(indices[r], c)]),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.inner.iter().copied()
    }

    fn same_shape(&self, op: &'static str, rhs: &Matrix) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::dimension(
                op,
                format!("{:?}", self.shape()),
                format!("{:?}", rhs.shape()),
            ));
        }
        Ok(())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list()
            .entries((0..self.rows()).map(|r| self.row(r)))
            .finish()
    }
}

/// A pseudoinverse together with the numerical rank and cutoff that produced it.
#[derive(Debug, Clone)]
pub struct PinvResult {
    pub pinv: Matrix,
    pub rank: usize,
    pub tolerance: f64,
}

/// Moore-Penrose pseudoinverse via thin SVD.
///
/// Singular values at or below the cutoff are treated as zero. With
/// `rcond = None` the cutoff is `max(rows, cols) · ε · σ_max`; otherwise it is
/// `rcond · σ_max`.
pub fn pinv(a: &Matrix, rcond: Option<f64>) -> Result<PinvResult> {
    let (rows, cols) = a.shape();
    let dense = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a.inner[(i, j)]);
    let svd = dense.thin_svd().map_err(|_| Error::SvdFailure { rows, cols })?;
    let (u, v) = (svd.U(), svd.V());
    let sigma: Vec<f64> = (0..svd.S().dim()).map(|i| svd.S()[i]).collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let tolerance = match rcond {
        Some(r) => r * sigma_max,
        None => rows.max(cols) as f64 * f64::EPSILON * sigma_max,
    };

    // A† = V_r Σ_r⁻¹ U_rᵀ over the singular values above the cutoff.
    let kept: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > tolerance).collect();
    let rank = kept.len();
    let v_scaled = DMatrix::from_fn(cols, rank, |r, k| v[(r, kept[k])] / sigma[kept[k]]);
    let u_kept = DMatrix::from_fn(rows, rank, |r, k| u[(r, kept[k])]);
    let out = v_scaled * u_kept.transpose();
    Ok(PinvResult {
        pinv: Matrix::from_dmatrix(out)?,
        rank,
        tolerance,
    })
}

/// Minimum-norm least-squares solution of `A Θ = B`, i.e. `A† B`.
pub fn solve_least_squares(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    solve_least_squares_with(a, b, None).map(|(theta, _)| theta)
}

/// As [`solve_least_squares`], with an explicit cutoff; also returns the rank used.
pub fn solve_least_squares_with(a: &Matrix, b: &Matrix, rcond: Option<f64>) -> Result<(Matrix, usize)> {
    if a.rows() != b.rows() {
        return Err(Error::dimension(
            "solve_least_squares",
            format!("b with {} rows", a.rows()),
            format!("{} rows", b.rows()),
        ));
    }
    let p = pinv(a, rcond)?;
    Ok((p.pinv.matmul(b)?, p.rank))
}

/// `trace((AΘ − B)ᵀ(AΘ − B))`, summed directly over the residual entries.
pub fn sse(a: &Matrix, theta: &Matrix, b: &Matrix) -> Result<f64> {
    if a.cols() != theta.rows() || a.rows() != b.rows() || theta.cols() != b.cols() {
        return Err(Error::dimension(
            "sse",
            "a.cols == theta.rows, a.rows == b.rows, theta.cols == b.cols",
            format!("a {:?}, theta {:?}, b {:?}", a.shape(), theta.shape(), b.shape()),
        ));
    }
    let product = a.matmul(theta)?;
    residual_sse(&product, b)
}

/// Sum of squared entrywise differences between two same-shape matrices.
pub fn residual_sse(predicted: &Matrix, target: &Matrix) -> Result<f64> {
    if predicted.shape() != target.shape() {
        return Err(Error::dimension(
            "residual_sse",
            format!("{:?}", target.shape()),
            format!("{:?}", predicted.shape()),
        ));
    }
    Ok(predicted
        .inner
        .iter()
        .zip(target.inner.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(
            Matrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            Matrix::new(0, 2, vec![]),
            Err(Error::EmptyMatrix { .. })
        ));
        assert!(matches!(
            Matrix::new(2, 2, vec![1.0]),
            Err(Error::DataLength { .. })
        ));
    }

    #[test]
    fn row_major_order_is_preserved() {
        let a = Matrix::new(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(a.get(0, 2), 3.0);
        assert_eq!(a.get(1, 0), 4.0);
        assert_eq!(a.to_row_major(), vec![1., 2., 3., 4., 5., 6.]);
    }

    #[test]
    fn ones_column_and_row_split() {
        let a = m(&[&[2., 3.], &[4., 5.]]);
        let aug = a.with_ones_column();
        assert_eq!(aug.to_row_major(), vec![1., 2., 3., 1., 4., 5.]);
        let (head, tail) = aug.transpose().split_first_row();
        assert_eq!(head.to_row_major(), vec![1., 1.]);
        assert_eq!(tail.unwrap().shape(), (2, 2));
        assert!(m(&[&[1., 2.]]).split_first_row().1.is_none());
    }

    #[test]
    fn pinv_of_identity() {
        let p = pinv(&Matrix::identity(2).unwrap(), None).unwrap();
        assert_eq!(p.rank, 2);
        assert_abs_diff_eq!(p.pinv.max_abs_diff(&Matrix::identity(2).unwrap()), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pinv_of_singular_diagonal() {
        let a = m(&[&[1., 0.], &[0., 0.]]);
        let p = pinv(&a, None).unwrap();
        assert_eq!(p.rank, 1);
        assert_abs_diff_eq!(p.pinv.max_abs_diff(&a), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pinv_of_row_vector_matches_dual_formula() {
        // Aᵀ(AAᵀ)⁻¹ with A = [1, 1]: AAᵀ = 2, so the result is [0.5, 0.5]ᵀ.
        let p = pinv(&m(&[&[1., 1.]]), None).unwrap();
        assert_eq!(p.pinv.shape(), (2, 1));
        assert_abs_diff_eq!(p.pinv.get(0, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.pinv.get(1, 0), 0.5, epsilon = 1e-15);
        assert_eq!(p.rank, 1);
    }

    #[test]
    fn pinv_of_zero_matrix_has_rank_zero() {
        let p = pinv(&Matrix::zeros(3, 2).unwrap(), None).unwrap();
        assert_eq!(p.rank, 0);
        assert_eq!(p.pinv.shape(), (2, 3));
        assert_eq!(p.pinv.frobenius_norm(), 0.0);
    }

    #[test]
    fn explicit_rcond_scales_with_sigma_max() {
        let a = m(&[&[1., 0.], &[0., 1e-3]]);
        assert_eq!(pinv(&a, None).unwrap().rank, 2);
        let p = pinv(&a, Some(1e-2)).unwrap();
        assert_eq!(p.rank, 1);
        assert_abs_diff_eq!(p.tolerance, 1e-2, epsilon = 1e-15);
    }

    #[test]
    fn least_squares_examples() {
        let b = Matrix::column_vector(&[3., -1., 7.]).unwrap();
        let x = solve_least_squares(&Matrix::identity(3).unwrap(), &b).unwrap();
        assert!(x.max_abs_diff(&b) < 1e-14);

        // (AᵀA)⁻¹Aᵀb with A = [1; 1], b = [0, 2]ᵀ: (1/2)(0 + 2) = 1.
        let x = solve_least_squares(&m(&[&[1.], &[1.]]), &Matrix::column_vector(&[0., 2.]).unwrap()).unwrap();
        assert_eq!(x.shape(), (1, 1));
        assert_abs_diff_eq!(x.get(0, 0), 1.0, epsilon = 1e-14);

        // Aᵀ(AAᵀ)⁻¹b with A = [1, 1], b = [2]: [1, 1]ᵀ.
        let x = solve_least_squares(&m(&[&[1., 1.]]), &m(&[&[2.]])).unwrap();
        assert_abs_diff_eq!(x.get(0, 0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x.get(1, 0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn least_squares_rejects_row_mismatch() {
        let err = solve_least_squares(&Matrix::identity(3).unwrap(), &Matrix::zeros(2, 1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn sse_examples() {
        let i2 = Matrix::identity(2).unwrap();
        assert_eq!(sse(&i2, &i2, &i2).unwrap(), 0.0);
        assert_eq!(sse(&i2, &Matrix::zeros(2, 2).unwrap(), &i2).unwrap(), 2.0);
        // residual (1 - 0)² + (1 - 2)²
        let v = sse(&m(&[&[1.], &[1.]]), &m(&[&[1.]]), &Matrix::column_vector(&[0., 2.]).unwrap()).unwrap();
        assert_eq!(v, 2.0);
        assert!(matches!(
            sse(&i2, &Matrix::zeros(3, 1).unwrap(), &i2),
            Err(Error::Dimension { .. })
        ));
    }
}
