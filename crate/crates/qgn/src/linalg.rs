//! Small dense vectors and matrices plus the Gauss-Newton step solve.
//!
//! Everything here is sized for the Jacobians this crate actually meets
//! (a handful of rows and columns), so the representation is a plain
//! row-major `Vec<f64>` and the least-squares solve is an unblocked
//! Householder QR.

use std::fmt;

/// Errors raised by construction and solves in this module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinAlgError {
    /// A constructor was handed a non-finite entry.
    NonFinite,
    /// An operand length does not match the expected dimension.
    DimensionMismatch { expected: usize, actual: usize },
    /// The least-squares solve needs `m >= n >= 1`.
    Underdetermined { rows: usize, cols: usize },
    /// The factor diagonal dropped below the rank tolerance; `rank` is the
    /// number of columns that still look independent.
    RankDeficient { rank: usize },
}

impl fmt::Display for LinAlgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinAlgError::NonFinite => write!(f, "non-finite entry"),
            LinAlgError::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            LinAlgError::Underdetermined { rows, cols } => {
                write!(f, "system is under-determined: {rows} rows, {cols} columns")
            }
            LinAlgError::RankDeficient { rank } => {
                write!(f, "normal equations are singular (estimated rank {rank})")
            }
        }
    }
}

impl std::error::Error for LinAlgError {}

/// Dense column vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    data: Vec<f64>,
}

impl DenseVector {
    /// Wraps `data`, rejecting NaN and infinities.
    pub fn new(data: Vec<f64>) -> Result<Self, LinAlgError> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LinAlgError::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot of mismatched lengths");
        dot(&self.data, &other.data)
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Dense row-major matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds an `rows x cols` matrix from row-major `data`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinAlgError> {
        if data.len() != rows * cols {
            return Err(LinAlgError::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LinAlgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinAlgError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(m * n);
        for row in rows {
            if row.len() != n {
                return Err(LinAlgError::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(m, n, data)
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

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `A x` for a slice of length `cols`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec length mismatch");
        (0..self.rows)
            .map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], x))
            .collect()
    }

    /// `A^T y` for a slice of length `rows`.
    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "transpose_mul_vec length mismatch");
        let mut out = vec![0.0; self.cols];
        for (row, yi) in self.data.chunks_exact(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Householder QR factorization of an `m x n` matrix, `m >= n`.
///
/// Reflectors are kept so the factorization can be re-applied to fresh
/// right-hand sides (used by the refinement pass in [`solve_gn_step`]).
struct QrFactors {
    r: Vec<f64>, // row-major upper triangle of R in the top n x n block
    reflectors: Vec<Vec<f64>>,
    rows: usize,
    cols: usize,
}

impl QrFactors {
    fn factor(a: &DenseMatrix) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut work = a.data.clone();
        let mut reflectors = Vec::with_capacity(n);
        for k in 0..n {
            let col_norm = (k..m)
                .map(|i| work[i * n + k] * work[i * n + k])
                .sum::<f64>()
                .sqrt();
            let mut v = vec![0.0; m - k];
            if col_norm == 0.0 {
                reflectors.push(v);
                continue;
            }
            let head = work[k * n + k];
            let sign = if head >= 0.0 { 1.0 } else { -1.0 };
            v[0] = head + sign * col_norm;
            for i in k + 1..m {
                v[i - k] = work[i * n + k];
            }
            let vtv = dot(&v, &v);
            for c in k..n {
                let mut s = 0.0;
                for i in k..m {
                    s += v[i - k] * work[i * n + c];
                }
                let scale = 2.0 * s / vtv;
                for i in k..m {
                    work[i * n + c] -= scale * v[i - k];
                }
            }
            // Force the exact reflected value on the diagonal.
            work[k * n + k] = -sign * col_norm;
            for i in k + 1..m {
                work[i * n + k] = 0.0;
            }
            reflectors.push(v);
        }
        Self {
            r: work,
            rows: m,
            cols: n,
            reflectors,
        }
    }

    /// Rank estimate from the factor diagonal: a column counts as dependent
    /// when its diagonal magnitude falls below
    /// `max(m, n) * eps * max_diag`.
    fn estimated_rank(&self) -> usize {
        let max_diag = (0..self.cols)
            .map(|k| self.r[k * self.cols + k].abs())
            .fold(0.0_f64, f64::max);
        if max_diag == 0.0 {
            return 0;
        }
        let tol = self.rows.max(self.cols) as f64 * f64::EPSILON * max_diag;
        (0..self.cols)
            .filter(|&k| self.r[k * self.cols + k].abs() >= tol)
            .count()
    }

    /// Solves `min ||rhs - A x||` given the stored factorization.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (m, n) = (self.rows, self.cols);
        let mut b = rhs.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            if v.iter().all(|&x| x == 0.0) {
                continue;
            }
            let vtv = dot(v, v);
            let mut s = 0.0;
            for i in k..m {
                s += v[i - k] * b[i];
            }
            let scale = 2.0 * s / vtv;
            for i in k..m {
                b[i] -= scale * v[i - k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let tail: f64 = (k + 1..n).map(|c| self.r[k * n + c] * x[c]).sum();
            x[k] = (b[k] - tail) / self.r[k * n + k];
        }
        x
    }
}

/// Solves the Gauss-Newton step: the `h` minimizing `||f + J h||_2`,
/// i.e. the solution of `(J^T J) h = -J^T f` for full-column-rank `J`.
///
/// The step is computed by a Householder QR solve of `J h = -f` followed by
/// one refinement pass, which keeps the conditioning at `kappa(J)` instead of
/// `kappa(J)^2` and tightens the solution to working precision.
pub fn solve_gn_step(j: &DenseMatrix, f: &DenseVector) -> Result<DenseVector, LinAlgError> {
    let (m, n) = (j.rows(), j.cols());
    if n == 0 || m < n {
        return Err(LinAlgError::Underdetermined { rows: m, cols: n });
    }
    if f.len() != m {
        return Err(LinAlgError::DimensionMismatch {
            expected: m,
            actual: f.len(),
        });
    }
    let qr = QrFactors::factor(j);
    let rank = qr.estimated_rank();
    if rank < n {
        return Err(LinAlgError::RankDeficient { rank });
    }
    let neg_f: Vec<f64> = f.as_slice().iter().map(|v| -v).collect();
    let mut h = qr.solve(&neg_f);
    // One refinement pass against the original system.
    let jh = j.mul_vec(&h);
    let resid: Vec<f64> = neg_f.iter().zip(&jh).map(|(b, a)| b - a).collect();
    let delta = qr.solve(&resid);
    for (hi, di) in h.iter_mut().zip(&delta) {
        *hi += di;
    }
    DenseVector::new(h).map_err(|_| LinAlgError::NonFinite)
}

/// True iff `h` is a descent direction for the objective `F = 0.5 ||f||^2`,
/// i.e. `h^T (J^T f) < 0`.
pub fn descent_check(j: &DenseMatrix, f: &DenseVector, h: &DenseVector) -> bool {
    assert_eq!(f.len(), j.rows(), "residual length mismatch");
    assert_eq!(h.len(), j.cols(), "step length mismatch");
    let grad = j.transpose_mul_vec(f.as_slice());
    dot(h.as_slice(), &grad) < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(a: f64, b: f64) -> DenseVector {
        DenseVector::new(vec![a, b]).unwrap()
    }

    #[test]
    fn identity_system_negates_rhs() {
        let j = DenseMatrix::identity(2);
        let h = solve_gn_step(&j, &vec2(1.0, 2.0)).unwrap();
        assert_eq!(h.as_slice(), &[-1.0, -2.0]);
    }

    #[test]
    fn column_of_ones_gives_least_squares_mean() {
        let j = DenseMatrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        let h = solve_gn_step(&j, &vec2(1.0, 3.0)).unwrap();
        assert!((h[0] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn dependent_columns_report_rank() {
        let j = DenseMatrix::new(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let err = solve_gn_step(&j, &vec2(1.0, 2.0)).unwrap_err();
        assert_eq!(err, LinAlgError::RankDeficient { rank: 1 });
    }

    #[test]
    fn zero_matrix_reports_rank_zero() {
        let j = DenseMatrix::new(2, 1, vec![0.0, 0.0]).unwrap();
        let err = solve_gn_step(&j, &vec2(1.0, 2.0)).unwrap_err();
        assert_eq!(err, LinAlgError::RankDeficient { rank: 0 });
    }

    #[test]
    fn shape_violations_are_reported() {
        let j = DenseMatrix::new(1, 2, vec![1.0, 2.0]).unwrap();
        let f = DenseVector::new(vec![1.0]).unwrap();
        assert!(matches!(
            solve_gn_step(&j, &f),
            Err(LinAlgError::Underdetermined { rows: 1, cols: 2 })
        ));
        let j = DenseMatrix::identity(2);
        let f = DenseVector::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            solve_gn_step(&j, &f),
            Err(LinAlgError::DimensionMismatch {
                expected: 2,
                actual: 3
            })
        ));
    }

    #[test]
    fn constructors_reject_non_finite() {
        assert_eq!(
            DenseVector::new(vec![1.0, f64::NAN]),
            Err(LinAlgError::NonFinite)
        );
        assert_eq!(
            DenseMatrix::new(1, 2, vec![1.0, f64::INFINITY]),
            Err(LinAlgError::NonFinite)
        );
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0; 3]),
            Err(LinAlgError::DimensionMismatch {
                expected: 4,
                actual: 3
            })
        ));
    }

    #[test]
    fn residual_orthogonality_on_tall_system() {
        let j = DenseMatrix::new(3, 2, vec![1.0, 2.0, 0.5, -1.0, 2.0, 1.0]).unwrap();
        let f = DenseVector::new(vec![0.3, -1.2, 2.0]).unwrap();
        let h = solve_gn_step(&j, &f).unwrap();
        let jh = j.mul_vec(h.as_slice());
        let resid: Vec<f64> = f.as_slice().iter().zip(&jh).map(|(a, b)| a + b).collect();
        let ortho = j.transpose_mul_vec(&resid);
        let scale = j
            .transpose_mul_vec(f.as_slice())
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        for v in ortho {
            assert!(
                v.abs() <= 1e-8 * scale,
                "J^T(f + Jh) = {v} exceeds tolerance"
            );
        }
    }

    #[test]
    fn descent_check_examples() {
        let j = DenseMatrix::identity(2);
        let f = vec2(1.0, 1.0);
        assert!(descent_check(&j, &f, &vec2(-1.0, -1.0)));
        assert!(!descent_check(&j, &f, &vec2(0.0, 0.0)));
        let h = solve_gn_step(&j, &f).unwrap();
        assert!(descent_check(&j, &f, &h));
    }
}
