//! Jackson q-calculus operators.
//!
//! The dilation parameter `q` always lives in `(0, 1]`. Strictly inside the
//! interval the q-derivative is the Jackson difference quotient
//! `(f(x) - f(qx)) / ((1 - q) x)`; `q = 1` is accepted everywhere as the
//! sentinel for classical calculus, and points with `|x_i|` at or below a
//! zero threshold fall back to the classical partial derivative as well,
//! since the difference quotient loses its meaning at the origin.

use std::fmt;
use std::sync::Arc;

use crate::linalg::DenseMatrix;

/// Default threshold below which a coordinate is treated as zero when
/// selecting the classical-derivative branch.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-12;

/// Step used by the classical central-difference fallback, scaled by the
/// magnitude of the evaluation point.
fn fd_step(x: f64) -> f64 {
    1e-8_f64.max(1e-8 * x.abs())
}

/// Errors raised by the q-calculus operators.
#[derive(Debug, Clone, PartialEq)]
pub enum QCalcError {
    /// A dilation parameter fell outside `(0, 1]`.
    DilationOutOfRange { q: f64 },
    /// A coordinate index was not below the field dimension.
    IndexOutOfRange { index: usize, dim: usize },
    /// An argument length did not match the declared dimension.
    DimensionMismatch { expected: usize, actual: usize },
    /// A binomial coefficient was requested with `j > n`.
    BinomialIndex { n: u32, j: u32 },
    /// A function evaluation produced NaN or an infinity.
    NonFinite,
}

impl fmt::Display for QCalcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QCalcError::DilationOutOfRange { q } => {
                write!(f, "dilation parameter {q} is outside (0, 1]")
            }
            QCalcError::IndexOutOfRange { index, dim } => {
                write!(
                    f,
                    "coordinate index {index} out of range for dimension {dim}"
                )
            }
            QCalcError::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            QCalcError::BinomialIndex { n, j } => {
                write!(f, "binomial index j={j} out of range for n={n}")
            }
            QCalcError::NonFinite => write!(f, "evaluation produced a non-finite value"),
        }
    }
}

impl std::error::Error for QCalcError {}

fn check_q(q: f64) -> Result<(), QCalcError> {
    if q.is_finite() && q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(QCalcError::DilationOutOfRange { q })
    }
}

/// Per-coordinate dilation parameters, one `q_i` in `(0, 1]` per dimension.
///
/// `q_i = 1` selects the classical derivative in coordinate `i`. All the
/// experiments in this crate use a single scalar `q`, built with
/// [`DilationParams::uniform`].
#[derive(Debug, Clone, PartialEq)]
pub struct DilationParams {
    values: Vec<f64>,
}

impl DilationParams {
    /// Broadcasts one `q` to all `n` coordinates.
    pub fn uniform(q: f64, n: usize) -> Result<Self, QCalcError> {
        check_q(q)?;
        Ok(Self { values: vec![q; n] })
    }

    /// One `q_i` per coordinate.
    pub fn per_coordinate(values: Vec<f64>) -> Result<Self, QCalcError> {
        for &q in &values {
            check_q(q)?;
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// True when every coordinate uses the classical derivative.
    pub fn is_classical(&self) -> bool {
        self.values.iter().all(|&q| q == 1.0)
    }
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A real-valued function of `n` real variables.
///
/// The evaluator must be pure: identical inputs produce identical outputs.
/// An optional analytic gradient serves the classical-derivative branch; in
/// its absence central finite differences are used.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    f: Arc<ScalarFn>,
    gradient: Option<Arc<GradientFn>>,
}

impl ScalarField {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        assert!(dim >= 1, "scalar field needs at least one variable");
        Self {
            dim,
            f: Arc::new(f),
            gradient: None,
        }
    }

    /// Attaches an analytic gradient evaluator.
    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "argument length mismatch");
        (self.f)(x)
    }

    fn classical_partial(&self, x: &[f64], i: usize) -> f64 {
        if let Some(g) = &self.gradient {
            return g(x)[i];
        }
        let h = fd_step(x[i]);
        let mut hi = x.to_vec();
        let mut lo = x.to_vec();
        hi[i] += h;
        lo[i] -= h;
        (self.eval(&hi) - self.eval(&lo)) / (2.0 * h)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("gradient", &self.gradient.is_some())
            .finish()
    }
}

/// A vector-valued function `R^n -> R^m`.
#[derive(Clone)]
pub struct VectorField {
    dim_in: usize,
    dim_out: usize,
    f: Arc<VectorFn>,
}

impl VectorField {
    pub fn new(
        dim_in: usize,
        dim_out: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        assert!(
            dim_in >= 1 && dim_out >= 1,
            "vector field dimensions must be positive"
        );
        Self {
            dim_in,
            dim_out,
            f: Arc::new(f),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim_in, "argument length mismatch");
        let out = (self.f)(x);
        assert_eq!(
            out.len(),
            self.dim_out,
            "evaluator returned wrong output length"
        );
        out
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("dim_in", &self.dim_in)
            .field("dim_out", &self.dim_out)
            .finish()
    }
}

/// The q-analog `[n] = (q^n - 1) / (q - 1)`; equals `n` at `q = 1`.
pub fn q_number(n: u32, q: f64) -> Result<f64, QCalcError> {
    check_q(q)?;
    if q == 1.0 {
        return Ok(n as f64);
    }
    Ok((q.powi(n as i32) - 1.0) / (q - 1.0))
}

/// The q-factorial `[n]! = [1][2]...[n]`, with `[0]! = 1`.
pub fn q_factorial(n: u32, q: f64) -> Result<f64, QCalcError> {
    check_q(q)?;
    let mut acc = 1.0;
    for k in 1..=n {
        acc *= q_number(k, q)?;
    }
    Ok(acc)
}

/// The q-binomial coefficient `[n]! / ([j]! [n-j]!)` for `0 <= j <= n`.
pub fn q_binomial(n: u32, j: u32, q: f64) -> Result<f64, QCalcError> {
    check_q(q)?;
    if j > n {
        return Err(QCalcError::BinomialIndex { n, j });
    }
    Ok(q_factorial(n, q)? / (q_factorial(j, q)? * q_factorial(n - j, q)?))
}

/// The q-differential `d_q f(x) = f(qx) - f(x)` of a univariate field.
pub fn q_differential(f: &ScalarField, x: f64, q: f64) -> f64 {
    assert_eq!(f.dim(), 1, "q_differential needs a univariate field");
    f.eval(&[q * x]) - f.eval(&[x])
}

/// The Jackson q-derivative of a univariate field at `x`.
///
/// Away from the origin and for `q < 1` this is
/// `(f(x) - f(qx)) / ((1 - q) x)`; at `q = 1` or `|x|` below the zero
/// threshold it is the classical derivative (analytic when the field
/// carries one, central differences otherwise).
pub fn q_derivative(f: &ScalarField, x: f64, q: f64) -> Result<f64, QCalcError> {
    q_derivative_with(f, x, q, DEFAULT_ZERO_THRESHOLD)
}

/// [`q_derivative`] with an explicit zero threshold.
pub fn q_derivative_with(
    f: &ScalarField,
    x: f64,
    q: f64,
    zero_threshold: f64,
) -> Result<f64, QCalcError> {
    if f.dim() != 1 {
        return Err(QCalcError::DimensionMismatch {
            expected: 1,
            actual: f.dim(),
        });
    }
    q_partial_with(f, &[x], 0, q, zero_threshold)
}

/// The q-partial derivative of `f` at `x` with respect to coordinate `i`.
pub fn q_partial(f: &ScalarField, x: &[f64], i: usize, q: f64) -> Result<f64, QCalcError> {
    q_partial_with(f, x, i, q, DEFAULT_ZERO_THRESHOLD)
}

/// [`q_partial`] with an explicit zero threshold.
pub fn q_partial_with(
    f: &ScalarField,
    x: &[f64],
    i: usize,
    q: f64,
    zero_threshold: f64,
) -> Result<f64, QCalcError> {
    check_q(q)?;
    if x.len() != f.dim() {
        return Err(QCalcError::DimensionMismatch {
            expected: f.dim(),
            actual: x.len(),
        });
    }
    if i >= f.dim() {
        return Err(QCalcError::IndexOutOfRange {
            index: i,
            dim: f.dim(),
        });
    }
    let value = if q == 1.0 || x[i].abs() <= zero_threshold {
        f.classical_partial(x, i)
    } else {
        let mut dilated = x.to_vec();
        dilated[i] *= q;
        (f.eval(x) - f.eval(&dilated)) / ((1.0 - q) * x[i])
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(QCalcError::NonFinite)
    }
}

/// The q-gradient: component `i` is the q-partial with dilation `q_i`.
pub fn q_gradient(f: &ScalarField, x: &[f64], q: &DilationParams) -> Result<Vec<f64>, QCalcError> {
    q_gradient_with(f, x, q, DEFAULT_ZERO_THRESHOLD)
}

/// [`q_gradient`] with an explicit zero threshold.
pub fn q_gradient_with(
    f: &ScalarField,
    x: &[f64],
    q: &DilationParams,
    zero_threshold: f64,
) -> Result<Vec<f64>, QCalcError> {
    if q.len() != f.dim() {
        return Err(QCalcError::DimensionMismatch {
            expected: f.dim(),
            actual: q.len(),
        });
    }
    (0..f.dim())
        .map(|i| q_partial_with(f, x, i, q.get(i), zero_threshold))
        .collect()
}

/// The q-Jacobian of a vector field: entry `(i, j)` is the q-partial of
/// component `i` with respect to coordinate `j` under dilation `q_j`.
pub fn q_jacobian(
    f: &VectorField,
    x: &[f64],
    q: &DilationParams,
) -> Result<DenseMatrix, QCalcError> {
    q_jacobian_with(f, x, q, DEFAULT_ZERO_THRESHOLD)
}

/// [`q_jacobian`] with an explicit zero threshold.
///
/// Columns are computed in one shot: the Jackson quotient of the whole
/// residual vector shares the `f(x)` and `f(x with x_j dilated)`
/// evaluations, and the classical branch uses per-column central
/// differences.
pub fn q_jacobian_with(
    f: &VectorField,
    x: &[f64],
    q: &DilationParams,
    zero_threshold: f64,
) -> Result<DenseMatrix, QCalcError> {
    let (n, m) = (f.dim_in(), f.dim_out());
    if q.len() != n {
        return Err(QCalcError::DimensionMismatch {
            expected: n,
            actual: q.len(),
        });
    }
    if x.len() != n {
        return Err(QCalcError::DimensionMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    for &qi in q.values() {
        check_q(qi)?;
    }
    let base = f.eval(x);
    let mut columns = vec![vec![0.0; m]; n];
    for j in 0..n {
        let qj = q.get(j);
        if qj == 1.0 || x[j].abs() <= zero_threshold {
            let h = fd_step(x[j]);
            let mut hi = x.to_vec();
            let mut lo = x.to_vec();
            hi[j] += h;
            lo[j] -= h;
            let fhi = f.eval(&hi);
            let flo = f.eval(&lo);
            for i in 0..m {
                columns[j][i] = (fhi[i] - flo[i]) / (2.0 * h);
            }
        } else {
            let mut dilated = x.to_vec();
            dilated[j] *= qj;
            let shifted = f.eval(&dilated);
            let denom = (1.0 - qj) * x[j];
            for i in 0..m {
                columns[j][i] = (base[i] - shifted[i]) / denom;
            }
        }
    }
    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        for col in columns.iter() {
            data.push(col[i]);
        }
    }
    DenseMatrix::new(m, n, data).map_err(|_| QCalcError::NonFinite)
}

/// The q-shifted power `(x - c)_q^j = prod_{k=0..j-1} (x - q^k c)`,
/// with the empty product equal to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPower {
    pub center: f64,
    pub degree: u32,
}

impl QPower {
    pub fn new(center: f64, degree: u32) -> Self {
        Self { center, degree }
    }

    pub fn eval(&self, x: f64, q: f64) -> f64 {
        let mut acc = 1.0;
        let mut qk = 1.0;
        for _ in 0..self.degree {
            acc *= x - qk * self.center;
            qk *= q;
        }
        acc
    }
}

/// Coefficients of the q-derivative of a polynomial given in ascending
/// order: `D_q (sum a_k x^k) = sum a_k [k] x^(k-1)`.
fn poly_q_derivative(coeffs: &[f64], q: f64) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| {
            let qn = if q == 1.0 {
                k as f64
            } else {
                (q.powi(k as i32) - 1.0) / (q - 1.0)
            };
            a * qn
        })
        .collect()
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// Evaluates the truncated q-Taylor expansion of a polynomial around `c`:
/// `sum_{j=0..degree} (D_q^j f)(c) (x - c)_q^j / [j]!`.
///
/// `coeffs` lists the polynomial coefficients in ascending order. Repeated
/// q-derivatives are taken symbolically on the coefficient list, so for a
/// polynomial of degree at most `degree` the expansion reproduces the
/// polynomial up to rounding.
pub fn q_taylor_eval(
    coeffs: &[f64],
    c: f64,
    q: f64,
    x: f64,
    degree: u32,
) -> Result<f64, QCalcError> {
    check_q(q)?;
    let mut work = coeffs.to_vec();
    let mut sum = 0.0;
    for j in 0..=degree {
        if work.is_empty() {
            break;
        }
        let term = poly_eval(&work, c) * QPower::new(c, j).eval(x, q) / q_factorial(j, q)?;
        sum += term;
        work = poly_q_derivative(&work, q);
    }
    if sum.is_finite() {
        Ok(sum)
    } else {
        Err(QCalcError::NonFinite)
    }
}
