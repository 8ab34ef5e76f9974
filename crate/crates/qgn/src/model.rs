//! Residual problems and the built-in example set.
//!
//! A [`ResidualProblem`] bundles a residual map `f: R^n -> R^m` with an
//! optional analytic q-Jacobian and an optional domain guard. The objective
//! minimized by the solvers is the half sum of squared residuals
//! `F(x) = 0.5 ||f(x)||^2`.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{DenseMatrix, DenseVector};
use crate::qcalc::{DilationParams, VectorField, DEFAULT_ZERO_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// The domain guard rejected the evaluation point.
    InvalidPoint,
    /// Residual or Jacobian evaluation produced NaN or an infinity.
    NonFinite,
    /// An argument length did not match the problem dimension.
    DimensionMismatch { expected: usize, actual: usize },
    /// A residual problem needs at least as many residuals as parameters.
    Underdetermined { residuals: usize, parameters: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidPoint => write!(f, "point rejected by the problem domain guard"),
            ModelError::NonFinite => write!(f, "evaluation produced a non-finite value"),
            ModelError::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            ModelError::Underdetermined {
                residuals,
                parameters,
            } => {
                write!(
                    f,
                    "{residuals} residuals cannot determine {parameters} parameters"
                )
            }
        }
    }
}

impl std::error::Error for ModelError {}

/// Analytic q-Jacobian evaluator: rows of the `m x n` matrix at `(x, q)`.
pub type QJacobianFn = Arc<dyn Fn(&[f64], &DilationParams) -> Vec<Vec<f64>> + Send + Sync>;

/// Domain guard: returns false when `x` (or its q-dilated image) must not
/// be evaluated.
pub type DomainGuardFn = Arc<dyn Fn(&[f64], &DilationParams) -> bool + Send + Sync>;

/// A nonlinear least-squares problem with `m >= n`.
#[derive(Clone)]
pub struct ResidualProblem {
    name: String,
    residuals: VectorField,
    analytic_q_jacobian: Option<QJacobianFn>,
    domain_guard: Option<DomainGuardFn>,
}

impl ResidualProblem {
    pub fn new(name: impl Into<String>, residuals: VectorField) -> Result<Self, ModelError> {
        if residuals.dim_out() < residuals.dim_in() {
            return Err(ModelError::Underdetermined {
                residuals: residuals.dim_out(),
                parameters: residuals.dim_in(),
            });
        }
        Ok(Self {
            name: name.into(),
            residuals,
            analytic_q_jacobian: None,
            domain_guard: None,
        })
    }

    pub fn with_analytic_q_jacobian(
        mut self,
        jac: impl Fn(&[f64], &DilationParams) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.analytic_q_jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_domain_guard(
        mut self,
        guard: impl Fn(&[f64], &DilationParams) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.domain_guard = Some(Arc::new(guard));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Parameter dimension `n`.
    pub fn parameter_count(&self) -> usize {
        self.residuals.dim_in()
    }

    /// Residual dimension `m`.
    pub fn residual_count(&self) -> usize {
        self.residuals.dim_out()
    }

    pub fn residuals(&self) -> &VectorField {
        &self.residuals
    }

    pub fn eval_residuals(&self, x: &[f64]) -> Vec<f64> {
        self.residuals.eval(x)
    }

    /// True when the guard (if any) admits `x` under dilation `q`.
    pub fn is_valid_point(&self, x: &[f64], q: &DilationParams) -> bool {
        self.domain_guard.as_ref().is_none_or(|g| g(x, q))
    }

    pub fn has_analytic_q_jacobian(&self) -> bool {
        self.analytic_q_jacobian.is_some()
    }

    /// Evaluates the analytic q-Jacobian when one is attached.
    pub fn analytic_q_jacobian(
        &self,
        x: &[f64],
        q: &DilationParams,
    ) -> Option<Result<DenseMatrix, ModelError>> {
        self.analytic_q_jacobian
            .as_ref()
            .map(|jac| DenseMatrix::from_rows(&jac(x, q)).map_err(|_| ModelError::NonFinite))
    }
}

impl fmt::Debug for ResidualProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResidualProblem")
            .field("name", &self.name)
            .field("n", &self.parameter_count())
            .field("m", &self.residual_count())
            .field("analytic_q_jacobian", &self.analytic_q_jacobian.is_some())
            .field("domain_guard", &self.domain_guard.is_some())
            .finish()
    }
}

/// Residual vector and objective value at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue {
    /// `F(x) = 0.5 * sum of squared residuals`.
    pub sse: f64,
    pub residuals: DenseVector,
}

/// Evaluates residuals and the objective `F(x) = 0.5 ||f(x)||^2` at `x`.
pub fn evaluate_objective(
    problem: &ResidualProblem,
    x: &[f64],
) -> Result<ObjectiveValue, ModelError> {
    let n = problem.parameter_count();
    if x.len() != n {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    // The undilated guard check: q = 1 leaves dilated coordinates in place.
    let ones = DilationParams::uniform(1.0, n).expect("unit dilation is valid");
    if !problem.is_valid_point(x, &ones) {
        return Err(ModelError::InvalidPoint);
    }
    let values = problem.eval_residuals(x);
    let residuals = DenseVector::new(values).map_err(|_| ModelError::NonFinite)?;
    let sse = 0.5 * residuals.as_slice().iter().map(|r| r * r).sum::<f64>();
    Ok(ObjectiveValue { sse, residuals })
}

/// Scalar problem `f(x) = 2 - (e^(-x^2) + 2 e^(-(x-3)^2))` whose global
/// minimum sits just left of `x = 3`.
pub fn builtin_example1() -> ResidualProblem {
    let residuals = VectorField::new(1, 1, |x| {
        vec![2.0 - ((-x[0] * x[0]).exp() + 2.0 * (-(x[0] - 3.0) * (x[0] - 3.0)).exp())]
    });
    ResidualProblem::new("example1", residuals)
        .expect("example1 dimensions are valid")
        .with_analytic_q_jacobian(|x, q| {
            let (x0, q0) = (x[0], q.get(0));
            let entry = if q0 == 1.0 || x0.abs() <= DEFAULT_ZERO_THRESHOLD {
                2.0 * x0 * (-x0 * x0).exp() + 4.0 * (x0 - 3.0) * (-(x0 - 3.0) * (x0 - 3.0)).exp()
            } else {
                let qx = q0 * x0;
                (-(-x0 * x0).exp() + (-qx * qx).exp() - 2.0 * (-(x0 - 3.0) * (x0 - 3.0)).exp()
                    + 2.0 * (-(qx - 3.0) * (qx - 3.0)).exp())
                    / ((1.0 - q0) * x0)
            };
            vec![vec![entry]]
        })
}

/// Powell's two-residual problem `f = (x1, 10 x1 / (x1 + 0.1) + 2 x2^2)`
/// with the unique solution at the origin and a pole at `x1 = -0.1`.
///
/// The guard also rejects points whose dilated first coordinate `q x1`
/// lands on the pole, since q-derivative evaluation samples there.
pub fn builtin_example2() -> ResidualProblem {
    let residuals = VectorField::new(2, 2, |x| {
        vec![x[0], 10.0 * x[0] / (x[0] + 0.1) + 2.0 * x[1] * x[1]]
    });
    ResidualProblem::new("example2", residuals)
        .expect("example2 dimensions are valid")
        .with_domain_guard(|x, q| {
            (x[0] + 0.1).abs() > DEFAULT_ZERO_THRESHOLD
                && (q.get(0) * x[0] + 0.1).abs() > DEFAULT_ZERO_THRESHOLD
        })
        .with_analytic_q_jacobian(|x, q| {
            // The closed form 1 / ((x1 + 0.1)(q x1 + 0.1)) and 2 (1 + q) x2
            // remains valid at q = 1 and at zero coordinates.
            let (x1, x2) = (x[0], x[1]);
            let (q1, q2) = (q.get(0), q.get(1));
            vec![
                vec![1.0, 0.0],
                vec![1.0 / ((x1 + 0.1) * (q1 * x1 + 0.1)), 2.0 * (1.0 + q2) * x2],
            ]
        })
}

/// Overdetermined problem `f = (x1 - 0.4, x2 - 8, x1^2 + x2^2 - 1)` with
/// nonzero residuals at the optimum.
pub fn builtin_example3() -> ResidualProblem {
    let residuals = VectorField::new(2, 3, |x| {
        vec![x[0] - 0.4, x[1] - 8.0, x[0] * x[0] + x[1] * x[1] - 1.0]
    });
    ResidualProblem::new("example3", residuals)
        .expect("example3 dimensions are valid")
        .with_analytic_q_jacobian(|x, q| {
            vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![(1.0 + q.get(0)) * x[0], (1.0 + q.get(1)) * x[1]],
            ]
        })
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["example1", "example2", "example3"];

/// Looks up a built-in problem by name.
pub fn builtin(name: &str) -> Option<ResidualProblem> {
    match name {
        "example1" => Some(builtin_example1()),
        "example2" => Some(builtin_example2()),
        "example3" => Some(builtin_example3()),
        _ => None,
    }
}
