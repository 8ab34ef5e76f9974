//! Nonlinear least squares with Jackson q-calculus derivatives.
//!
//! The crate provides three layers:
//!
//! * [`qcalc`] — q-analog numbers, the Jackson q-derivative and its
//!   multivariate forms (q-partials, q-gradient, q-Jacobian), and truncated
//!   q-Taylor evaluation for polynomials. The dilation parameter `q` lives in
//!   `(0, 1]`; `q = 1` is the sentinel for classical calculus.
//! * [`model`] + [`solver`] — residual problems `f: R^n -> R^m` (`m >= n`),
//!   the classical Gauss-Newton driver, its q-Jacobian variant, and a
//!   Nelder-Mead baseline. Every solve returns a full iteration trace.
//! * [`exprparse`] + [`cli`] — an arithmetic-expression parser so residuals
//!   can be supplied as text, and the command-line harness (`solve`, `sweep`,
//!   `compare-nm`) that emits per-iteration tables in CSV/JSON/plain form.
//!
//! Dense vector/matrix support lives in [`linalg`]; the Gauss-Newton step is
//! solved by Householder QR rather than explicit normal equations.

pub mod cli;
pub mod exprparse;
pub mod linalg;
pub mod model;
pub mod qcalc;
pub mod solver;

pub use linalg::{DenseMatrix, DenseVector};
pub use model::{evaluate_objective, ObjectiveValue, ResidualProblem};
pub use qcalc::{DilationParams, ScalarField, VectorField};
pub use solver::{
    gauss_newton, nelder_mead, q_gauss_newton, IterationRecord, JacobianMode, SolveConfig,
    SolveResult, SolveStatus, StoppingNorm,
};
