//! Iterative drivers: q-Gauss-Newton, classical Gauss-Newton, and a
//! Nelder-Mead baseline.
//!
//! Each driver records every parameter update in a trace, so experiment
//! tables can be reproduced from a single solve. A solve that dies mid-run
//! (singular system, non-finite values, guard violation) still returns the
//! trace accumulated so far.

use crate::linalg::{solve_gn_step, DenseVector, LinAlgError};
use crate::model::ResidualProblem;
use crate::qcalc::{self, DilationParams, ScalarField};

/// Which Jacobian evaluator the Gauss-Newton drivers use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    /// Use the problem's analytic q-Jacobian when present, numeric otherwise.
    AnalyticIfAvailable,
    /// Always difference the residuals numerically.
    ForceNumeric,
}

/// Quantity compared against `stop_tol` at the end of each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoppingNorm {
    /// Euclidean norm of the last step `h` (the default).
    StepNorm,
    /// Objective value `F(x) = 0.5 ||f(x)||^2` at the new iterate.
    Sse,
}

/// Solver configuration; defaults are `stop_tol = 1e-6`, `max_iter = 100`,
/// `alpha = 1`, analytic Jacobians when available, step-norm stopping.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub stop_tol: f64,
    pub max_iter: usize,
    pub alpha: f64,
    pub jacobian_mode: JacobianMode,
    pub zero_threshold: f64,
    pub stopping_norm: StoppingNorm,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            stop_tol: 1e-6,
            max_iter: 100,
            alpha: 1.0,
            jacobian_mode: JacobianMode::AnalyticIfAvailable,
            zero_threshold: qcalc::DEFAULT_ZERO_THRESHOLD,
            stopping_norm: StoppingNorm::StepNorm,
        }
    }
}

impl SolveConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_stop_tol(mut self, tol: f64) -> Self {
        assert!(tol > 0.0 && tol.is_finite(), "stop_tol must be positive");
        self.stop_tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        assert!(max_iter >= 1, "max_iter must be at least 1");
        self.max_iter = max_iter;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        assert!(alpha > 0.0 && alpha <= 1.0, "alpha must be in (0, 1]");
        self.alpha = alpha;
        self
    }

    pub fn with_jacobian_mode(mut self, mode: JacobianMode) -> Self {
        self.jacobian_mode = mode;
        self
    }

    pub fn with_zero_threshold(mut self, threshold: f64) -> Self {
        assert!(threshold >= 0.0, "zero threshold must be nonnegative");
        self.zero_threshold = threshold;
        self
    }

    pub fn with_stopping_norm(mut self, norm: StoppingNorm) -> Self {
        self.stopping_norm = norm;
        self
    }
}

/// Snapshot taken after parameter update `k` (1-based, no gaps).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// The iterate after the update.
    pub x: Vec<f64>,
    /// Residuals at `x`.
    pub residuals: Vec<f64>,
    /// Objective `0.5 ||residuals||^2` at `x`. Nelder-Mead records the raw
    /// objective value instead (see [`nelder_mead`]).
    pub sse: f64,
    /// `||h||_2` of the step just taken (Nelder-Mead: simplex diameter).
    pub step_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterationsReached,
    SingularSystem,
    NumericalFailure,
    InvalidPoint,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterationsReached => "max_iterations_reached",
            SolveStatus::SingularSystem => "singular_system",
            SolveStatus::NumericalFailure => "numerical_failure",
            SolveStatus::InvalidPoint => "invalid_point",
        }
    }
}

/// Terminal state plus the full iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub final_x: Vec<f64>,
    pub final_sse: f64,
    /// Last value of the configured stopping norm (NaN before any update).
    pub final_norm: f64,
    /// Number of parameter updates performed; equals `trace.len()`.
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

fn sse_of(residuals: &[f64]) -> f64 {
    0.5 * residuals.iter().map(|r| r * r).sum::<f64>()
}

fn finish(
    status: SolveStatus,
    final_x: Vec<f64>,
    final_sse: f64,
    final_norm: f64,
    trace: Vec<IterationRecord>,
) -> SolveResult {
    SolveResult {
        status,
        final_x,
        final_sse,
        final_norm,
        iterations: trace.len(),
        trace,
    }
}

/// The q-Gauss-Newton driver.
///
/// Iterates `x <- x + alpha * h` where `h` solves the least-squares system
/// `J_q h = -f` (equivalently the normal equations `(J_q^T J_q) h = -J_q^T f`
/// for full-rank `J_q`). The q-Jacobian comes from the problem's analytic
/// evaluator when the mode allows and one is attached, otherwise from
/// numeric q-differencing. Stops when the configured norm drops to
/// `stop_tol` or after `max_iter` updates.
pub fn q_gauss_newton(
    problem: &ResidualProblem,
    x0: &[f64],
    q: &DilationParams,
    cfg: &SolveConfig,
) -> SolveResult {
    let n = problem.parameter_count();
    assert_eq!(x0.len(), n, "initial guess length mismatch");
    assert_eq!(q.len(), n, "dilation parameter length mismatch");

    let mut trace: Vec<IterationRecord> = Vec::new();
    if !problem.is_valid_point(x0, q) {
        return finish(
            SolveStatus::InvalidPoint,
            x0.to_vec(),
            f64::NAN,
            f64::NAN,
            trace,
        );
    }
    let mut x = x0.to_vec();
    let mut residuals = problem.eval_residuals(&x);
    if residuals.iter().any(|r| !r.is_finite()) {
        return finish(SolveStatus::NumericalFailure, x, f64::NAN, f64::NAN, trace);
    }
    let mut sse = sse_of(&residuals);
    let mut norm = f64::NAN;

    for k in 1..=cfg.max_iter {
        let jacobian = if cfg.jacobian_mode == JacobianMode::AnalyticIfAvailable
            && problem.has_analytic_q_jacobian()
        {
            match problem.analytic_q_jacobian(&x, q) {
                Some(Ok(j)) => j,
                _ => return finish(SolveStatus::NumericalFailure, x, sse, norm, trace),
            }
        } else {
            match qcalc::q_jacobian_with(problem.residuals(), &x, q, cfg.zero_threshold) {
                Ok(j) => j,
                Err(_) => return finish(SolveStatus::NumericalFailure, x, sse, norm, trace),
            }
        };
        let f = DenseVector::new(residuals.clone()).expect("residuals already checked finite");
        let h = match solve_gn_step(&jacobian, &f) {
            Ok(h) => h,
            Err(LinAlgError::RankDeficient { .. }) => {
                return finish(SolveStatus::SingularSystem, x, sse, norm, trace)
            }
            Err(_) => return finish(SolveStatus::NumericalFailure, x, sse, norm, trace),
        };
        let step_norm = h.norm();
        let x_new: Vec<f64> = x
            .iter()
            .zip(h.as_slice())
            .map(|(xi, hi)| xi + cfg.alpha * hi)
            .collect();
        if !problem.is_valid_point(&x_new, q) {
            return finish(SolveStatus::InvalidPoint, x, sse, norm, trace);
        }
        let res_new = problem.eval_residuals(&x_new);
        if res_new.iter().any(|r| !r.is_finite()) {
            return finish(SolveStatus::NumericalFailure, x, sse, norm, trace);
        }
        let sse_new = sse_of(&res_new);
        trace.push(IterationRecord {
            k,
            x: x_new.clone(),
            residuals: res_new.clone(),
            sse: sse_new,
            step_norm,
        });
        x = x_new;
        residuals = res_new;
        sse = sse_new;
        norm = match cfg.stopping_norm {
            StoppingNorm::StepNorm => step_norm,
            StoppingNorm::Sse => sse_new,
        };
        if norm <= cfg.stop_tol {
            return finish(SolveStatus::Converged, x, sse, norm, trace);
        }
    }
    finish(SolveStatus::MaxIterationsReached, x, sse, norm, trace)
}

/// Classical Gauss-Newton: [`q_gauss_newton`] with every dilation pinned to
/// one, provided as a named entry point for comparison runs.
pub fn gauss_newton(problem: &ResidualProblem, x0: &[f64], cfg: &SolveConfig) -> SolveResult {
    let ones =
        DilationParams::uniform(1.0, problem.parameter_count()).expect("unit dilation is valid");
    q_gauss_newton(problem, x0, &ones, cfg)
}

/// Nelder-Mead simplex minimization of a scalar field.
///
/// Standard coefficients: reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5. The initial simplex perturbs each coordinate of `x0` by 5%
/// (or 0.00025 for zero coordinates). Stops when both the simplex diameter
/// and the value spread drop to `stop_tol`.
///
/// The returned trace reuses [`IterationRecord`] with `residuals = [f(x)]`
/// and `sse` holding the raw objective value at the best vertex;
/// `step_norm` is the simplex diameter.
pub fn nelder_mead(f: &ScalarField, x0: &[f64], cfg: &SolveConfig) -> SolveResult {
    let n = f.dim();
    assert_eq!(x0.len(), n, "initial guess length mismatch");

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] = if v[i] == 0.0 { 0.00025 } else { v[i] * 1.05 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    for v in &simplex {
        let fv = f.eval(v);
        if !fv.is_finite() {
            return finish(
                SolveStatus::NumericalFailure,
                x0.to_vec(),
                f64::NAN,
                f64::NAN,
                vec![],
            );
        }
        values.push(fv);
    }

    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut diameter = f64::NAN;

    for k in 1..=cfg.max_iter {
        // Order so that index 0 is the best vertex.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalued: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalued;

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|v| v[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let point_at = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = point_at(1.0);
        let fr = f.eval(&reflected);
        let mut accepted: Option<(Vec<f64>, f64)> = None;
        if fr.is_finite() && fr < values[0] {
            let expanded = point_at(2.0);
            let fe = f.eval(&expanded);
            accepted = if fe.is_finite() && fe < fr {
                Some((expanded, fe))
            } else {
                Some((reflected, fr))
            };
        } else if fr.is_finite() && fr < values[n - 1] {
            accepted = Some((reflected, fr));
        } else {
            let (contracted, fc) = if fr.is_finite() && fr < values[n] {
                let outside = point_at(0.5);
                let fv = f.eval(&outside);
                (outside, fv)
            } else {
                let inside = point_at(-0.5);
                let fv = f.eval(&inside);
                (inside, fv)
            };
            if !fc.is_finite() {
                return finish(
                    SolveStatus::NumericalFailure,
                    simplex[0].clone(),
                    values[0],
                    diameter,
                    trace,
                );
            }
            if fc < values[n].min(fr) {
                accepted = Some((contracted, fc));
            }
        }

        match accepted {
            Some((point, value)) => {
                simplex[n] = point;
                values[n] = value;
            }
            None => {
                // Shrink every vertex toward the best one.
                let best = simplex[0].clone();
                for i in 1..=n {
                    for d in 0..n {
                        simplex[i][d] = best[d] + 0.5 * (simplex[i][d] - best[d]);
                    }
                    let fv = f.eval(&simplex[i]);
                    if !fv.is_finite() {
                        return finish(
                            SolveStatus::NumericalFailure,
                            best,
                            values[0],
                            diameter,
                            trace,
                        );
                    }
                    values[i] = fv;
                }
            }
        }

        let best_idx = (0..=n)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .unwrap();
        let best = simplex[best_idx].clone();
        let best_value = values[best_idx];
        diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&best)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        let spread = values
            .iter()
            .map(|v| (v - best_value).abs())
            .fold(0.0, f64::max);
        trace.push(IterationRecord {
            k,
            x: best.clone(),
            residuals: vec![best_value],
            sse: best_value,
            step_norm: diameter,
        });
        if diameter <= cfg.stop_tol && spread <= cfg.stop_tol {
            return finish(SolveStatus::Converged, best, best_value, diameter, trace);
        }
    }

    let best_idx = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    finish(
        SolveStatus::MaxIterationsReached,
        simplex[best_idx].clone(),
        values[best_idx],
        diameter,
        trace,
    )
}
