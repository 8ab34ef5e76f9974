//! Shared helpers for the integration suites: a seeded PRNG and the
//! independent oracles the tests check against.

#![allow(dead_code)]

use qgn::qcalc::{ScalarField, VectorField};

/// xorshift64* PRNG; deterministic for a fixed seed.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Horner evaluation of ascending coefficients.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// Random polynomial of degree up to `max_degree` with coefficients in
/// [lo, hi].
pub fn random_poly(rng: &mut Rng, max_degree: usize, lo: f64, hi: f64) -> Vec<f64> {
    let degree = rng.index(max_degree + 1);
    (0..=degree).map(|_| rng.uniform(lo, hi)).collect()
}

/// Wraps polynomial coefficients as a univariate scalar field.
pub fn poly_field(coeffs: Vec<f64>) -> ScalarField {
    ScalarField::new(1, move |x| poly_eval(&coeffs, x[0]))
}

/// Central-difference Jacobian with step `h_scale * max(1, |x_j|)`;
/// independent of the implementation's differencing.
pub fn fd_jacobian(f: &VectorField, x: &[f64], h_scale: f64) -> Vec<Vec<f64>> {
    let (n, m) = (f.dim_in(), f.dim_out());
    let mut rows = vec![vec![0.0; n]; m];
    for j in 0..n {
        let h = h_scale * x[j].abs().max(1.0);
        let mut hi = x.to_vec();
        let mut lo = x.to_vec();
        hi[j] += h;
        lo[j] -= h;
        let fhi = f.eval(&hi);
        let flo = f.eval(&lo);
        for i in 0..m {
            rows[i][j] = (fhi[i] - flo[i]) / (2.0 * h);
        }
    }
    rows
}

/// Gaussian elimination with partial pivoting; `None` when a pivot falls
/// below `min_pivot`.
pub fn gauss_solve_min(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, min_pivot: f64) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let pivot_row = (k..n).max_by(|&p, &q| a[p][k].abs().total_cmp(&a[q][k].abs()))?;
        if a[pivot_row][k].abs() < min_pivot {
            return None;
        }
        a.swap(k, pivot_row);
        b.swap(k, pivot_row);
        let pivot = a[k].clone();
        for i in k + 1..n {
            let factor = a[i][k] / pivot[k];
            for (aij, pj) in a[i].iter_mut().zip(&pivot).skip(k) {
                *aij -= factor * pj;
            }
            b[i] -= factor * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    Some(x)
}

pub fn gauss_solve(a: Vec<Vec<f64>>, b: Vec<f64>) -> Option<Vec<f64>> {
    gauss_solve_min(a, b, 1e-10)
}

/// Explicit normal-equations oracle: solves `(J^T J) h = -J^T f` by
/// Gaussian elimination on the formed system. Rejects systems whose
/// elimination pivots fall below `min_pivot`, which keeps the comparison
/// meaningful on well-conditioned draws.
pub fn normal_equations_solve(j_rows: &[Vec<f64>], f: &[f64], min_pivot: f64) -> Option<Vec<f64>> {
    let m = j_rows.len();
    let n = j_rows[0].len();
    let mut jtj = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for c in 0..n {
        for d in 0..n {
            jtj[c][d] = (0..m).map(|i| j_rows[i][c] * j_rows[i][d]).sum();
        }
        rhs[c] = -(0..m).map(|i| j_rows[i][c] * f[i]).sum::<f64>();
    }
    gauss_solve_min(jtj, rhs, min_pivot)
}
