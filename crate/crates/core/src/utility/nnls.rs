//! Ridge-regularized nonnegative least squares (Lawson-Hanson active set).

use nalgebra::{DMatrix, DVector};

pub const TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `‖Ax − b‖² + λ‖x‖²` subject to `x ≥ 0`.
pub fn ridge_nnls(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> Solution {
    let (m, n) = a.shape();
    let mut aug = DMatrix::zeros(m + n, n);
    aug.view_mut((0, 0), (m, n)).copy_from(a);
    let root = lambda.max(0.0).sqrt();
    for j in 0..n {
        aug[(m + j, j)] = root;
    }
    let mut rhs = DVector::zeros(m + n);
    rhs.rows_mut(0, m).copy_from(b);
    nnls(&aug, &rhs)
}

/// Minimizes `‖Ax − b‖²` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Solution {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let scale = (a.transpose() * b).amax().max(1.0);
    let tol = TOLERANCE * scale;
    let mut iterations = 0;
    loop {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|j| !passive[*j]).max_by(|i, j| w[*i].total_cmp(&w[*j]));
        let Some(j) = candidate.filter(|j| w[*j] > tol) else {
            return Solution { x, iterations, converged: true };
        };
        passive[j] = true;
        loop {
            iterations += 1;
            if iterations > MAX_ITERATIONS {
                return Solution { x, iterations, converged: false };
            }
            let s = solve_passive(a, b, &passive);
            if (0..n).all(|i| !passive[i] || s[i] > 0.0) {
                x = s;
                break;
            }
            // step from x toward s until the first passive coordinate hits zero
            let alpha = (0..n)
                .filter(|i| passive[*i] && s[*i] <= 0.0)
                .map(|i| x[i] / (x[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            x += (&s - &x) * alpha;
            for i in 0..n {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
}

/// Unconstrained least squares restricted to the passive columns.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|j| passive[*j]).collect();
    let sub = a.select_columns(&cols);
    let gram = sub.transpose() * &sub;
    let rhs = sub.transpose() * b;
    let z = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => sub
            .svd(true, true)
            .solve(b, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(cols.len())),
    };
    let mut s = DVector::zeros(passive.len());
    for (k, j) in cols.iter().enumerate() {
        s[*j] = z[k];
    }
    s
}
