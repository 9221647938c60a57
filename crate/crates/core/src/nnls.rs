//! Nonnegative least squares (Lawson–Hanson active set).

use nalgebra::{DMatrix, DVector};

/// `argmin ‖A w − b‖₂` subject to `w ≥ 0`, with the residual norm.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = a.ncols();
    let mut w = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let grad = a.transpose() * (b - a * &w);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && grad[j] > tol)
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(j) = candidate else {
            break;
        };
        passive[j] = true;

        loop {
            let cols: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let z = solve_restricted(a, b, &cols);
            if z.iter().all(|&v| v > 0.0) {
                for (k, &c) in cols.iter().enumerate() {
                    w[c] = z[k];
                }
                break;
            }
            // Step toward z until the first passive weight reaches zero.
            let mut alpha = 1.0_f64;
            for (k, &c) in cols.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = w[c] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(w[c] / denom);
                    }
                }
            }
            for (k, &c) in cols.iter().enumerate() {
                w[c] += alpha * (z[k] - w[c]);
                if w[c] <= tol {
                    w[c] = 0.0;
                    passive[c] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let residual = (a * &w - b).norm();
    (w, residual)
}

fn solve_restricted(a: &DMatrix<f64>, b: &DVector<f64>, cols: &[usize]) -> DVector<f64> {
    let sub = DMatrix::from_fn(a.nrows(), cols.len(), |i, k| a[(i, cols[k])]);
    sub.svd(true, true)
        .solve(b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(cols.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_nonnegative_solution_is_recovered() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![0.3, 0.7, 1.0]);
        let (w, r) = nnls(&a, &b);
        assert!(r < 1e-12);
        assert!((w[0] - 0.3).abs() < 1e-12 && (w[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn negative_unconstrained_solution_is_clipped() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![-1.0, 2.0]);
        let (w, r) = nnls(&a, &b);
        assert_eq!(w[0], 0.0);
        assert!((w[1] - 2.0).abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-12);
    }
}
