//! Lawson–Hanson active-set NNLS on the normal equations.

use nalgebra::{DMatrix, DVector};

/// Minimises `|A c - y|` over `c >= 0` given `G = A^T A` and `b = A^T y`.
pub(crate) fn nnls_normal(g: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> DVector<f64> {
    let n = b.len();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        let w = b - g * &x;
        let next = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = next else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let z = solve_restricted(g, b, &idx);
            if idx.iter().all(|&k| z[k] > 0.0) {
                x = z;
                break;
            }
            let alpha = idx
                .iter()
                .filter(|&&k| z[k] <= 0.0)
                .map(|&k| x[k] / (x[k] - z[k]))
                .fold(f64::INFINITY, f64::min);
            x = &x + (z - &x) * alpha;
            for &k in &idx {
                if x[k] <= tol {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
        }
    }
    x
}

/// Least squares restricted to the columns in `idx`, zero elsewhere.
fn solve_restricted(g: &DMatrix<f64>, b: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    let k = idx.len();
    let mut z = DVector::zeros(b.len());
    if k == 0 {
        return z;
    }
    let gs = DMatrix::from_fn(k, k, |r, c| g[(idx[r], idx[c])]);
    let bs = DVector::from_fn(k, |r, _| b[idx[r]]);
    let sol = gs.svd(true, true).solve(&bs, 1e-14).expect("svd computed with u and v");
    for (r, &i) in idx.iter().enumerate() {
        z[i] = sol[r];
    }
    z
}
