//! Dense least-squares solves for output weights.

use nalgebra::DMatrix;

pub(crate) struct Solution {
    pub beta: DMatrix<f64>,
    pub rank_deficient: bool,
    pub flops: u64,
}

/// Solve `min ||H b - T||^2 + lambda ||b||^2`.
///
/// `lambda > 0`: Cholesky on the regularised normal equations (SVD if the
/// factorisation fails). `lambda = 0`: minimum-norm solution through the
/// SVD of `H` with singular values below `eps * max(n, L) * s_max` dropped.
pub(crate) fn ridge_solve(h: &DMatrix<f64>, t: &DMatrix<f64>, lambda: f64) -> Solution {
    let (n, l) = h.shape();
    let m = t.ncols();
    let (n64, l64, m64) = (n as u64, l as u64, m as u64);
    if lambda > 0.0 {
        let mut gram = h.transpose() * h;
        for i in 0..l {
            gram[(i, i)] += lambda;
        }
        let rhs = h.transpose() * t;
        let base = n64 * l64 * l64 + n64 * l64 * m64 + l64;
        if let Some(chol) = gram.cholesky() {
            return Solution {
                beta: chol.solve(&rhs),
                rank_deficient: false,
                flops: base + l64 * l64 * l64 / 3 + 2 * l64 * l64 * m64,
            };
        }
        // Augmented system [H; sqrt(lambda) I] keeps the ridge exact.
        let mut aug = DMatrix::zeros(n + l, l);
        aug.rows_mut(0, n).copy_from(h);
        for i in 0..l {
            aug[(n + i, i)] = lambda.sqrt();
        }
        let mut taug = DMatrix::zeros(n + l, m);
        taug.rows_mut(0, n).copy_from(t);
        let mut s = min_norm(&aug, &taug);
        s.flops += base;
        return s;
    }
    min_norm(h, t)
}

fn min_norm(h: &DMatrix<f64>, t: &DMatrix<f64>) -> Solution {
    let (n, l) = h.shape();
    let m = t.ncols() as u64;
    let svd = h.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = f64::EPSILON * n.max(l) as f64 * smax;
    let rank = svd.rank(eps);
    let beta = svd
        .solve(t, eps)
        .unwrap_or_else(|_| DMatrix::zeros(l, t.ncols()));
    let (n64, l64) = (n as u64, l as u64);
    Solution {
        beta,
        rank_deficient: rank < l,
        // Golub–Van Loan R-SVD estimate plus the pseudo-inverse product.
        flops: 4 * n64 * l64 * l64 + 22 * l64 * l64 * l64 + 2 * n64 * l64 * m,
    }
}
