//! Thin wrappers over faer's dense factorizations.

use faer::{Mat, MatRef};

use crate::C64;

#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("singular value decomposition did not converge")]
    Svd,
    #[error("generalized eigenvalue solver failed: {0}")]
    Eigen(String),
}

/// Right singular vector belonging to the smallest singular value.
///
/// With repeated smallest singular values the last column of `V` is returned.
pub fn min_right_singular_vector(a: MatRef<'_, C64>) -> Result<Vec<C64>, LinalgError> {
    let n = a.ncols();
    let svd = if a.nrows() >= n {
        // Reduce to the square triangular factor first; cheaper for tall input.
        let r = a.qr().thin_R().to_owned();
        r.svd().map_err(|_| LinalgError::Svd)?
    } else {
        a.svd().map_err(|_| LinalgError::Svd)?
    };
    let v = svd.V();
    Ok((0..n).map(|i| v[(i, n - 1)]).collect())
}

/// Generalized eigenvalues of the pencil `(a, b)` as `(alpha, beta)` pairs,
/// eigenvalue `alpha / beta`.
pub fn generalized_eigenvalues(
    a: MatRef<'_, C64>,
    b: MatRef<'_, C64>,
) -> Result<Vec<(C64, C64)>, LinalgError> {
    let gevd = a.generalized_eigen(b).map_err(|e| LinalgError::Eigen(format!("{e:?}")))?;
    let (sa, sb) = (gevd.S_a(), gevd.S_b());
    Ok((0..a.nrows())
        .map(|i| (sa.column_vector()[i], sb.column_vector()[i]))
        .collect())
}

/// Solution of a dense least-squares problem with rank truncation.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    pub rank: usize,
    /// `|R_00|` of the column-scaled factorization.
    pub max_pivot: f64,
    /// `|R_{r-1,r-1}|`, the smallest retained pivot.
    pub min_pivot: f64,
}

/// Minimizes `‖A x − b‖₂` by QR with column pivoting on the column-scaled
/// matrix.
///
/// Columns are scaled to unit norm. Pivots `|R_kk| ≤ max(m, n)·ε·|R_00|` end
/// the factorization and the remaining (permuted) unknowns are set to zero,
/// giving a basic solution.
pub fn lstsq_truncated(a: MatRef<'_, f64>, b: &[f64]) -> LeastSquares {
    let (m, n) = a.shape();
    assert_eq!(m, b.len(), "right-hand side length");
    if n == 0 || m == 0 {
        return LeastSquares { x: vec![0.0; n], rank: 0, max_pivot: 0.0, min_pivot: 0.0 };
    }
    let col_scale: Vec<f64> = (0..n)
        .map(|j| {
            let norm = a.col(j).norm_l2();
            if norm > 0.0 && norm.is_finite() { 1.0 / norm } else { 1.0 }
        })
        .collect();
    let scaled = Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)] * col_scale[j]);
    let rhs = Mat::<f64>::from_fn(m, 1, |i, _| b[i]);
    let qr = scaled.col_piv_qr();
    let r = qr.thin_R();
    let projected = qr.compute_thin_Q().transpose() * &rhs;
    let size = m.min(n);
    let max_pivot = r[(0, 0)].abs();
    let cutoff = m.max(n) as f64 * f64::EPSILON * max_pivot;
    let rank = (0..size).take_while(|&k| r[(k, k)].abs() > cutoff).count();
    let mut y = vec![0.0; n];
    for k in (0..rank).rev() {
        let mut s = projected[(k, 0)];
        for j in k + 1..rank {
            s -= r[(k, j)] * y[j];
        }
        y[k] = s / r[(k, k)];
    }
    let (_, inverse) = qr.P().arrays();
    let x = (0..n).map(|i| y[inverse[i]] * col_scale[i]).collect();
    LeastSquares { x, rank, max_pivot, min_pivot: if rank > 0 { r[(rank - 1, rank - 1)].abs() } else { 0.0 } }
}
