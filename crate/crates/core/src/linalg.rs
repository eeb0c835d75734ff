//! Dense kernels shared by the LP modules.
//!
//! The rank-revealing factorization is a Householder QR with greedy column
//! pivoting (Businger–Golub). It is written out here rather than taken from
//! nalgebra because callers need the pivot order itself, not only the factors.

use nalgebra::{DMatrix, DVector};

/// Result of a column-pivoted QR factorization `M P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// Column indices of `M` in pivot order.
    pub pivots: Vec<usize>,
    /// Absolute values of the diagonal of `R`, in pivot order.
    pub r_diag: Vec<f64>,
}

impl PivotedQr {
    /// Number of diagonal entries of `R` strictly above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.r_diag.iter().take_while(|d| **d > tol).count()
    }
}

/// Householder QR with column pivoting on a copy of `m`.
pub fn pivoted_qr(m: &DMatrix<f64>) -> PivotedQr {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut pivots: Vec<usize> = (0..cols).collect();
    let mut norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm_squared()).collect();
    let steps = rows.min(cols);
    let mut r_diag = Vec::with_capacity(steps);

    for k in 0..steps {
        // Recompute trailing norms exactly; the matrices here are small and
        // downdating loses accuracy exactly where rank decisions are made.
        for j in k..cols {
            norms[j] = a.view((k, j), (rows - k, 1)).norm_squared();
        }
        let (best, _) = (k..cols).fold((k, -1.0), |(bi, bv), j| {
            if norms[j] > bv {
                (j, norms[j])
            } else {
                (bi, bv)
            }
        });
        if best != k {
            a.swap_columns(k, best);
            pivots.swap(k, best);
            norms.swap(k, best);
        }

        let mut v: DVector<f64> = a.view((k, k), (rows - k, 1)).column(0).into_owned();
        let alpha = v.norm();
        r_diag.push(alpha);
        if alpha == 0.0 {
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vnorm2 = v.norm_squared();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..cols {
            let mut col = a.view_mut((k, j), (rows - k, 1));
            let dot = v.dot(&col.column(0));
            let scale = 2.0 * dot / vnorm2;
            for i in 0..rows - k {
                col[(i, 0)] -= scale * v[i];
            }
        }
    }

    PivotedQr { pivots, r_diag }
}

/// Largest singular value of `m` (0 for an empty matrix).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(*s))
}

/// Rank threshold `eps * max(rows, cols) * sigma_max(m)`.
pub fn rank_tolerance(m: &DMatrix<f64>) -> f64 {
    f64::EPSILON * m.nrows().max(m.ncols()) as f64 * spectral_norm(m)
}

/// Numerical rank via pivoted QR at [`rank_tolerance`].
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    pivoted_qr(m).rank(rank_tolerance(m))
}

/// 2-norm condition number of a square matrix (`inf` when singular).
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(0.0_f64, |a, s| a.max(*s));
    let min = sv.iter().fold(f64::INFINITY, |a, s| a.min(*s));
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Orthonormal basis of `{v}^⊥` as the columns of an `n x (n-1)` matrix,
/// taken from the Householder reflector that maps `v` onto a multiple of `e_1`.
pub fn orthogonal_complement(v: &DVector<f64>) -> Option<DMatrix<f64>> {
    let n = v.len();
    let norm = v.norm();
    if n == 0 || norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let mut u = v.clone();
    let sign = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    u[0] += sign * norm;
    let unorm2 = u.norm_squared();
    let h = DMatrix::<f64>::identity(n, n) - (&u * u.transpose()) * (2.0 / unorm2);
    Some(h.columns(1, n - 1).into_owned())
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

pub fn matrix_inf_entry(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Gathers the listed columns of `m`.
pub fn select_columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

/// Gathers the listed rows of `m`.
pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

pub fn select_entries(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivoted_qr_detects_duplicate_column() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 1.0, 1.0, 2.0, 1.0]);
        assert_eq!(numerical_rank(&m), 1);
        let qr = pivoted_qr(&m);
        assert_eq!(qr.pivots[0], 1);
    }

    #[test]
    fn rank_of_identity() {
        assert_eq!(numerical_rank(&DMatrix::identity(4, 4)), 4);
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 2)), 0);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let v = DVector::from_vec(vec![3.0, -1.0, 2.0, 0.5]);
        let n = orthogonal_complement(&v).unwrap();
        assert_eq!(n.shape(), (4, 3));
        assert!((n.transpose() * &v).norm() < 1e-12);
        let gram = n.transpose() * &n;
        assert!((gram - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn condition_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 100.0]));
        assert!((condition_number(&m) - 100.0).abs() < 1e-9);
    }
}
