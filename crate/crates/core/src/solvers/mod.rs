//! Interior-point and simplex solvers plus the KKT and normal-matrix probes.

mod ipm;
mod simplex;

pub use ipm::{solve_ipm, IpmOptions, IpmResult};
pub(crate) use simplex::solve_raw;
pub use simplex::{
    solve_simplex, PivotRule, SimplexResult, SimplexStatus, SimplexVariant,
    ITERATION_CAP_PER_COLUMN,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{FacetError, Result};
use crate::lp::StandardFormLP;

/// Relative primal feasibility, relative dual feasibility and mean complementarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kkt {
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl Kkt {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.complementarity.abs())
    }
}

/// `( ||Ax-b||/(1+||b||), ||A^T y + s - c||/(1+||c||), <x,s>/n )`.
pub fn kkt_residuals(
    lp: &StandardFormLP,
    x: &DVector<f64>,
    y: &DVector<f64>,
    s: &DVector<f64>,
) -> Kkt {
    let primal = (&lp.a * x - &lp.b).norm() / (1.0 + lp.b.norm());
    let dual = (lp.a.tr_mul(y) + s - &lp.c).norm() / (1.0 + lp.c.norm());
    let complementarity = x.dot(s) / lp.n() as f64;
    Kkt {
        primal,
        dual,
        complementarity,
    }
}

/// `A Diag(x) Diag(s)^-1 A^T`.
pub fn normal_matrix(a: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = a.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= d[j].sqrt();
    }
    &scaled * scaled.transpose()
}

/// Ratio of extreme eigenvalues of the normal matrix; `+inf` when the
/// smallest eigenvalue is not positive.
pub fn normal_matrix_condition(a: &DMatrix<f64>, x: &DVector<f64>, s: &DVector<f64>) -> Result<f64> {
    if x.len() != a.ncols() || s.len() != a.ncols() {
        return Err(FacetError::DimensionMismatch(
            "x and s must have one entry per column of A".into(),
        ));
    }
    if x.iter().chain(s.iter()).any(|v| !(*v > 0.0)) {
        return Err(FacetError::NonPositiveInterior);
    }
    let d = x.component_div(s);
    Ok(symmetric_condition(normal_matrix(a, &d)))
}

pub(crate) fn symmetric_condition(m: DMatrix<f64>) -> f64 {
    if m.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let eig = SymmetricEigen::new(m).eigenvalues;
    let max = eig.iter().fold(f64::NEG_INFINITY, |a, v| a.max(*v));
    let min = eig.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_lp() -> StandardFormLP {
        StandardFormLP::from_rows(2, 2, &[1., 0., 0., 1.], &[1., 1.], &[1., 1.]).unwrap()
    }

    #[test]
    fn kkt_of_exact_pair_is_zero() {
        let lp = identity_lp();
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, 1.0]);
        let s = DVector::zeros(2);
        let k = kkt_residuals(&lp, &x, &y, &s);
        assert_eq!((k.primal, k.dual, k.complementarity), (0.0, 0.0, 0.0));
    }

    #[test]
    fn kkt_with_zero_multipliers() {
        let lp = identity_lp();
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let k = kkt_residuals(&lp, &x, &DVector::zeros(2), &lp.c.clone());
        assert_eq!(k.primal, 0.0);
        assert_eq!(k.dual, 0.0);
        assert_eq!(k.complementarity, lp.c.dot(&x) / 2.0);
    }

    #[test]
    fn normal_condition_identity_and_diagonal() {
        let a = DMatrix::identity(2, 2);
        let one = DVector::from_element(2, 1.0);
        assert!((normal_matrix_condition(&a, &one, &one).unwrap() - 1.0).abs() < 1e-12);
        let s = DVector::from_vec(vec![1.0, 100.0]);
        assert!((normal_matrix_condition(&a, &one, &s).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn normal_condition_rejects_boundary_points() {
        let a = DMatrix::identity(2, 2);
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let s = DVector::from_element(2, 1.0);
        assert!(matches!(
            normal_matrix_condition(&a, &x, &s),
            Err(FacetError::NonPositiveInterior)
        ));
    }

    #[test]
    fn rank_deficient_normal_matrix_is_infinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1., 1., 1., 1.]);
        let one = DVector::from_element(2, 1.0);
        assert!(normal_matrix_condition(&a, &one, &one).unwrap() > 1e15);
    }
}
