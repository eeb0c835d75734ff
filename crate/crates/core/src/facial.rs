//! Facial reduction for `F = {x >= 0 : Ax = b}` and for the dual slack set
//! `G = {(y, s) : A^T y + s = c, s >= 0}`.
//!
//! Primal reduction has two steps. An exposing vector `z = A^T y >= 0` with
//! `b^T y = 0` pins every `x_i` with `z_i > 0` to zero, so those columns are
//! dropped. The surviving columns `AV` always have dependent rows when a
//! certificate exists, and a pivoted QR of `(AV)^T` keeps an independent subset.
//!
//! Certificates come from one auxiliary LP whose optimum has maximal support:
//!
//! ```text
//! max sum(s)  s.t.  A^T y >= s,  0 <= s <= 1,  b^T y = 0
//! ```
//!
//! For any feasible `y` the vector `A^T y` vanishes off the maximal exposable
//! set, and scaling `y` can lift every exposable coordinate to 1, so each
//! optimal vertex already carries the full support.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FacetError, Result};
use crate::linalg;
use crate::lp::StandardFormLP;
use crate::solvers::{solve_raw, PivotRule, SimplexStatus, ITERATION_CAP_PER_COLUMN};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposingCertificate {
    pub y: Vec<f64>,
    /// `A^T y`, scaled so that `||z||_inf = 1`.
    pub z: Vec<f64>,
    /// Sorted indices with `z_i > tolerance_used`.
    pub support: Vec<usize>,
    pub tolerance_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualExposingCertificate {
    /// Scaled so that `||w||_inf = 1`.
    pub w: Vec<f64>,
    pub support: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FacialReduction {
    pub original_digest: String,
    pub n_original: usize,
    pub m_original: usize,
    /// Columns of the facial range vector `V`.
    pub kept_columns: Vec<usize>,
    /// Rows of `AV` kept by the row selection.
    pub kept_rows: Vec<usize>,
    pub a_reduced: DMatrix<f64>,
    pub b_reduced: DVector<f64>,
    pub certificate: Option<ExposingCertificate>,
    pub slater_verified: bool,
    /// Strictly positive point of the reduced system.
    pub slater_witness: Option<DVector<f64>>,
    /// Auxiliary solves run before no further certificate was found.
    pub passes: usize,
}

#[derive(Debug, Clone)]
pub struct DualFacialReduction {
    pub n: usize,
    /// `I_w`: slack coordinates not fixed to zero by `w`.
    pub kept_slack_columns: Vec<usize>,
    pub certificate: Option<DualExposingCertificate>,
    pub redundant_row_found: bool,
}

#[derive(Debug, Clone)]
pub struct RowSelection {
    pub kept_rows: Vec<usize>,
    pub m_kept: DMatrix<f64>,
    pub rhs_kept: DVector<f64>,
}

fn aux_solve(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let cols = a.ncols();
    let quick = solve_raw(a, b, c, PivotRule::Dantzig, 50 * (a.nrows() + cols));
    let raw = if quick.status == SimplexStatus::IterationLimit {
        solve_raw(a, b, c, PivotRule::Bland, ITERATION_CAP_PER_COLUMN * cols)
    } else {
        quick
    };
    match raw.status {
        SimplexStatus::Optimal => Ok((raw.x.expect("optimal run has a point"), raw.objective)),
        SimplexStatus::Infeasible => Err(FacetError::Infeasible),
        s => Err(FacetError::AuxiliarySolveFailed(format!(
            "auxiliary simplex ended with {s:?}"
        ))),
    }
}

/// Maximum-support exposing vector for `{x >= 0 : Ax = b}`, or `None` when
/// the system admits a strictly positive solution.
pub fn find_exposing_vector(lp: &StandardFormLP) -> Result<Option<ExposingCertificate>> {
    exposing_for(&lp.a, &lp.b)
}

fn exposing_for(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Option<ExposingCertificate>> {
    let (m, n) = a.shape();
    if n == 0 {
        return Ok(None);
    }
    let bnorm = b.norm();
    let with_b_row = bnorm > 0.0;
    let rows = 2 * n + usize::from(with_b_row);
    let cols = 2 * m + 3 * n;
    let (s0, t0, u0) = (2 * m, 2 * m + n, 2 * m + 2 * n);
    let mut aux = DMatrix::zeros(rows, cols);
    for i in 0..n {
        for k in 0..m {
            aux[(i, k)] = -a[(k, i)];
            aux[(i, m + k)] = a[(k, i)];
        }
        aux[(i, s0 + i)] = 1.0;
        aux[(i, t0 + i)] = 1.0;
        aux[(n + i, s0 + i)] = 1.0;
        aux[(n + i, u0 + i)] = 1.0;
    }
    let mut rhs = DVector::zeros(rows);
    for i in 0..n {
        rhs[n + i] = 1.0;
    }
    if with_b_row {
        for k in 0..m {
            aux[(2 * n, k)] = b[k] / bnorm;
            aux[(2 * n, m + k)] = -b[k] / bnorm;
        }
    }
    let mut cost = DVector::zeros(cols);
    for i in 0..n {
        cost[s0 + i] = -1.0;
    }
    let (sol, obj) = aux_solve(&aux, &rhs, &cost)?;
    if -obj <= tolerance::CERT {
        return Ok(None);
    }

    let mut y = DVector::from_fn(m, |k, _| sol[k] - sol[m + k]);
    let mut z = a.tr_mul(&y);
    let scale = linalg::inf_norm(&z);
    if !(scale > 0.0) {
        return Err(FacetError::AuxiliarySolveFailed(
            "auxiliary optimum has a zero exposing vector".into(),
        ));
    }
    y /= scale;
    z /= scale;
    let support: Vec<usize> = (0..n).filter(|&i| z[i] > tolerance::SUPPORT).collect();

    let min_z = z.iter().fold(f64::INFINITY, |acc, v| acc.min(*v));
    let by = b.dot(&y).abs();
    if min_z < -tolerance::SUPPORT
        || by > tolerance::CERT * (1.0 + bnorm) * y.norm()
        || support.is_empty()
    {
        return Err(FacetError::AuxiliarySolveFailed(format!(
            "certificate check failed (min z = {min_z:.3e}, |b^T y| = {by:.3e})"
        )));
    }
    Ok(Some(ExposingCertificate {
        y: y.as_slice().to_vec(),
        z: z.as_slice().to_vec(),
        support,
        tolerance_used: tolerance::SUPPORT,
    }))
}

/// Columns surviving the certificate, in increasing order.
pub fn facial_range(
    certificate: &ExposingCertificate,
    n: usize,
    b: &DVector<f64>,
) -> Result<Vec<usize>> {
    let kept: Vec<usize> = (0..n)
        .filter(|i| certificate.support.binary_search(i).is_err())
        .collect();
    if kept.is_empty() && b.iter().any(|v| *v != 0.0) {
        return Err(FacetError::EmptyFace);
    }
    Ok(kept)
}

/// Keeps a maximal independent row subset of `m` (pivot rows of a pivoted QR
/// of `m^T`, re-sorted) and checks that the dropped rows agree with `rhs`.
pub fn remove_redundant_rows(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<RowSelection> {
    if rhs.len() != m.nrows() {
        return Err(FacetError::DimensionMismatch(format!(
            "rhs has length {} for {} rows",
            rhs.len(),
            m.nrows()
        )));
    }
    let rows = m.nrows();
    let mt = m.transpose();
    let rank = if m.ncols() == 0 { 0 } else { linalg::numerical_rank(m) };
    let mut kept: Vec<usize> = if rank == 0 {
        Vec::new()
    } else {
        linalg::pivoted_qr(&mt).pivots[..rank].to_vec()
    };
    kept.sort_unstable();

    let dropped: Vec<usize> = (0..rows).filter(|r| kept.binary_search(r).is_err()).collect();
    let scale = 1.0 + linalg::inf_norm(rhs);
    if !dropped.is_empty() {
        let rhs_kept = linalg::select_entries(rhs, &kept);
        let basis_t = linalg::select_columns(&mt, &kept);
        let svd = (!kept.is_empty()).then(|| basis_t.clone().svd(true, true));
        for &d in &dropped {
            let target = mt.column(d).into_owned();
            let predicted = match &svd {
                Some(svd) => {
                    let lambda = svd
                        .solve(&target, f64::EPSILON)
                        .map_err(|e| FacetError::AuxiliarySolveFailed(e.to_string()))?;
                    lambda.dot(&rhs_kept)
                }
                None => 0.0,
            };
            let residual = (rhs[d] - predicted).abs();
            if residual > tolerance::FEAS * scale {
                return Err(FacetError::InconsistentRedundantRow { row: d, residual });
            }
        }
    }
    Ok(RowSelection {
        m_kept: linalg::select_rows(m, &kept),
        rhs_kept: linalg::select_entries(rhs, &kept),
        kept_rows: kept,
    })
}

/// Maximizes `t` over `{v >= t 1, A v = b, 0 <= t <= 1}`; returns the point and `t`.
fn positive_witness(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let (m, n) = a.shape();
    let rows = m + n + 1;
    let cols = 2 * n + 2;
    let (t, q0, p) = (n, n + 1, 2 * n + 1);
    let mut aux = DMatrix::zeros(rows, cols);
    for i in 0..m {
        for j in 0..n {
            aux[(i, j)] = a[(i, j)];
        }
    }
    for j in 0..n {
        aux[(m + j, j)] = -1.0;
        aux[(m + j, t)] = 1.0;
        aux[(m + j, q0 + j)] = 1.0;
    }
    aux[(m + n, t)] = 1.0;
    aux[(m + n, p)] = 1.0;
    let mut rhs = DVector::zeros(rows);
    rhs.rows_mut(0, m).copy_from(b);
    rhs[m + n] = 1.0;
    let mut cost = DVector::zeros(cols);
    cost[t] = -1.0;
    let (sol, _) = aux_solve(&aux, &rhs, &cost)?;
    Ok((sol.rows(0, n).into_owned(), sol[t]))
}

/// Full two-step reduction of `{x >= 0 : Ax = b}`.
pub fn facially_reduce(lp: &StandardFormLP) -> Result<FacialReduction> {
    let (m, n) = (lp.m(), lp.n());
    let mut kept: Vec<usize> = (0..n).collect();
    let mut certificate: Option<ExposingCertificate> = None;
    let mut passes = 0;

    loop {
        passes += 1;
        let sub = linalg::select_columns(&lp.a, &kept);
        let Some(cert) = exposing_for(&sub, &lp.b)? else {
            break;
        };
        let exposed: Vec<usize> = cert.support.iter().map(|&i| kept[i]).collect();
        if certificate.is_none() {
            // Re-express against the full column set.
            let y = DVector::from_column_slice(&cert.y);
            let z = lp.a.tr_mul(&y);
            certificate = Some(ExposingCertificate {
                support: exposed.clone(),
                y: cert.y.clone(),
                z: z.as_slice().to_vec(),
                tolerance_used: cert.tolerance_used,
            });
        }
        kept.retain(|j| exposed.binary_search(j).is_err());
        if kept.is_empty() {
            if lp.b.iter().any(|v| *v != 0.0) {
                return Err(FacetError::EmptyFace);
            }
            break;
        }
    }

    let av = linalg::select_columns(&lp.a, &kept);
    let rows = remove_redundant_rows(&av, &lp.b).map_err(|e| match e {
        FacetError::InconsistentRedundantRow { .. } => FacetError::Infeasible,
        other => other,
    })?;

    let (slater_verified, slater_witness) = if kept.is_empty() {
        (false, None)
    } else if rows.kept_rows.is_empty() {
        (true, Some(DVector::from_element(kept.len(), 1.0)))
    } else {
        let (v, t) = positive_witness(&rows.m_kept, &rows.rhs_kept)?;
        let no_cert = exposing_for(&rows.m_kept, &rows.rhs_kept)?.is_none();
        let residual = (&rows.m_kept * &v - &rows.rhs_kept).norm();
        let ok = no_cert
            && t > tolerance::zero_threshold(linalg::inf_norm(&v))
            && residual <= tolerance::FEAS * (1.0 + rows.rhs_kept.norm());
        (ok, Some(v))
    };

    if certificate.is_some() && rows.kept_rows.len() >= m {
        return Err(FacetError::LemmaViolation);
    }

    Ok(FacialReduction {
        original_digest: lp.digest(),
        n_original: n,
        m_original: m,
        kept_columns: kept,
        kept_rows: rows.kept_rows,
        a_reduced: rows.m_kept,
        b_reduced: rows.rhs_kept,
        certificate,
        slater_verified,
        slater_witness,
        passes,
    })
}

impl FacialReduction {
    pub fn m_reduced(&self) -> usize {
        self.kept_rows.len()
    }

    pub fn n_reduced(&self) -> usize {
        self.kept_columns.len()
    }

    pub fn is_identity(&self) -> bool {
        self.certificate.is_none()
            && self.kept_columns.len() == self.n_original
            && self.kept_rows.len() == self.m_original
    }

    /// `x = V v`.
    pub fn lift(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.kept_columns.len() {
            return Err(FacetError::DimensionMismatch(format!(
                "reduced vector has length {}, face has {} columns",
                v.len(),
                self.kept_columns.len()
            )));
        }
        let mut x = DVector::zeros(self.n_original);
        for (k, &j) in self.kept_columns.iter().enumerate() {
            x[j] = v[k];
        }
        Ok(x)
    }

    /// `v = V^T x`, refusing points with mass on exposed coordinates.
    pub fn restrict(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.n_original {
            return Err(FacetError::DimensionMismatch(format!(
                "point has length {}, LP has {} columns",
                x.len(),
                self.n_original
            )));
        }
        let tol = tolerance::zero_threshold(linalg::inf_norm(x));
        for j in 0..self.n_original {
            if self.kept_columns.binary_search(&j).is_err() && x[j].abs() > tol {
                return Err(FacetError::NotInFace {
                    index: j,
                    mass: x[j].abs(),
                });
            }
        }
        Ok(linalg::select_entries(x, &self.kept_columns))
    }

    /// `V^T c`.
    pub fn reduce_objective(&self, c: &DVector<f64>) -> DVector<f64> {
        linalg::select_entries(c, &self.kept_columns)
    }

    /// The reduced LP with objective `V^T c`. Fails when no rows survive.
    pub fn reduced_lp(&self, original: &StandardFormLP) -> Result<StandardFormLP> {
        let mut lp = StandardFormLP::new(
            self.a_reduced.clone(),
            self.b_reduced.clone(),
            self.reduce_objective(&original.c),
        )?;
        lp.objective_offset = original.objective_offset;
        if let Some(names) = &original.names {
            lp.names = Some(self.kept_columns.iter().map(|&j| names[j].clone()).collect());
        }
        Ok(lp)
    }

    /// `AV`: the surviving columns with every row.
    pub fn av(&self, original: &StandardFormLP) -> DMatrix<f64> {
        linalg::select_columns(&original.a, &self.kept_columns)
    }
}

/// Maximum-support `w >= 0` with `A w = 0` and `c^T w = 0`, or `None` when
/// the dual slack set has a strictly positive slack.
pub fn find_dual_exposing_vector(lp: &StandardFormLP) -> Result<Option<DualExposingCertificate>> {
    let (m, n) = (lp.m(), lp.n());
    let mut stacked = DMatrix::zeros(m + 1, n);
    stacked.rows_mut(0, m).copy_from(&lp.a);
    stacked.row_mut(m).copy_from(&lp.c.transpose());
    let eq = remove_redundant_rows(&stacked, &DVector::zeros(m + 1))?.m_kept;
    let k = eq.nrows();

    let rows = k + 2 * n;
    let cols = 4 * n;
    let (t0, q0, u0) = (n, 2 * n, 3 * n);
    let mut aux = DMatrix::zeros(rows, cols);
    for i in 0..k {
        let norm = eq.row(i).norm();
        for j in 0..n {
            aux[(i, j)] = eq[(i, j)] / norm;
        }
    }
    for j in 0..n {
        aux[(k + j, j)] = -1.0;
        aux[(k + j, t0 + j)] = 1.0;
        aux[(k + j, q0 + j)] = 1.0;
        aux[(k + n + j, t0 + j)] = 1.0;
        aux[(k + n + j, u0 + j)] = 1.0;
    }
    let mut rhs = DVector::zeros(rows);
    for j in 0..n {
        rhs[k + n + j] = 1.0;
    }
    let mut cost = DVector::zeros(cols);
    for j in 0..n {
        cost[t0 + j] = -1.0;
    }
    let (sol, obj) = aux_solve(&aux, &rhs, &cost)?;
    if -obj <= tolerance::CERT {
        return Ok(None);
    }
    let mut w = sol.rows(0, n).into_owned();
    let scale = linalg::inf_norm(&w);
    w /= scale;
    let support: Vec<usize> = (0..n).filter(|&j| w[j] > tolerance::SUPPORT).collect();

    let wn = w.norm();
    let aw = (&lp.a * &w).norm();
    let cw = lp.c.dot(&w).abs();
    let a_norm = linalg::spectral_norm(&lp.a);
    if aw > tolerance::CERT * (1.0 + a_norm) * wn
        || cw > tolerance::CERT * (1.0 + lp.c.norm()) * wn
        || support.is_empty()
    {
        return Err(FacetError::AuxiliarySolveFailed(format!(
            "dual certificate check failed (||Aw|| = {aw:.3e}, |c^T w| = {cw:.3e})"
        )));
    }
    Ok(Some(DualExposingCertificate {
        w: w.as_slice().to_vec(),
        support,
    }))
}

pub fn dual_facially_reduce(lp: &StandardFormLP) -> Result<DualFacialReduction> {
    let n = lp.n();
    let certificate = find_dual_exposing_vector(lp)?;
    let (kept, redundant_row_found) = match &certificate {
        None => ((0..n).collect(), false),
        Some(cert) => {
            let kept: Vec<usize> = (0..n)
                .filter(|j| cert.support.binary_search(j).is_err())
                .collect();
            let w = DVector::from_column_slice(&cert.w);
            // [A; U^T] w = 0 exhibits a dependency among the rows of [A^T U].
            let aw = (&lp.a * &w).norm();
            let uw = kept.iter().map(|&j| w[j] * w[j]).sum::<f64>().sqrt();
            let scale = (1.0 + linalg::spectral_norm(&lp.a)) * w.norm();
            (kept, w.norm() > 0.0 && aw + uw <= tolerance::CERT * scale)
        }
    };
    Ok(DualFacialReduction {
        n,
        kept_slack_columns: kept,
        certificate,
        redundant_row_found,
    })
}

impl DualFacialReduction {
    /// Identity columns indexed by `I_w` (`n x |I_w|`).
    pub fn u_matrix(&self) -> DMatrix<f64> {
        let mut u = DMatrix::zeros(self.n, self.kept_slack_columns.len());
        for (k, &j) in self.kept_slack_columns.iter().enumerate() {
            u[(j, k)] = 1.0;
        }
        u
    }

    /// `[A^T U]`, whose rows are dependent whenever a certificate exists.
    pub fn stacked_matrix(&self, lp: &StandardFormLP) -> DMatrix<f64> {
        let u = self.u_matrix();
        let (m, n) = (lp.m(), lp.n());
        let mut out = DMatrix::zeros(n, m + u.ncols());
        out.columns_mut(0, m).copy_from(&lp.a.transpose());
        out.columns_mut(m, u.ncols()).copy_from(&u);
        out
    }

    pub fn stacked_row_rank(&self, lp: &StandardFormLP) -> usize {
        linalg::numerical_rank(&self.stacked_matrix(lp))
    }
}
