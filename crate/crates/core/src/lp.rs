//! Standard-form data model, basis solves and exhaustive BFS enumeration.
//!
//! Everything operates on `min c^T x  s.t.  A x = b, x >= 0` with dense `A`.
//! Column indices are 0-based throughout the API; the CLI prints them 1-based.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{FacetError, Result};
use crate::linalg;
use crate::tolerance;

/// Default cap on the number of column subsets [`enumerate_bfs`] will visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLP {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub names: Option<Vec<String>>,
    /// Constant added to `c^T x`; nonzero only after bound shifts in MPS input.
    pub objective_offset: f64,
    full_row_rank_checked: bool,
}

impl StandardFormLP {
    /// Builds an LP after checking shapes and finiteness. Rank is not checked
    /// here; see [`validate`].
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 {
            return Err(FacetError::DimensionMismatch("A has no rows".into()));
        }
        if n < m {
            return Err(FacetError::DimensionMismatch(format!(
                "A is {m}x{n}; standard form needs n >= m"
            )));
        }
        if b.len() != m {
            return Err(FacetError::DimensionMismatch(format!(
                "b has length {} but A has {m} rows",
                b.len()
            )));
        }
        if c.len() != n {
            return Err(FacetError::DimensionMismatch(format!(
                "c has length {} but A has {n} columns",
                c.len()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(FacetError::NonFiniteData("A"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(FacetError::NonFiniteData("b"));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(FacetError::NonFiniteData("c"));
        }
        Ok(Self {
            a,
            b,
            c,
            names: None,
            objective_offset: 0.0,
            full_row_rank_checked: false,
        })
    }

    /// Convenience constructor from row-major slices.
    pub fn from_rows(m: usize, n: usize, a: &[f64], b: &[f64], c: &[f64]) -> Result<Self> {
        if a.len() != m * n {
            return Err(FacetError::DimensionMismatch(format!(
                "expected {} matrix entries, got {}",
                m * n,
                a.len()
            )));
        }
        Self::new(
            DMatrix::from_row_slice(m, n, a),
            DVector::from_column_slice(b),
            DVector::from_column_slice(c),
        )
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n() {
            return Err(FacetError::DimensionMismatch(format!(
                "{} names for {} variables",
                names.len(),
                self.n()
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn full_row_rank_checked(&self) -> bool {
        self.full_row_rank_checked
    }

    /// Same data with a different right-hand side. The rank flag carries over
    /// because it depends on `A` only.
    pub fn with_rhs(&self, b: DVector<f64>) -> Result<Self> {
        let mut out = Self::new(self.a.clone(), b, self.c.clone())?;
        out.names = self.names.clone();
        out.objective_offset = self.objective_offset;
        out.full_row_rank_checked = self.full_row_rank_checked;
        Ok(out)
    }

    pub fn with_objective(&self, c: DVector<f64>) -> Result<Self> {
        let mut out = Self::new(self.a.clone(), self.b.clone(), c)?;
        out.names = self.names.clone();
        out.objective_offset = self.objective_offset;
        out.full_row_rank_checked = self.full_row_rank_checked;
        Ok(out)
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        self.c.dot(x) + self.objective_offset
    }

    /// SHA-256 over the dimensions and the little-endian bytes of `A` (row-major), `b`, `c`.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.m() as u64).to_le_bytes());
        h.update((self.n() as u64).to_le_bytes());
        for i in 0..self.m() {
            for j in 0..self.n() {
                h.update(self.a[(i, j)].to_le_bytes());
            }
        }
        for v in self.b.iter().chain(self.c.iter()) {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn primal_residual(&self, x: &DVector<f64>) -> f64 {
        (&self.a * x - &self.b).norm()
    }
}

/// Checks `rank(A) = m` with a pivoted QR and marks the LP as checked.
pub fn validate(lp: StandardFormLP) -> Result<StandardFormLP> {
    let lp = StandardFormLP::new(lp.a.clone(), lp.b.clone(), lp.c.clone()).map(|mut out| {
        out.names = lp.names;
        out.objective_offset = lp.objective_offset;
        out
    })?;
    let rank = linalg::numerical_rank(&lp.a);
    if rank < lp.m() {
        return Err(FacetError::RankDeficient { rank, m: lp.m() });
    }
    Ok(StandardFormLP {
        full_row_rank_checked: true,
        ..lp
    })
}

/// A sorted set of `m` column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Basis(Vec<usize>);

impl Basis {
    pub fn new(mut indices: Vec<usize>, m: usize, n: usize) -> Result<Self> {
        indices.sort_unstable();
        let len = indices.len();
        indices.dedup();
        if indices.len() != len || len != m {
            return Err(FacetError::DimensionMismatch(format!(
                "basis needs {m} distinct indices, got {len}"
            )));
        }
        if indices.last().is_some_and(|&i| i >= n) {
            return Err(FacetError::DimensionMismatch(format!(
                "basis index out of range for n = {n}"
            )));
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    /// 1-based rendering, e.g. `{2,3}`.
    pub fn display_one_based(&self) -> String {
        let inner: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        format!("{{{}}}", inner.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisPoint {
    pub basis: Basis,
    pub x: DVector<f64>,
    pub degeneracy_degree: usize,
}

impl BasisPoint {
    pub fn is_feasible(&self) -> bool {
        let tol = tolerance::zero_threshold(linalg::inf_norm(&self.x));
        self.x.iter().all(|v| *v >= -tol)
    }
}

/// Number of basic variables at zero.
pub fn degeneracy_degree(point: &BasisPoint) -> usize {
    let tol = tolerance::zero_threshold(linalg::inf_norm(&point.x));
    point
        .basis
        .indices()
        .iter()
        .filter(|&&i| point.x[i].abs() <= tol)
        .count()
}

/// Entries of `x` above the zero threshold.
pub fn positive_count(x: &DVector<f64>) -> usize {
    let tol = tolerance::zero_threshold(linalg::inf_norm(x));
    x.iter().filter(|v| **v > tol).count()
}

/// Solves `A_B x_B = b` and scatters into a full vector with exact zeros off the basis.
///
/// Infeasible (negative) basic solutions are returned as-is.
pub fn basis_solve(lp: &StandardFormLP, basis: &Basis) -> Result<BasisPoint> {
    let m = lp.m();
    if basis.indices().len() != m {
        return Err(FacetError::DimensionMismatch(format!(
            "basis has {} indices, LP has m = {m}",
            basis.indices().len()
        )));
    }
    if basis.indices().iter().any(|&j| j >= lp.n()) {
        return Err(FacetError::DimensionMismatch("basis index out of range".into()));
    }
    let bm = linalg::select_columns(&lp.a, basis.indices());
    let condition = linalg::condition_number(&bm);
    if !(condition * tolerance::BASIS_COND_REL < 1.0) {
        return Err(FacetError::SingularBasis { condition });
    }
    let xb = bm
        .lu()
        .solve(&lp.b)
        .ok_or(FacetError::SingularBasis { condition })?;
    let mut x = DVector::zeros(lp.n());
    for (k, &j) in basis.indices().iter().enumerate() {
        x[j] = xb[k];
    }
    if lp.primal_residual(&x) > tolerance::FEAS * (1.0 + lp.b.norm()) {
        return Err(FacetError::SingularBasis { condition });
    }
    let mut point = BasisPoint {
        basis: basis.clone(),
        x,
        degeneracy_degree: 0,
    };
    point.degeneracy_degree = degeneracy_degree(&point);
    Ok(point)
}

/// `min_i x_i > tau_zero` and `||Ax - b|| <= tau_feas (1 + ||b||)`.
pub fn is_strictly_feasible_point(lp: &StandardFormLP, x: &DVector<f64>) -> bool {
    if x.len() != lp.n() {
        return false;
    }
    let tol = tolerance::zero_threshold(linalg::inf_norm(x));
    x.iter().all(|v| *v > tol) && lp.primal_residual(x) <= tolerance::FEAS * (1.0 + lp.b.norm())
}

#[derive(Debug, Clone)]
pub struct BfsEnumeration {
    pub lp_digest: String,
    /// Feasible bases in lexicographic order.
    pub entries: Vec<BasisPoint>,
    /// Distinct extreme points, first occurrence order.
    pub distinct_points: Vec<DVector<f64>>,
    pub all_degenerate: bool,
}

impl BfsEnumeration {
    /// Largest number of positive entries over the distinct points.
    pub fn max_positive_entries(&self) -> usize {
        self.distinct_points
            .iter()
            .map(positive_count)
            .max()
            .unwrap_or(0)
    }

    pub fn min_degeneracy_degree(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.degeneracy_degree)
            .min()
            .unwrap_or(0)
    }

    pub fn contains_point(&self, x: &DVector<f64>) -> bool {
        self.distinct_points
            .iter()
            .any(|p| linalg::inf_norm(&(p - x)) <= tolerance::DEDUP)
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Lexicographic successor of a k-subset of `0..n`, in place.
fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn enumerate_bfs(lp: &StandardFormLP) -> Result<BfsEnumeration> {
    enumerate_bfs_with_cap(lp, DEFAULT_ENUMERATION_CAP)
}

/// Visits every size-`m` column subset in lexicographic order and keeps the
/// nonsingular, nonnegative ones. Chunks are solved in parallel and merged in order.
pub fn enumerate_bfs_with_cap(lp: &StandardFormLP, cap: u128) -> Result<BfsEnumeration> {
    let (m, n) = (lp.m(), lp.n());
    let total = binomial(n, m);
    if total > cap {
        return Err(FacetError::EnumerationTooLarge { n, m, cap });
    }
    const CHUNK: usize = 2048;
    let mut comb: Vec<usize> = (0..m).collect();
    let mut more = true;
    let mut entries = Vec::new();
    while more {
        let mut chunk = Vec::with_capacity(CHUNK);
        while more && chunk.len() < CHUNK {
            chunk.push(comb.clone());
            more = next_combination(&mut comb, n);
        }
        let solved: Vec<BasisPoint> = chunk
            .into_par_iter()
            .filter_map(|idx| {
                let basis = Basis(idx);
                basis_solve(lp, &basis).ok().filter(BasisPoint::is_feasible)
            })
            .collect();
        entries.extend(solved);
    }
    if entries.is_empty() {
        return Err(FacetError::Infeasible);
    }

    let mut distinct_points: Vec<DVector<f64>> = Vec::new();
    for e in &entries {
        if !distinct_points
            .iter()
            .any(|p| linalg::inf_norm(&(p - &e.x)) <= tolerance::DEDUP)
        {
            distinct_points.push(e.x.clone());
        }
    }
    debug_assert!(distinct_points.iter().all(|p| positive_count(p) <= m));

    let all_degenerate = entries.iter().all(|e| e.degeneracy_degree >= 1);
    Ok(BfsEnumeration {
        lp_digest: lp.digest(),
        entries,
        distinct_points,
        all_degenerate,
    })
}
