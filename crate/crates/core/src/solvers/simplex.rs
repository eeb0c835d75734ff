//! Dense revised simplex with an explicit basis inverse.
//!
//! Phase I starts from a crash basis: rows that own a unit column use it,
//! every other row gets an artificial. A pivot is degenerate when its step
//! length is at most `tau_zero`. The dual variant runs the same primal
//! simplex on the standard-form dual
//! `min -b^T y+ + b^T y-  s.t.  A^T y+ - A^T y- + s = c`.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::lp::{Basis, StandardFormLP};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotRule {
    Bland,
    Dantzig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimplexVariant {
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimplexStatus {
    Optimal,
    Unbounded,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub status: SimplexStatus,
    /// Final basis of the problem the simplex actually ran on: the LP itself
    /// for [`SimplexVariant::Primal`], its standard-form dual (columns
    /// `y+ | y- | s`) for [`SimplexVariant::Dual`]. `None` when an artificial
    /// for a redundant row stayed basic.
    pub optimal_basis: Option<Basis>,
    pub x: Option<DVector<f64>>,
    pub y: Option<DVector<f64>>,
    pub objective: f64,
    pub total_pivots: usize,
    pub degenerate_pivots: usize,
    pub degiter_percent: f64,
}

/// Iteration cap per unit of `n`.
pub const ITERATION_CAP_PER_COLUMN: usize = 10_000;

pub fn solve_simplex(lp: &StandardFormLP, rule: PivotRule, variant: SimplexVariant) -> SimplexResult {
    match variant {
        SimplexVariant::Primal => {
            let raw = solve_raw(&lp.a, &lp.b, &lp.c, rule, ITERATION_CAP_PER_COLUMN * lp.n());
            let objective = raw.x.as_ref().map(|x| lp.objective(x)).unwrap_or(f64::NAN);
            finish(raw, objective, |raw| (raw.x.clone(), raw.y.clone()))
        }
        SimplexVariant::Dual => solve_dual(lp, rule),
    }
}

fn solve_dual(lp: &StandardFormLP, rule: PivotRule) -> SimplexResult {
    let (m, n) = (lp.m(), lp.n());
    let cols = 2 * m + n;
    let at = lp.a.transpose();
    let ad = DMatrix::from_fn(n, cols, |i, j| {
        if j < m {
            at[(i, j)]
        } else if j < 2 * m {
            -at[(i, j - m)]
        } else if j - 2 * m == i {
            1.0
        } else {
            0.0
        }
    });
    let cd = DVector::from_fn(cols, |j, _| {
        if j < m {
            -lp.b[j]
        } else if j < 2 * m {
            lp.b[j - m]
        } else {
            0.0
        }
    });
    let mut raw = solve_raw(&ad, &lp.c, &cd, rule, ITERATION_CAP_PER_COLUMN * cols);
    raw.status = match raw.status {
        SimplexStatus::Unbounded => SimplexStatus::Infeasible,
        // dual infeasible: the primal is unbounded whenever it is feasible
        SimplexStatus::Infeasible => SimplexStatus::Unbounded,
        s => s,
    };
    let y = raw
        .x
        .as_ref()
        .map(|v| DVector::from_fn(m, |i, _| v[i] - v[m + i]));
    // Multipliers of the dual rows are -x for the primal.
    let x = raw.y.as_ref().map(|pi| -pi);
    let objective = match (&y, raw.status) {
        (Some(y), SimplexStatus::Optimal) => lp.b.dot(y) + lp.objective_offset,
        _ => f64::NAN,
    };
    finish(raw, objective, move |_| (x.clone(), y.clone()))
}

fn finish(
    raw: RawSimplex,
    objective: f64,
    solutions: impl Fn(&RawSimplex) -> (Option<DVector<f64>>, Option<DVector<f64>>),
) -> SimplexResult {
    let (x, y) = if raw.status == SimplexStatus::Optimal {
        solutions(&raw)
    } else {
        (None, None)
    };
    SimplexResult {
        status: raw.status,
        optimal_basis: if raw.status == SimplexStatus::Optimal {
            raw.basis.clone()
        } else {
            None
        },
        x,
        y,
        objective: if raw.status == SimplexStatus::Optimal {
            objective
        } else {
            f64::NAN
        },
        total_pivots: raw.total_pivots,
        degenerate_pivots: raw.degenerate_pivots,
        degiter_percent: 100.0 * raw.degenerate_pivots as f64 / raw.total_pivots.max(1) as f64,
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RawSimplex {
    pub status: SimplexStatus,
    pub basis: Option<Basis>,
    /// Primal point in the original columns.
    pub x: Option<DVector<f64>>,
    /// Row multipliers `pi` with `c - A^T pi >= 0` at optimality.
    pub y: Option<DVector<f64>>,
    pub objective: f64,
    pub total_pivots: usize,
    pub degenerate_pivots: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const REDUCED_COST_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

/// Simplex tableau state: columns `0..n` are structural, `n..n+m` artificial.
struct Engine<'a> {
    a: &'a DMatrix<f64>,
    m: usize,
    n: usize,
    row_sign: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Row-major `m x m`.
    binv: Vec<f64>,
    xb: Vec<f64>,
    rule: PivotRule,
    total_pivots: usize,
    degenerate_pivots: usize,
    since_refactor: usize,
    cap: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl<'a> Engine<'a> {
    /// Column `j` of the sign-adjusted constraint matrix, written into `out`.
    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.n {
            let col = self.a.column(j);
            for i in 0..self.m {
                out[i] = self.row_sign[i] * col[i];
            }
        } else {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j - self.n] = 1.0;
        }
    }

    fn refactor(&mut self) {
        let m = self.m;
        let mut bmat = DMatrix::zeros(m, m);
        let mut col = vec![0.0; m];
        for (k, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for i in 0..m {
                bmat[(i, k)] = col[i];
            }
        }
        if let Some(inv) = bmat.try_inverse() {
            for i in 0..m {
                for k in 0..m {
                    self.binv[i * m + k] = inv[(i, k)];
                }
            }
            for i in 0..m {
                self.xb[i] = (0..m).map(|k| self.binv[i * m + k] * self.rhs[k]).sum();
            }
        }
        self.since_refactor = 0;
    }

    fn multipliers(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = cost[j];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for k in 0..m {
                    pi[k] += cb * row[k];
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], pi: &[f64]) -> f64 {
        if j < self.n {
            let col = self.a.column(j);
            let dot: f64 = (0..self.m).map(|i| pi[i] * self.row_sign[i] * col[i]).sum();
            cost[j] - dot
        } else {
            cost[j] - pi[j - self.n]
        }
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .map(|(&j, &v)| cost[j] * v)
            .sum()
    }

    /// Runs pivots until optimal for `cost`. Columns with `allowed[j] == false` never enter.
    fn run_phase(&mut self, cost: &[f64], allowed: &[bool]) -> PhaseOutcome {
        let m = self.m;
        let cost_scale = 1.0 + cost.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let track = cfg!(debug_assertions) && self.rule == PivotRule::Bland;
        let mut alpha = vec![0.0; m];
        let mut col = vec![0.0; m];
        let mut last_obj = self.objective(cost);
        loop {
            if self.total_pivots >= self.cap {
                return PhaseOutcome::IterationLimit;
            }
            if track {
                let mut key = self.basis.clone();
                key.sort_unstable();
                debug_assert!(seen.insert(key), "Bland's rule revisited a basis");
            }
            let pi = self.multipliers(cost);
            let tol = REDUCED_COST_TOL * cost_scale;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.n + m {
                if self.is_basic[j] || !allowed[j] {
                    continue;
                }
                let d = self.reduced_cost(j, cost, &pi);
                if d < -tol {
                    match self.rule {
                        PivotRule::Bland => {
                            entering = Some((j, d));
                            break;
                        }
                        PivotRule::Dantzig => {
                            if entering.is_none_or(|(_, best)| d < best) {
                                entering = Some((j, d));
                            }
                        }
                    }
                }
            }
            let Some((q, _)) = entering else {
                return PhaseOutcome::Optimal;
            };

            self.column(q, &mut col);
            for i in 0..m {
                let row = &self.binv[i * m..(i + 1) * m];
                alpha[i] = row.iter().zip(&col).map(|(a, b)| a * b).sum();
            }

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if alpha[i] <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.xb[i].max(0.0) / alpha[i];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best);
                        let better = if tie {
                            match self.rule {
                                PivotRule::Bland => self.basis[i] < self.basis[r],
                                PivotRule::Dantzig => alpha[i] > alpha[r],
                            }
                        } else {
                            ratio < best
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, theta)) = leave else {
                return PhaseOutcome::Unbounded;
            };

            let xb_inf = self.xb.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if theta <= tolerance::zero_threshold(xb_inf) {
                self.degenerate_pivots += 1;
            }
            self.total_pivots += 1;
            self.pivot(r, q, theta, &alpha);

            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let obj = self.objective(cost);
            debug_assert!(
                obj <= last_obj + 1e-7 * (1.0 + last_obj.abs()),
                "simplex objective increased: {last_obj} -> {obj}"
            );
            last_obj = obj;
        }
    }

    fn pivot(&mut self, r: usize, q: usize, theta: f64, alpha: &[f64]) {
        let m = self.m;
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * alpha[i];
            }
        }
        self.xb[r] = theta;
        let pr = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= pr;
        }
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (pivot_row, after) = rest.split_at_mut(m);
        for (i, row) in before.chunks_mut(m).enumerate() {
            let f = alpha[i];
            if f != 0.0 {
                row.iter_mut().zip(pivot_row.iter()).for_each(|(a, p)| *a -= f * p);
            }
        }
        for (off, row) in after.chunks_mut(m).enumerate() {
            let f = alpha[r + 1 + off];
            if f != 0.0 {
                row.iter_mut().zip(pivot_row.iter()).for_each(|(a, p)| *a -= f * p);
            }
        }
        let old = self.basis[r];
        self.is_basic[old] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
        self.since_refactor += 1;
    }

    /// Pivots zero-level artificials out where a structural column can replace them.
    fn drive_out_artificials(&mut self) {
        let m = self.m;
        let mut col = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        for r in 0..m {
            if self.basis[r] < self.n {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.is_basic[j] {
                    continue;
                }
                self.column(j, &mut col);
                let v: f64 = row.iter().zip(&col).map(|(a, b)| a * b).sum();
                if v.abs() > 1e-7 && best.is_none_or(|(_, b)| v.abs() > b) {
                    best = Some((j, v.abs()));
                }
            }
            if let Some((q, _)) = best {
                self.column(q, &mut col);
                for i in 0..m {
                    let brow = &self.binv[i * m..(i + 1) * m];
                    alpha[i] = brow.iter().zip(&col).map(|(a, b)| a * b).sum();
                }
                self.total_pivots += 1;
                self.degenerate_pivots += 1;
                let theta = self.xb[r] / alpha[r];
                self.pivot(r, q, theta, &alpha);
            }
        }
        self.refactor();
    }
}

/// Two-phase simplex on `min c^T x, A x = b, x >= 0`. Rank-deficient `A` is
/// tolerated: artificials of redundant rows stay basic at zero.
pub(crate) fn solve_raw(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    rule: PivotRule,
    cap: usize,
) -> RawSimplex {
    let (m, n) = a.shape();
    let mut row_sign = vec![0.0; m];
    let mut basis = vec![usize::MAX; m];

    for j in 0..n {
        let col = a.column(j);
        let mut nz = col.iter().enumerate().filter(|(_, v)| **v != 0.0);
        let (Some((i, &v)), None) = (nz.next(), nz.next()) else {
            continue;
        };
        if basis[i] != usize::MAX {
            continue;
        }
        let s = if b[i] > 0.0 {
            1.0
        } else if b[i] < 0.0 {
            -1.0
        } else {
            v.signum()
        };
        if s * v > 0.0 {
            row_sign[i] = s;
            basis[i] = j;
        }
    }
    for i in 0..m {
        if basis[i] == usize::MAX {
            row_sign[i] = if b[i] < 0.0 { -1.0 } else { 1.0 };
            basis[i] = n + i;
        }
    }
    let rhs: Vec<f64> = (0..m).map(|i| row_sign[i] * b[i]).collect();
    let mut is_basic = vec![false; n + m];
    for &j in &basis {
        is_basic[j] = true;
    }

    let mut eng = Engine {
        a,
        m,
        n,
        row_sign,
        rhs,
        basis,
        is_basic,
        binv: vec![0.0; m * m],
        xb: vec![0.0; m],
        rule,
        total_pivots: 0,
        degenerate_pivots: 0,
        since_refactor: 0,
        cap,
    };
    eng.refactor();

    let has_artificial = eng.basis.iter().any(|&j| j >= n);
    if has_artificial {
        let mut cost1 = vec![0.0; n + m];
        for v in cost1.iter_mut().skip(n) {
            *v = 1.0;
        }
        let allowed = vec![true; n + m];
        match eng.run_phase(&cost1, &allowed) {
            PhaseOutcome::IterationLimit => return eng.result(SimplexStatus::IterationLimit, c),
            PhaseOutcome::Unbounded => unreachable!("phase one objective is bounded below"),
            PhaseOutcome::Optimal => {}
        }
        let infeas = eng.objective(&cost1);
        let scale = 1.0 + eng.rhs.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if infeas > tolerance::FEAS * scale {
            return eng.result(SimplexStatus::Infeasible, c);
        }
        eng.drive_out_artificials();
    }

    let mut cost2 = vec![0.0; n + m];
    cost2[..n].copy_from_slice(c.as_slice());
    let allowed: Vec<bool> = (0..n + m).map(|j| j < n).collect();
    let status = match eng.run_phase(&cost2, &allowed) {
        PhaseOutcome::Optimal => SimplexStatus::Optimal,
        PhaseOutcome::Unbounded => SimplexStatus::Unbounded,
        PhaseOutcome::IterationLimit => SimplexStatus::IterationLimit,
    };
    eng.result(status, c)
}

impl Engine<'_> {
    fn result(&mut self, status: SimplexStatus, c: &DVector<f64>) -> RawSimplex {
        self.refactor();
        let (m, n) = (self.m, self.n);
        let mut x = DVector::zeros(n);
        for (i, &j) in self.basis.iter().enumerate() {
            if j < n {
                x[j] = self.xb[i].max(0.0);
            }
        }
        let mut cost = vec![0.0; n + m];
        cost[..n].copy_from_slice(c.as_slice());
        let pi = self.multipliers(&cost);
        let y = DVector::from_fn(m, |i, _| pi[i] * self.row_sign[i]);
        let basis = if self.basis.iter().all(|&j| j < n) {
            Basis::new(self.basis.clone(), m, n).ok()
        } else {
            None
        };
        RawSimplex {
            status,
            objective: c.dot(&x),
            basis,
            x: Some(x),
            y: Some(y),
            total_pivots: self.total_pivots,
            degenerate_pivots: self.degenerate_pivots,
        }
    }
}
