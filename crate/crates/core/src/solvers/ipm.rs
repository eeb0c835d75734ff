//! Infeasible-start Mehrotra predictor-corrector on the normal equations.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{kkt_residuals, normal_matrix, symmetric_condition, Kkt};
use crate::error::{FacetError, Result};
use crate::lp::StandardFormLP;
use crate::tolerance;

#[derive(Debug, Clone)]
pub struct IpmOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub step_fraction: f64,
    /// First regularization tried after a failed factorization, relative to
    /// the largest diagonal entry of the normal matrix.
    pub regularization_start: f64,
    pub regularization_max: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            tolerance: tolerance::IPM,
            max_iterations: 200,
            step_fraction: 0.99,
            regularization_start: 1e-12,
            regularization_max: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IpmResult {
    pub x_star: DVector<f64>,
    pub y_star: DVector<f64>,
    pub s_star: DVector<f64>,
    pub iterations: usize,
    pub kkt: Kkt,
    /// `kappa(A D* A^T)` at the returned iterate.
    pub normal_condition: f64,
    pub converged: bool,
}

impl IpmResult {
    pub fn objective(&self, lp: &StandardFormLP) -> f64 {
        lp.objective(&self.x_star)
    }
}

fn factor(m: &DMatrix<f64>, opts: &IpmOptions) -> Option<Cholesky<f64, Dyn>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Some(ch);
    }
    let diag = m.diagonal().iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let mut delta = opts.regularization_start;
    while delta <= opts.regularization_max {
        let mut reg = m.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += delta * diag;
        }
        if let Some(ch) = Cholesky::new(reg) {
            return Some(ch);
        }
        delta *= 10.0;
    }
    None
}

/// Largest `alpha <= 1` with `v + alpha * dv >= 0`.
fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(1.0_f64, f64::min)
}

fn starting_point(
    lp: &StandardFormLP,
    opts: &IpmOptions,
) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let (m, n) = (lp.m(), lp.n());
    let aat = &lp.a * lp.a.transpose();
    let fallback = || {
        (
            DVector::from_element(n, 1.0),
            DVector::zeros(m),
            DVector::from_element(n, 1.0),
        )
    };
    let Some(ch) = factor(&aat, opts) else {
        return fallback();
    };
    let x_ls = lp.a.tr_mul(&ch.solve(&lp.b));
    let y = ch.solve(&(&lp.a * &lp.c));
    let s_ls = &lp.c - lp.a.tr_mul(&y);

    let dx = (-1.5 * x_ls.min()).max(0.0);
    let ds = (-1.5 * s_ls.min()).max(0.0);
    let mut x = x_ls.add_scalar(dx);
    let mut s = s_ls.add_scalar(ds);
    let xs = x.dot(&s);
    if xs > 0.0 && x.sum() > 0.0 && s.sum() > 0.0 {
        let dx2 = 0.5 * xs / s.sum();
        let ds2 = 0.5 * xs / x.sum();
        x.add_scalar_mut(dx2);
        s.add_scalar_mut(ds2);
    } else {
        x.add_scalar_mut(1.0);
        s.add_scalar_mut(1.0);
    }
    if x.iter().chain(s.iter()).any(|v| !(*v > 0.0 && v.is_finite())) {
        return fallback();
    }
    (x, y, s)
}

fn finish(
    lp: &StandardFormLP,
    x: DVector<f64>,
    y: DVector<f64>,
    s: DVector<f64>,
    iterations: usize,
    converged: bool,
) -> IpmResult {
    let kkt = kkt_residuals(lp, &x, &y, &s);
    let d = x.component_div(&s);
    let normal_condition = symmetric_condition(normal_matrix(&lp.a, &d));
    IpmResult {
        x_star: x,
        y_star: y,
        s_star: s,
        iterations,
        kkt,
        normal_condition,
        converged,
    }
}

/// Iterations without a new best KKT residual before giving up.
const NO_PROGRESS_LIMIT: usize = 10;

/// Lowest-residual iterate seen so far; returned when the run does not converge.
struct Best {
    x: DVector<f64>,
    y: DVector<f64>,
    s: DVector<f64>,
    score: f64,
    iter: usize,
}

impl Best {
    fn new(x: &DVector<f64>, y: &DVector<f64>, s: &DVector<f64>, score: f64, iter: usize) -> Self {
        Self {
            x: x.clone(),
            y: y.clone(),
            s: s.clone(),
            score,
            iter,
        }
    }

    fn finish(self, lp: &StandardFormLP) -> IpmResult {
        finish(lp, self.x, self.y, self.s, self.iter, false)
    }
}

/// Primal-dual path following. Runs that stall, stop improving, or hit the
/// iteration cap return `converged = false` with the lowest-residual iterate
/// seen; a normal matrix that cannot be factored even with regularization is
/// an error carrying that iterate.
pub fn solve_ipm(lp: &StandardFormLP, opts: &IpmOptions) -> Result<IpmResult> {
    let n = lp.n();
    let (mut x, mut y, mut s) = starting_point(lp, opts);
    let mut stalled = 0usize;
    let mut best = Best::new(&x, &y, &s, f64::INFINITY, 0);

    for iter in 0..opts.max_iterations {
        let kkt = kkt_residuals(lp, &x, &y, &s);
        if kkt.max() <= opts.tolerance {
            return Ok(finish(lp, x, y, s, iter, true));
        }
        if kkt.max() < best.score {
            best = Best::new(&x, &y, &s, kkt.max(), iter);
        } else if iter - best.iter >= NO_PROGRESS_LIMIT {
            return Ok(best.finish(lp));
        }
        let rp = &lp.b - &lp.a * &x;
        let rd = &lp.c - lp.a.tr_mul(&y) - &s;
        let mu = x.dot(&s) / n as f64;
        let d = x.component_div(&s);
        let nm = normal_matrix(&lp.a, &d);
        let Some(ch) = factor(&nm, opts) else {
            let last = best.finish(lp);
            return Err(FacetError::NumericalBreakdown {
                iterations: iter,
                last: Box::new(last),
            });
        };

        let d_rd = d.component_mul(&rd);
        let solve = |rc: &DVector<f64>| -> (DVector<f64>, DVector<f64>, DVector<f64>) {
            let rc_over_s = rc.component_div(&s);
            let rhs = &rp - &lp.a * &rc_over_s + &lp.a * &d_rd;
            let dy = ch.solve(&rhs);
            let ds = &rd - lp.a.tr_mul(&dy);
            let dx = rc_over_s - d.component_mul(&ds);
            (dx, dy, ds)
        };

        let rc_aff = -x.component_mul(&s);
        let (dx_a, _, ds_a) = solve(&rc_aff);
        let ap = max_step(&x, &dx_a);
        let ad = max_step(&s, &ds_a);
        let mu_aff = (&x + ap * &dx_a).dot(&(&s + ad * &ds_a)) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let rc = rc_aff.add_scalar(sigma * mu) - dx_a.component_mul(&ds_a);
        let (dx, dy, ds) = solve(&rc);
        let ap = (opts.step_fraction * max_step(&x, &dx)).min(1.0);
        let ad = (opts.step_fraction * max_step(&s, &ds)).min(1.0);

        let xn = &x + ap * &dx;
        let yn = &y + ad * &dy;
        let sn = &s + ad * &ds;
        if xn.iter().chain(sn.iter()).chain(yn.iter()).any(|v| !v.is_finite())
            || xn.iter().chain(sn.iter()).any(|v| *v <= 0.0)
        {
            return Ok(best.finish(lp));
        }
        x = xn;
        y = yn;
        s = sn;

        if ap < 1e-8 && ad < 1e-8 {
            stalled += 1;
            if stalled >= 5 {
                return Ok(best.finish(lp));
            }
        } else {
            stalled = 0;
        }
    }
    let kkt = kkt_residuals(lp, &x, &y, &s);
    if kkt.max() <= opts.tolerance {
        return Ok(finish(lp, x, y, s, opts.max_iterations, true));
    }
    if kkt.max() < best.score {
        best = Best::new(&x, &y, &s, kkt.max(), opts.max_iterations);
    }
    Ok(best.finish(lp))
}
