//! Seeded instance generators with planted certificates.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the spec seed and
//! a fixed per-step stream id, so an identical spec reproduces an identical
//! instance bit for bit.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{FacetError, Result};
use crate::linalg;
use crate::lp::StandardFormLP;
use crate::tolerance;

const MAX_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    PrimalNoSlater,
    PrimalSlater,
    DualNoSlater,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub m: usize,
    pub n: usize,
    /// Primal: number of coordinates that can be positive on the feasible set.
    /// Dual: number of slacks that can be positive, so `n - r` is the size of
    /// the planted dual certificate support.
    pub r: usize,
    pub seed: u64,
    pub kind: GeneratorKind,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, m: usize, n: usize, r: usize, seed: u64) -> Self {
        Self { m, n, r, seed, kind }
    }

    fn check(&self) -> Result<()> {
        if self.m == 0 || self.m >= self.n {
            return Err(FacetError::InvalidSpec(format!(
                "need 1 <= m < n, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        if self.r == 0 || self.r > self.n {
            return Err(FacetError::InvalidSpec(format!(
                "need 1 <= r <= n, got r = {}",
                self.r
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPrimalCertificate {
    pub y: Vec<f64>,
    /// Exposed columns after the column permutation, sorted.
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedDualCertificate {
    pub w: Vec<f64>,
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePlant {
    pub c: Vec<f64>,
    pub y_bar: Vec<f64>,
    pub s_bar: Vec<f64>,
}

/// Everything planted in an instance; serialized as the native-format sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantMetadata {
    pub spec: GeneratorSpec,
    pub planted_primal_certificate: Option<PlantedPrimalCertificate>,
    pub planted_dual_certificate: Option<PlantedDualCertificate>,
    pub planted_feasible_point: Vec<f64>,
    /// Column `k` of `A` is column `column_permutation[k]` of the unpermuted build.
    pub column_permutation: Vec<usize>,
    pub objective: Option<ObjectivePlant>,
    /// Dual slack planted by the dual generator.
    pub planted_dual_slack: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub lp: StandardFormLP,
    pub plant: PlantMetadata,
}

impl PlantedInstance {
    pub fn planted_feasible_point(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.plant.planted_feasible_point)
    }

    /// Columns pinned to zero by the planted primal certificate.
    pub fn planted_exposed_columns(&self) -> Vec<usize> {
        self.plant
            .planted_primal_certificate
            .as_ref()
            .map(|c| c.support.clone())
            .unwrap_or_default()
    }
}

mod stream {
    pub const Y: u64 = 1;
    pub const R: u64 = 2;
    pub const V_HAT: u64 = 3;
    pub const A2: u64 = 4;
    pub const PERM: u64 = 5;
    pub const OBJECTIVE: u64 = 6;
    pub const SLATER: u64 = 7;
    pub const W: u64 = 8;
    pub const S: u64 = 9;
    pub const X_HAT: u64 = 10;
}

fn rng_for(seed: u64, stream: u64, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream + 64 * attempt as u64);
    rng
}

fn normal_vec(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| StandardNormal.sample(rng))
}

fn normal_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Fill row-major so the draw order does not depend on the storage layout.
    let vals: Vec<f64> = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    DMatrix::from_row_slice(rows, cols, &vals)
}

fn uniform_vec(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> DVector<f64> {
    let dist = Uniform::new(lo, hi).expect("valid range");
    DVector::from_fn(len, |_, _| dist.sample(rng))
}

fn degenerate(reason: impl Into<String>) -> FacetError {
    FacetError::DegenerateDraw {
        attempts: MAX_ATTEMPTS,
        reason: reason.into(),
    }
}

/// `A^T y + s` for given plant vectors.
pub fn objective_from_plant(a: &DMatrix<f64>, y_bar: &DVector<f64>, s_bar: &DVector<f64>) -> DVector<f64> {
    a.tr_mul(y_bar) + s_bar
}

/// `c = A^T y + s` with `y ~ N(0, I)` and `s ~ U[0.1, 1.1]`, so `(y, s)` is
/// a strictly feasible dual point.
pub fn make_objective(lp: &StandardFormLP, seed: u64) -> ObjectivePlant {
    let mut rng = rng_for(seed, stream::OBJECTIVE, 0);
    let y_bar = normal_vec(&mut rng, lp.m());
    let s_bar = uniform_vec(&mut rng, lp.n(), 0.1, 1.1);
    let c = objective_from_plant(&lp.a, &y_bar, &s_bar);
    ObjectivePlant {
        c: c.as_slice().to_vec(),
        y_bar: y_bar.as_slice().to_vec(),
        s_bar: s_bar.as_slice().to_vec(),
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<PlantedInstance> {
    match spec.kind {
        GeneratorKind::PrimalNoSlater => generate_primal_no_slater(spec),
        GeneratorKind::PrimalSlater => {
            let base = generate_primal_no_slater(&GeneratorSpec {
                kind: GeneratorKind::PrimalNoSlater,
                ..*spec
            })?;
            to_slater_counterpart(&base, spec.seed)
        }
        GeneratorKind::DualNoSlater => generate_dual_no_slater(spec),
    }
}

/// Primal system whose feasible set has exactly `r` coordinates that can be
/// positive; the other `n - r` are exposed by a planted `y`. With `r = n`
/// there is nothing to expose and `A` has rank `m - 1`.
pub fn generate_primal_no_slater(spec: &GeneratorSpec) -> Result<PlantedInstance> {
    spec.check()?;
    if spec.kind != GeneratorKind::PrimalNoSlater {
        return Err(FacetError::InvalidSpec("expected kind primal-no-slater".into()));
    }
    let GeneratorSpec { m, n, r, seed, .. } = *spec;
    let mut last_reason = String::new();

    for attempt in 0..MAX_ATTEMPTS {
        let y = normal_vec(&mut rng_for(seed, stream::Y, attempt), m);
        let Some(null_y) = linalg::orthogonal_complement(&y) else {
            last_reason = "zero y".into();
            continue;
        };
        let rmat = normal_mat(&mut rng_for(seed, stream::R, attempt), m - 1, r);
        if m > 1 && linalg::numerical_rank(&rmat) < (m - 1).min(r) {
            last_reason = "R is rank deficient".into();
            continue;
        }
        let a1 = &null_y * &rmat;
        let v_hat = uniform_vec(&mut rng_for(seed, stream::V_HAT, attempt), r, 0.5, 1.5);
        let b = &a1 * &v_hat;

        let mut a2 = normal_mat(&mut rng_for(seed, stream::A2, attempt), m, n - r);
        let mut ok = true;
        for mut col in a2.column_iter_mut() {
            let z = col.dot(&y);
            if z.abs() <= 1e-3 * y.norm() * col.norm() {
                ok = false;
                break;
            }
            if z < 0.0 {
                col.neg_mut();
            }
        }
        if !ok {
            last_reason = "A2 column nearly orthogonal to y".into();
            continue;
        }

        let mut unpermuted = DMatrix::zeros(m, n);
        unpermuted.columns_mut(0, r).copy_from(&a1);
        unpermuted.columns_mut(r, n - r).copy_from(&a2);
        let expected_rank = if r < n { m } else { m - 1 };
        if linalg::numerical_rank(&unpermuted) < expected_rank {
            last_reason = "A lost rank".into();
            continue;
        }

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng_for(seed, stream::PERM, attempt));
        let a = linalg::select_columns(&unpermuted, &perm);
        let x_hat = DVector::from_fn(n, |k, _| if perm[k] < r { v_hat[perm[k]] } else { 0.0 });
        let support: Vec<usize> = {
            let mut s: Vec<usize> = (0..n).filter(|&k| perm[k] >= r).collect();
            s.sort_unstable();
            s
        };

        // Self-checks on the plant.
        let scale = (1.0 + linalg::matrix_inf_entry(&a)) * y.norm();
        let a1ty = linalg::inf_norm(&a1.tr_mul(&y));
        let bty = b.dot(&y).abs();
        if a1ty > tolerance::CERT * scale || bty > tolerance::CERT * (1.0 + b.norm()) * y.norm() {
            last_reason = "planted certificate identities failed".into();
            continue;
        }
        if a2.tr_mul(&y).iter().any(|v| *v <= 0.0) {
            last_reason = "A2^T y not positive".into();
            continue;
        }
        debug_assert_eq!(x_hat.iter().filter(|v| **v > 0.0).count(), r);

        let mut lp = StandardFormLP::new(a, b, DVector::zeros(n))?;
        let objective = make_objective(&lp, seed);
        lp.c = DVector::from_column_slice(&objective.c);

        return Ok(PlantedInstance {
            lp,
            plant: PlantMetadata {
                spec: *spec,
                planted_primal_certificate: (r < n).then(|| PlantedPrimalCertificate {
                    y: y.as_slice().to_vec(),
                    support,
                }),
                planted_dual_certificate: None,
                planted_feasible_point: x_hat.as_slice().to_vec(),
                column_permutation: perm,
                objective: Some(objective),
                planted_dual_slack: None,
            },
        });
    }
    Err(degenerate(last_reason))
}

/// `b = A x` for an explicit positive `x`.
pub fn slater_rhs(a: &DMatrix<f64>, x_circ: &DVector<f64>) -> DVector<f64> {
    a * x_circ
}

/// Same `A` and `c`, right-hand side replaced by `A x°` with `x° ~ U[0.5, 1.5]`.
pub fn to_slater_counterpart(inst: &PlantedInstance, seed: u64) -> Result<PlantedInstance> {
    let mut rng = rng_for(seed, stream::SLATER, 0);
    let x_circ = uniform_vec(&mut rng, inst.lp.n(), 0.5, 1.5);
    let lp = inst.lp.with_rhs(slater_rhs(&inst.lp.a, &x_circ))?;
    Ok(PlantedInstance {
        lp,
        plant: PlantMetadata {
            spec: GeneratorSpec {
                kind: GeneratorKind::PrimalSlater,
                ..inst.plant.spec
            },
            planted_primal_certificate: None,
            planted_dual_certificate: inst.plant.planted_dual_certificate.clone(),
            planted_feasible_point: x_circ.as_slice().to_vec(),
            column_permutation: inst.plant.column_permutation.clone(),
            objective: inst.plant.objective.clone(),
            planted_dual_slack: inst.plant.planted_dual_slack.clone(),
        },
    })
}

/// Dual slack set whose slacks vanish identically on a planted support of
/// size `n - r`, witnessed by `w >= 0` with `A w = 0`, `c^T w = 0`. With
/// `r = n` no certificate is planted and the dual is strictly feasible.
pub fn generate_dual_no_slater(spec: &GeneratorSpec) -> Result<PlantedInstance> {
    spec.check()?;
    if spec.kind != GeneratorKind::DualNoSlater {
        return Err(FacetError::InvalidSpec("expected kind dual-no-slater".into()));
    }
    let GeneratorSpec { m, n, r, seed, .. } = *spec;
    let k = n - r;
    let mut last_reason = String::new();

    for attempt in 0..MAX_ATTEMPTS {
        let mut wrng = rng_for(seed, stream::W, attempt);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut wrng);
        let mut support: Vec<usize> = idx[..k].to_vec();
        support.sort_unstable();
        let wdist = Uniform::new(0.5, 1.5).expect("valid range");
        let mut w = DVector::zeros(n);
        for &j in &support {
            w[j] = wdist.sample(&mut wrng);
        }

        let mut arng = rng_for(seed, stream::R, attempt);
        let a = if k > 0 {
            let null_w = linalg::orthogonal_complement(&w).expect("w is nonzero");
            normal_mat(&mut arng, m, n - 1) * null_w.transpose()
        } else {
            normal_mat(&mut arng, m, n)
        };
        if linalg::numerical_rank(&a) < m {
            last_reason = "A is rank deficient".into();
            continue;
        }

        let mut srng = rng_for(seed, stream::S, attempt);
        let sdist = Uniform::new(0.1, 1.1).expect("valid range");
        let mut s = DVector::zeros(n);
        for j in 0..n {
            let v = sdist.sample(&mut srng);
            if support.binary_search(&j).is_err() {
                s[j] = v;
            }
        }
        let y = normal_vec(&mut rng_for(seed, stream::Y, attempt), m);
        let c = a.tr_mul(&y) + &s;
        let x_hat = uniform_vec(&mut rng_for(seed, stream::X_HAT, attempt), n, 0.5, 1.5);
        let b = &a * &x_hat;

        if k > 0 {
            let scale = (1.0 + linalg::matrix_inf_entry(&a)) * w.norm();
            let aw = linalg::inf_norm(&(&a * &w));
            let cw = c.dot(&w).abs();
            let ws = w.dot(&s);
            if aw > tolerance::CERT * scale
                || cw > tolerance::CERT * (1.0 + c.norm()) * w.norm()
                || ws != 0.0
            {
                last_reason = "planted dual identities failed".into();
                continue;
            }
        }
        let lp = StandardFormLP::new(a, b, c.clone())?;
        return Ok(PlantedInstance {
            lp,
            plant: PlantMetadata {
                spec: *spec,
                planted_primal_certificate: None,
                planted_dual_certificate: (k > 0).then(|| PlantedDualCertificate {
                    w: w.as_slice().to_vec(),
                    support,
                }),
                planted_feasible_point: x_hat.as_slice().to_vec(),
                column_permutation: (0..n).collect(),
                objective: Some(ObjectivePlant {
                    c: c.as_slice().to_vec(),
                    y_bar: y.as_slice().to_vec(),
                    s_bar: s.as_slice().to_vec(),
                }),
                planted_dual_slack: Some(s.as_slice().to_vec()),
            },
        });
    }
    Err(degenerate(last_reason))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facial::{find_dual_exposing_vector, find_exposing_vector};
    use crate::golden;
    use crate::lp::is_strictly_feasible_point;

    #[test]
    fn primal_plant_is_recovered() {
        let spec = GeneratorSpec::new(GeneratorKind::PrimalNoSlater, 2, 5, 2, 1);
        let inst = generate(&spec).unwrap();
        let cert = find_exposing_vector(&inst.lp).unwrap().unwrap();
        assert_eq!(cert.support, inst.planted_exposed_columns());
        assert_eq!(cert.support.len(), 3);
        let y = DVector::from_column_slice(&inst.plant.planted_primal_certificate.as_ref().unwrap().y);
        assert!(inst.lp.b.dot(&y).abs() < 1e-12);
    }

    #[test]
    fn full_r_has_slater_point() {
        let spec = GeneratorSpec::new(GeneratorKind::PrimalNoSlater, 3, 5, 5, 4);
        let inst = generate(&spec).unwrap();
        assert!(inst.plant.planted_primal_certificate.is_none());
        assert!(is_strictly_feasible_point(&inst.lp, &inst.planted_feasible_point()));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GeneratorSpec::new(GeneratorKind::PrimalNoSlater, 4, 10, 6, 99);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.lp.digest(), b.lp.digest());
        assert_eq!(a.plant, b.plant);
        let other = generate(&GeneratorSpec { seed: 100, ..spec }).unwrap();
        assert_ne!(a.lp.digest(), other.lp.digest());
    }

    #[test]
    fn objective_plant_identity() {
        let lp = StandardFormLP::from_rows(2, 2, &[1., 0., 0., 1.], &[1., 1.], &[0., 0.]).unwrap();
        let c = objective_from_plant(&lp.a, &DVector::zeros(2), &DVector::from_element(2, 1.0));
        assert_eq!(c.as_slice(), &[1.0, 1.0]);
        let plant = make_objective(&lp, 3);
        let c = DVector::from_column_slice(&plant.c);
        let s = c - lp.a.tr_mul(&DVector::from_column_slice(&plant.y_bar));
        assert!(s.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn slater_rhs_is_row_sums() {
        let lp = golden::no_slater();
        let b = slater_rhs(&lp.a, &DVector::from_element(5, 1.0));
        assert_eq!(b.as_slice(), &[12.0, 3.0]);
    }

    #[test]
    fn slater_counterpart_has_interior_point() {
        let spec = GeneratorSpec::new(GeneratorKind::PrimalSlater, 3, 8, 4, 11);
        let inst = generate(&spec).unwrap();
        assert!(is_strictly_feasible_point(&inst.lp, &inst.planted_feasible_point()));
        assert!(find_exposing_vector(&inst.lp).unwrap().is_none());
    }

    #[test]
    fn dual_plant_is_recovered() {
        let spec = GeneratorSpec::new(GeneratorKind::DualNoSlater, 2, 6, 3, 7);
        let inst = generate(&spec).unwrap();
        let planted = inst.plant.planted_dual_certificate.clone().unwrap();
        assert_eq!(planted.support.len(), 3);
        let w = DVector::from_column_slice(&planted.w);
        assert!(inst.lp.c.dot(&w).abs() < 1e-10);
        let cert = find_dual_exposing_vector(&inst.lp).unwrap().unwrap();
        assert_eq!(cert.support, planted.support);
    }

    #[test]
    fn dual_single_spike() {
        let spec = GeneratorSpec::new(GeneratorKind::DualNoSlater, 2, 6, 5, 2);
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.plant.planted_dual_certificate.unwrap().support.len(), 1);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate(&GeneratorSpec::new(GeneratorKind::PrimalNoSlater, 5, 5, 2, 0)).is_err());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::DualNoSlater, 2, 5, 0, 0)).is_err());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::DualNoSlater, 2, 5, 6, 0)).is_err());
    }
}
