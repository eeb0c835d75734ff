//! Experiment protocols: normal-matrix conditioning, right-hand-side
//! perturbation, degenerate simplex pivots, and the degeneracy theorem suite.
//!
//! Every protocol returns [`ReportRow`]s in a fixed order regardless of how
//! the cells were scheduled, so the CSV written by [`write_report`] is
//! byte-identical across runs with the same configuration.
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `protocol` | `condition`, `perturbation`, `degiter` or `theorem` |
//! | `instance` | generator kind or golden instance name |
//! | `m`, `n`, `r` | instance size |
//! | `seed` | generator seed (empty for averages and goldens) |
//! | `family` | `no-slater`, `slater`, `facially-reduced`, `certificate`, `range`, `raw`, `average` or the theorem branch |
//! | `status` | solver or check status |
//! | `epsilon`, `perturbation_norm` | perturbation size and `eps * ||db||` |
//! | `kappa` | condition number of `A D A^T` at the returned iterate (`inf` when singular) |
//! | `kkt_primal`, `kkt_dual`, `kkt_complementarity` | relative KKT residuals |
//! | `iterations` | interior-point iterations |
//! | `reduced_primal` | primal residual of the facially reduced solve |
//! | `farkas` | explicit infeasibility certificate verified |
//! | `total_pivots`, `degenerate_pivots`, `degiter_percent` | simplex pivot counts |
//! | `certificate`, `all_degenerate`, `max_positive`, `min_degree`, `degree_bound`, `support_recovered`, `witness_ok` | theorem-suite facts |
//! | `pass` | all assertions for the row held |

use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FacetError, Result};
use crate::facial::{facially_reduce, find_exposing_vector, FacialReduction};
use crate::generators::{generate_dual_no_slater, generate_primal_no_slater, to_slater_counterpart};
use crate::generators::{GeneratorKind, GeneratorSpec, PlantedInstance};
use crate::golden;
use crate::linalg;
use crate::lp::{enumerate_bfs, is_strictly_feasible_point, StandardFormLP};
use crate::solvers::{
    solve_ipm, solve_simplex, IpmOptions, IpmResult, PivotRule, SimplexStatus, SimplexVariant,
};
use crate::tolerance;

pub const SEED_ENV: &str = "FACET_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Condition,
    Perturbation,
    Degiter,
    Theorem,
}

impl Protocol {
    pub fn tag(self) -> &'static str {
        match self {
            Protocol::Condition => "condition",
            Protocol::Perturbation => "perturbation",
            Protocol::Degiter => "degiter",
            Protocol::Theorem => "theorem",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub m: usize,
    pub n: usize,
    /// Fixed face dimension; the condition protocol draws `r` per seed from
    /// `r_range` when this is absent.
    pub r: Option<usize>,
    /// Fractions of `n`.
    pub r_range: (f64, f64),
    /// `r / n` in percent, for the degenerate-pivot protocol.
    pub ratios: Vec<u32>,
    pub seeds: usize,
    pub base_seed: u64,
    pub epsilons: Vec<f64>,
    pub rule: PivotRule,
    /// Upper limits on the random sizes of the theorem suite.
    pub max_m: usize,
    pub max_n: usize,
    pub include_golden: bool,
    pub output: Option<String>,
}

/// `count` values spaced evenly in log scale from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
        .collect()
}

impl ExperimentConfig {
    pub fn defaults(protocol: Protocol) -> Self {
        let base = Self {
            protocol,
            m: 50,
            n: 150,
            r: None,
            r_range: (0.2, 0.9),
            ratios: vec![60, 70, 80, 90, 100],
            seeds: 10,
            base_seed: 0,
            epsilons: log_grid(1e-6, 1e-1, 11),
            rule: PivotRule::Dantzig,
            max_m: 5,
            max_n: 12,
            include_golden: true,
            output: None,
        };
        match protocol {
            Protocol::Condition => Self { seeds: 20, ..base },
            Protocol::Perturbation => Self {
                m: 20,
                n: 60,
                r: Some(45),
                seeds: 10,
                ..base
            },
            Protocol::Degiter => Self { m: 50, n: 200, ..base },
            Protocol::Theorem => Self {
                m: 5,
                n: 12,
                seeds: 500,
                ..base
            },
        }
    }

    /// Reads a TOML config. Only `protocol` is required; the rest falls back
    /// to the protocol defaults. `FACET_SEED` overrides `base_seed`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| FacetError::InvalidConfig(e.to_string()))?;
        let protocol: Protocol = table
            .get("protocol")
            .cloned()
            .ok_or_else(|| FacetError::InvalidConfig("missing `protocol`".into()))?
            .try_into()
            .map_err(|e: toml::de::Error| FacetError::InvalidConfig(e.to_string()))?;
        let defaults = toml::Table::try_from(Self::defaults(protocol))
            .map_err(|e| FacetError::InvalidConfig(e.to_string()))?;
        for (k, v) in defaults {
            table.entry(k).or_insert(v);
        }
        let mut cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| FacetError::InvalidConfig(e.to_string()))?;
        cfg.apply_env()?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.base_seed = v
                .trim()
                .parse()
                .map_err(|_| FacetError::InvalidConfig(format!("{SEED_ENV}={v:?} is not a u64")))?;
        }
        Ok(())
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(FacetError::InvalidConfig(msg.to_string()));
        if self.seeds == 0 {
            return bad("seeds must be at least 1");
        }
        if self.m == 0 || self.m >= self.n {
            return bad("need 1 <= m < n");
        }
        match self.protocol {
            Protocol::Condition => {
                let (lo, hi) = self.r_range;
                if self.r.is_none() && !(0.0 < lo && lo <= hi && hi < 1.0) {
                    return bad("r_range must satisfy 0 < lo <= hi < 1");
                }
            }
            Protocol::Perturbation => {
                if self.epsilons.is_empty() {
                    return bad("epsilon grid is empty");
                }
                if self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                    return bad("epsilons must be positive and finite");
                }
                if self.r.is_none_or(|r| r == 0 || r >= self.n) {
                    return bad("perturbation needs 1 <= r < n");
                }
            }
            Protocol::Degiter => {
                if self.ratios.is_empty() {
                    return bad("ratio grid is empty");
                }
                if self.ratios.iter().any(|p| *p == 0 || *p > 100) {
                    return bad("ratios are percentages in 1..=100");
                }
            }
            Protocol::Theorem => {
                if self.max_m < 2 || self.max_n <= self.max_m {
                    return bad("theorem sizes need 2 <= max_m < max_n");
                }
            }
        }
        if let Some(r) = self.r {
            if r == 0 || r > self.n {
                return bad("need 1 <= r <= n");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportRow {
    pub protocol: &'static str,
    pub instance: String,
    pub m: usize,
    pub n: usize,
    pub r: Option<usize>,
    pub seed: Option<u64>,
    pub family: String,
    pub status: String,
    pub epsilon: Option<f64>,
    pub perturbation_norm: Option<f64>,
    pub kappa: Option<f64>,
    pub kkt_primal: Option<f64>,
    pub kkt_dual: Option<f64>,
    pub kkt_complementarity: Option<f64>,
    pub iterations: Option<usize>,
    pub reduced_primal: Option<f64>,
    pub farkas: Option<bool>,
    pub total_pivots: Option<usize>,
    pub degenerate_pivots: Option<usize>,
    pub degiter_percent: Option<f64>,
    pub certificate: Option<bool>,
    pub all_degenerate: Option<bool>,
    pub max_positive: Option<usize>,
    pub min_degree: Option<usize>,
    pub degree_bound: Option<usize>,
    pub support_recovered: Option<bool>,
    pub witness_ok: Option<bool>,
    pub pass: Option<bool>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ReportRow {
    fn new(protocol: Protocol, instance: &str, m: usize, n: usize, family: &str) -> Self {
        Self {
            protocol: protocol.tag(),
            instance: instance.to_string(),
            m,
            n,
            family: family.to_string(),
            ..Self::default()
        }
    }

    fn record_ipm(&mut self, outcome: &Result<IpmResult>) {
        let res = match outcome {
            Ok(res) => {
                self.status = if res.converged { "converged" } else { "not-converged" }.into();
                res
            }
            Err(FacetError::NumericalBreakdown { last, .. }) => {
                self.status = "breakdown".into();
                last
            }
            Err(e) => {
                self.status = format!("error: {e}");
                return;
            }
        };
        self.kappa = Some(res.normal_condition);
        self.kkt_primal = Some(res.kkt.primal);
        self.kkt_dual = Some(res.kkt.dual);
        self.kkt_complementarity = Some(res.kkt.complementarity);
        self.iterations = Some(res.iterations);
    }
}

pub const CSV_COLUMNS: &[&str] = &[
    "protocol",
    "instance",
    "m",
    "n",
    "r",
    "seed",
    "family",
    "status",
    "epsilon",
    "perturbation_norm",
    "kappa",
    "kkt_primal",
    "kkt_dual",
    "kkt_complementarity",
    "iterations",
    "reduced_primal",
    "farkas",
    "total_pivots",
    "degenerate_pivots",
    "degiter_percent",
    "certificate",
    "all_degenerate",
    "max_positive",
    "min_degree",
    "degree_bound",
    "support_recovered",
    "witness_ok",
    "pass",
];

/// Writes rows as CSV with a header, `.` decimals, shortest round-trip floats.
pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn report_to_string(rows: &[ReportRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_report(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = ranks(x);
    let ry = ranks(y);
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn experiment_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1000 + stream);
    rng
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    cfg.check()?;
    match cfg.protocol {
        Protocol::Condition => run_condition_experiment(cfg),
        Protocol::Perturbation => run_perturbation_protocol(cfg),
        Protocol::Degiter => run_degeneracy_experiment(cfg),
        Protocol::Theorem => verify_theorem_suite(cfg),
    }
}

fn timed_ipm(lp: &StandardFormLP) -> (Result<IpmResult>, Duration) {
    let start = Instant::now();
    let res = solve_ipm(lp, &IpmOptions::default());
    (res, start.elapsed())
}

/// Face dimension used by the condition protocol for one seed.
pub fn condition_r(cfg: &ExperimentConfig, seed: u64) -> usize {
    if let Some(r) = cfg.r {
        return r;
    }
    let lo = ((cfg.r_range.0 * cfg.n as f64).ceil() as usize).clamp(1, cfg.n - 1);
    let hi = ((cfg.r_range.1 * cfg.n as f64).floor() as usize).clamp(lo, cfg.n - 1);
    experiment_rng(seed, 1).random_range(lo..=hi)
}

/// Three rows per seed: the instance without a Slater point, its Slater
/// counterpart, and its facial reduction, each solved by the interior-point method.
pub fn run_condition_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|k| cfg.base_seed + k).collect();
    let rows: Vec<Vec<ReportRow>> = seeds
        .par_iter()
        .map(|&seed| condition_cell(cfg, seed))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn condition_cell(cfg: &ExperimentConfig, seed: u64) -> Vec<ReportRow> {
    let r = condition_r(cfg, seed);
    let spec = GeneratorSpec::new(GeneratorKind::PrimalNoSlater, cfg.m, cfg.n, r, seed);
    let tag = |family: &str| {
        let mut row = ReportRow::new(Protocol::Condition, "primal-no-slater", cfg.m, cfg.n, family);
        row.r = Some(r);
        row.seed = Some(seed);
        row
    };
    let families = ["no-slater", "slater", "facially-reduced"];
    let base = match generate_primal_no_slater(&spec) {
        Ok(b) => b,
        Err(e) => {
            return families
                .iter()
                .map(|f| {
                    let mut row = tag(f);
                    row.status = format!("error: {e}");
                    row
                })
                .collect()
        }
    };

    let mut out = Vec::with_capacity(3);
    let mut row = tag(families[0]);
    let (res, t) = timed_ipm(&base.lp);
    row.record_ipm(&res);
    row.wall_time = t;
    out.push(row);

    let mut row = tag(families[1]);
    match to_slater_counterpart(&base, seed) {
        Ok(slater) => {
            let (res, t) = timed_ipm(&slater.lp);
            row.record_ipm(&res);
            row.wall_time = t;
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    out.push(row);

    let mut row = tag(families[2]);
    match facially_reduce(&base.lp).and_then(|red| red.reduced_lp(&base.lp)) {
        Ok(reduced) => {
            let (res, t) = timed_ipm(&reduced);
            row.record_ipm(&res);
            row.wall_time = t;
            row.m = reduced.m();
            row.n = reduced.n();
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    out.push(row);
    out
}

/// Generates `cfg.seeds` instances without a Slater point and runs the
/// perturbation study on each.
pub fn run_perturbation_protocol(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let r = cfg
        .r
        .ok_or_else(|| FacetError::InvalidConfig("perturbation needs r".into()))?;
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|k| cfg.base_seed + k).collect();
    let rows: Vec<Result<Vec<ReportRow>>> = seeds
        .par_iter()
        .map(|&seed| {
            let spec = GeneratorSpec::new(GeneratorKind::PrimalNoSlater, cfg.m, cfg.n, r, seed);
            let inst = generate_primal_no_slater(&spec)?;
            let red = facially_reduce(&inst.lp)?;
            let mut rows = run_perturbation_experiment_seeded(&inst.lp, &red, cfg, seed)?;
            for row in &mut rows {
                row.r = Some(r);
                row.seed = Some(seed);
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Two rows per epsilon: `b - eps*db` with `db` the exposing certificate
/// (leaves the feasible set empty) and `b - eps*AVd` with `d` random (stays
/// feasible for small eps). Both directions have unit Euclidean norm.
pub fn run_perturbation_experiment(
    lp: &StandardFormLP,
    red: &FacialReduction,
    cfg: &ExperimentConfig,
) -> Result<Vec<ReportRow>> {
    run_perturbation_experiment_seeded(lp, red, cfg, cfg.base_seed)
}

fn run_perturbation_experiment_seeded(
    lp: &StandardFormLP,
    red: &FacialReduction,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<ReportRow>> {
    let cert = red.certificate.as_ref().ok_or_else(|| {
        FacetError::InvalidConfig("perturbation needs an instance without a Slater point".into())
    })?;
    let y = DVector::from_column_slice(&cert.y);
    let db = &y / y.norm();

    let av = red.av(lp);
    let mut rng = experiment_rng(seed, 2);
    let d = DVector::from_fn(av.ncols(), |_, _| StandardNormal.sample(&mut rng));
    let bar = &av * d;
    let db_bar = &bar / bar.norm();

    let reduced = red.reduced_lp(lp)?;
    let aty = lp.a.tr_mul(&db);
    let aty_ok = aty.min() >= -tolerance::CERT * (1.0 + linalg::matrix_inf_entry(&lp.a));

    let cells: Vec<(f64, bool)> = cfg
        .epsilons
        .iter()
        .flat_map(|&e| [(e, true), (e, false)])
        .collect();
    let rows: Vec<Result<ReportRow>> = cells
        .par_iter()
        .map(|&(eps, certificate_dir)| {
            let dir = if certificate_dir { &db } else { &db_bar };
            let family = if certificate_dir { "certificate" } else { "range" };
            let mut row = ReportRow::new(Protocol::Perturbation, "primal-no-slater", lp.m(), lp.n(), family);
            row.epsilon = Some(eps);
            row.perturbation_norm = Some(eps * dir.norm());
            let b_eps = &lp.b - eps * dir;
            let perturbed = lp.with_rhs(b_eps.clone())?;
            let (res, t) = timed_ipm(&perturbed);
            row.record_ipm(&res);
            row.wall_time = t;
            if certificate_dir {
                row.farkas = Some(aty_ok && b_eps.dot(&db) < 0.0);
            } else {
                let b_red = linalg::select_entries(&b_eps, &red.kept_rows);
                let red_lp = reduced.with_rhs(b_red)?;
                if let Ok(res) = solve_ipm(&red_lp, &IpmOptions::default()) {
                    row.reduced_primal = Some(res.kkt.primal);
                }
            }
            Ok(row)
        })
        .collect();
    rows.into_iter().collect()
}

/// Dual simplex on dual instances whose slacks vanish on `n - r` coordinates,
/// one row per (ratio, seed) followed by one average row per ratio.
pub fn run_degeneracy_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let mut cells = Vec::new();
    for &ratio in &cfg.ratios {
        let r = ((ratio as usize * cfg.n) / 100).clamp(1, cfg.n);
        for k in 0..cfg.seeds as u64 {
            cells.push((r, cfg.base_seed + k));
        }
    }
    let raw: Vec<ReportRow> = cells
        .par_iter()
        .map(|&(r, seed)| {
            let mut row = ReportRow::new(Protocol::Degiter, "dual-no-slater", cfg.m, cfg.n, "raw");
            row.r = Some(r);
            row.seed = Some(seed);
            let spec = GeneratorSpec::new(GeneratorKind::DualNoSlater, cfg.m, cfg.n, r, seed);
            match generate_dual_no_slater(&spec) {
                Ok(inst) => {
                    let start = Instant::now();
                    let res = solve_simplex(&inst.lp, cfg.rule, SimplexVariant::Dual);
                    row.status = status_tag(res.status).into();
                    row.total_pivots = Some(res.total_pivots);
                    row.degenerate_pivots = Some(res.degenerate_pivots);
                    row.degiter_percent = Some(res.degiter_percent);
                    row.wall_time = start.elapsed();
                }
                Err(e) => row.status = format!("error: {e}"),
            }
            row
        })
        .collect();

    let mut out = raw.clone();
    for &ratio in &cfg.ratios {
        let r = ((ratio as usize * cfg.n) / 100).clamp(1, cfg.n);
        let cell: Vec<&ReportRow> = raw.iter().filter(|row| row.r == Some(r)).collect();
        let vals: Vec<f64> = cell.iter().filter_map(|row| row.degiter_percent).collect();
        let mut row = ReportRow::new(Protocol::Degiter, "dual-no-slater", cfg.m, cfg.n, "average");
        row.r = Some(r);
        row.status = if vals.len() == cell.len() { "ok".into() } else { format!("{} of {} solved", vals.len(), cell.len()) };
        if !vals.is_empty() {
            row.degiter_percent = Some(vals.iter().sum::<f64>() / vals.len() as f64);
            row.total_pivots = Some(cell.iter().filter_map(|r| r.total_pivots).sum::<usize>() / vals.len());
            row.degenerate_pivots =
                Some(cell.iter().filter_map(|r| r.degenerate_pivots).sum::<usize>() / vals.len());
        }
        row.wall_time = cell.iter().map(|r| r.wall_time).sum();
        out.push(row);
    }
    Ok(out)
}

fn status_tag(s: SimplexStatus) -> &'static str {
    match s {
        SimplexStatus::Optimal => "optimal",
        SimplexStatus::Unbounded => "unbounded",
        SimplexStatus::Infeasible => "infeasible",
        SimplexStatus::IterationLimit => "iteration-limit",
    }
}

/// Random theorem-suite size for one seed.
pub fn theorem_spec(cfg: &ExperimentConfig, seed: u64) -> GeneratorSpec {
    let mut rng = experiment_rng(seed, 3);
    let m = rng.random_range(2..=cfg.max_m);
    let n = rng.random_range(m + 1..=cfg.max_n);
    let r = rng.random_range(1..n);
    GeneratorSpec::new(GeneratorKind::PrimalNoSlater, m, n, r, seed)
}

/// Runs the degeneracy assertions on one instance. `planted` is the exposed
/// set the generator planted, when known.
pub fn check_theorems(lp: &StandardFormLP, planted: Option<&[usize]>) -> Result<ReportRow> {
    let mut row = ReportRow::new(Protocol::Theorem, "", lp.m(), lp.n(), "");
    let m = lp.m();
    let cert = find_exposing_vector(lp)?;
    let bfs = enumerate_bfs(lp)?;
    row.certificate = Some(cert.is_some());
    row.all_degenerate = Some(bfs.all_degenerate);
    row.max_positive = Some(bfs.max_positive_entries());
    row.min_degree = Some(bfs.min_degeneracy_degree());

    match &cert {
        Some(c) => {
            row.family = "degenerate".into();
            let red = facially_reduce(lp)?;
            let rank_av = linalg::numerical_rank(&red.av(lp));
            let bound = m - rank_av;
            row.degree_bound = Some(bound);
            row.r = Some(red.kept_columns.len());
            let mut ok = bfs.all_degenerate
                && bfs.max_positive_entries() < m
                && bfs.min_degeneracy_degree() >= bound;
            if let Some(p) = planted {
                let recovered = c.support == p;
                row.support_recovered = Some(recovered);
                ok &= recovered;
            }
            row.pass = Some(ok);
        }
        None => {
            if let Some(p) = planted {
                row.support_recovered = Some(p.is_empty());
            }
            if bfs.all_degenerate {
                row.family = "converse-gap".into();
                row.pass = Some(planted.is_none_or(|p| p.is_empty()));
            } else {
                row.family = "strictly-feasible".into();
                let red = facially_reduce(lp)?;
                let witness = red
                    .slater_witness
                    .as_ref()
                    .map(|w| red.lift(w))
                    .transpose()?;
                let ok = witness.is_some_and(|x| is_strictly_feasible_point(lp, &x));
                row.witness_ok = Some(ok);
                row.pass = Some(ok && planted.is_none_or(|p| p.is_empty()));
            }
        }
    }
    row.status = if row.pass == Some(true) { "pass" } else { "fail" }.into();
    Ok(row)
}

/// Theorem rows for the three golden systems (when enabled) followed by one
/// row per seeded instance.
pub fn verify_theorem_suite(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let mut out = Vec::new();
    if cfg.include_golden {
        for (name, lp) in [
            ("golden-no-slater", golden::no_slater()),
            ("golden-slater-nondegenerate", golden::slater_nondegenerate()),
            ("golden-slater-all-degenerate", golden::slater_all_degenerate()),
        ] {
            let mut row = theorem_row(&lp, None);
            row.instance = name.into();
            out.push(row);
        }
    }
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|k| cfg.base_seed + k).collect();
    let rows: Vec<ReportRow> = seeds
        .par_iter()
        .map(|&seed| {
            let spec = theorem_spec(cfg, seed);
            let mut row = match generate_primal_no_slater(&spec) {
                Ok(inst) => theorem_row(&inst.lp, Some(&inst)),
                Err(e) => {
                    let mut row = ReportRow::new(Protocol::Theorem, "", spec.m, spec.n, "error");
                    row.status = format!("error: {e}");
                    row.pass = Some(false);
                    row
                }
            };
            row.instance = "primal-no-slater".into();
            row.seed = Some(seed);
            row.r = Some(spec.r);
            row
        })
        .collect();
    out.extend(rows);
    Ok(out)
}

fn theorem_row(lp: &StandardFormLP, inst: Option<&PlantedInstance>) -> ReportRow {
    let planted = inst.map(|i| i.planted_exposed_columns());
    let start = Instant::now();
    let mut row = match check_theorems(lp, planted.as_deref()) {
        Ok(row) => row,
        Err(e) => {
            let mut row = ReportRow::new(Protocol::Theorem, "", lp.m(), lp.n(), "error");
            row.status = format!("error: {e}");
            row.pass = Some(false);
            row
        }
    };
    row.wall_time = start.elapsed();
    row
}

/// Rows of a theorem run whose assertions failed.
pub fn assertion_failures(rows: &[ReportRow]) -> Vec<&ReportRow> {
    rows.iter()
        .filter(|r| r.protocol == Protocol::Theorem.tag() && r.pass == Some(false))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_of_monotone_data_is_one() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &[1.0, 10.0, 100.0, 1000.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        // Hand-computed: ranks (1,2,3,4) vs (2,1,4,3) give 1 - 6*4/60 = 0.6.
        assert!((spearman(&x, &[2.0, 1.0, 4.0, 3.0]) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn spearman_ties_use_average_ranks() {
        let r = ranks(&[3.0, 1.0, 3.0]);
        assert_eq!(r, vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-6, 1e-1, 11);
        assert_eq!(g.len(), 11);
        assert!((g[0] - 1e-6).abs() < 1e-18);
        assert!((g[10] - 1e-1).abs() < 1e-15);
        assert!((g[2] - 1e-5).abs() < 1e-17);
    }

    #[test]
    fn config_defaults_fill_gaps() {
        let cfg = ExperimentConfig::from_toml("protocol = \"degiter\"\nseeds = 2\n").unwrap();
        assert_eq!((cfg.m, cfg.n, cfg.seeds), (50, 200, 2));
        assert_eq!(cfg.ratios, vec![60, 70, 80, 90, 100]);
        assert!(ExperimentConfig::from_toml("seeds = 2").is_err());
        assert!(ExperimentConfig::from_toml("protocol = \"degiter\"\nseeds = 0").is_err());
        assert!(ExperimentConfig::from_toml("protocol = \"degiter\"\nratios = []").is_err());
    }

    #[test]
    fn condition_cardinality() {
        let cfg = ExperimentConfig {
            m: 5,
            n: 15,
            seeds: 3,
            ..ExperimentConfig::defaults(Protocol::Condition)
        };
        let rows = run(&cfg).unwrap();
        assert_eq!(rows.len(), 9);
        let fams: Vec<&str> = rows.iter().take(3).map(|r| r.family.as_str()).collect();
        assert_eq!(fams, vec!["no-slater", "slater", "facially-reduced"]);
    }

    #[test]
    fn perturbation_cardinality_and_farkas() {
        let cfg = ExperimentConfig {
            m: 4,
            n: 12,
            r: Some(8),
            seeds: 1,
            epsilons: log_grid(1e-6, 1e-1, 8),
            ..ExperimentConfig::defaults(Protocol::Perturbation)
        };
        let rows = run(&cfg).unwrap();
        assert_eq!(rows.len(), 16);
        assert!(rows
            .iter()
            .filter(|r| r.family == "certificate")
            .all(|r| r.farkas == Some(true)));
    }

    #[test]
    fn degiter_cardinality() {
        let cfg = ExperimentConfig {
            m: 5,
            n: 20,
            seeds: 10,
            ..ExperimentConfig::defaults(Protocol::Degiter)
        };
        let rows = run(&cfg).unwrap();
        assert_eq!(rows.len(), 55);
        assert_eq!(rows.iter().filter(|r| r.family == "average").count(), 5);
    }

    #[test]
    fn golden_theorem_rows() {
        let cfg = ExperimentConfig {
            seeds: 5,
            ..ExperimentConfig::defaults(Protocol::Theorem)
        };
        let rows = run(&cfg).unwrap();
        assert_eq!(rows[0].family, "degenerate");
        assert_eq!(rows[1].family, "strictly-feasible");
        assert_eq!(rows[2].family, "converse-gap");
        assert!(assertion_failures(&rows).is_empty());
    }

    #[test]
    fn failed_theorem_rows_are_reported() {
        let bad = ReportRow {
            protocol: Protocol::Theorem.tag(),
            pass: Some(false),
            ..ReportRow::default()
        };
        let other = ReportRow {
            protocol: Protocol::Degiter.tag(),
            pass: Some(false),
            ..ReportRow::default()
        };
        assert_eq!(assertion_failures(&[bad, other]).len(), 1);
    }

    #[test]
    fn empty_report_has_header() {
        let text = report_to_string(&[]).unwrap();
        let one = report_to_string(&[ReportRow::default()]).unwrap();
        assert_eq!(text.lines().next(), one.lines().next());
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = ExperimentConfig {
            seeds: 4,
            ..ExperimentConfig::defaults(Protocol::Theorem)
        };
        let a = report_to_string(&run(&cfg).unwrap()).unwrap();
        let b = report_to_string(&run(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("protocol,instance,m,n,r,seed,family,status,"));
    }
}
