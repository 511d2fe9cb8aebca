//! Declarative, seeded, parallel experiments with CSV/JSON artifacts.
//!
//! An [`ExperimentSpec`] is a single JSON document naming a kind and its
//! parameters; [`run`] validates it, executes with one RNG substream per
//! work chunk (so worker count never affects results), checks any declared
//! expectations, and emits a [`ResultTable`]. [`catalog`] holds one built-in
//! spec per verification criterion of the lab.

pub mod table;

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use table::{CellValue, ResultTable, SummaryItem};

use crate::abelian::AbelianInvariants;
use crate::altmatrix::{
    self, sample_alt_bounded, sample_and_analyze_padic, AltError, PadicAltConfig,
};
use crate::census;
use crate::linalg::smith::{coker_torsion, det, smith_normal_form};
use crate::linalg::Matrix;
use crate::oracles;
use crate::predictions;
use crate::quadspace::{
    enumerate_lagrangians, intersection_profile, sample_lagrangian, QuadSpace,
};
use crate::rankmodel::{
    self, fit_threshold_slope, CalibrationConfig, CountMode, RankModelError,
};
use crate::rng::{task_id, Substreams};
use crate::rst::{sample_rst, RstConfig, RstError};
use crate::scalar::PrimePower;
use crate::stats::{
    chi_square_uniform_ok, tv_distance, tv_distance_to_density, wilson_interval, Histogram, Z95,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("model error: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<RstError> for ExperimentError {
    fn from(e: RstError) -> Self {
        ExperimentError::Model(e.to_string())
    }
}

impl From<AltError> for ExperimentError {
    fn from(e: AltError) -> Self {
        ExperimentError::Model(e.to_string())
    }
}

impl From<RankModelError> for ExperimentError {
    fn from(e: RankModelError) -> Self {
        ExperimentError::Model(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Spec

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(flatten)]
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentKind {
    Census(CensusParams),
    SelmerDist(SelmerDistParams),
    SelmerAvg(SelmerAvgParams),
    Rst(RstParams),
    Coker(CokerParams),
    RankScaling(RankScalingParams),
    HeightScan(HeightScanParams),
    ShaAverage(ShaAverageParams),
    SquareSha(SquareShaParams),
    ModelEquivalence(ModelEquivalenceParams),
    OracleSuite(OracleSuiteParams),
    Determinism(DeterminismParams),
}

impl ExperimentKind {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ExperimentKind::Census(_) => "census",
            ExperimentKind::SelmerDist(_) => "selmer-dist",
            ExperimentKind::SelmerAvg(_) => "selmer-avg",
            ExperimentKind::Rst(_) => "rst",
            ExperimentKind::Coker(_) => "coker",
            ExperimentKind::RankScaling(_) => "rank-scaling",
            ExperimentKind::HeightScan(_) => "height-scan",
            ExperimentKind::ShaAverage(_) => "sha-average",
            ExperimentKind::SquareSha(_) => "square-sha",
            ExperimentKind::ModelEquivalence(_) => "model-equivalence",
            ExperimentKind::OracleSuite(_) => "oracle-suite",
            ExperimentKind::Determinism(_) => "determinism",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusCheck {
    pub h: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_count: Option<u64>,
    /// |normalized/constant − 1| ≤ this percentage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_within_pct: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusParams {
    pub heights: Vec<u64>,
    #[serde(default)]
    pub checks: Vec<CensusCheck>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelmerDistParams {
    pub primes: Vec<u64>,
    pub half_dim: usize,
    pub samples: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv_max: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrimePowerCase {
    pub p: u64,
    pub e: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelmerAvgParams {
    pub cases: Vec<PrimePowerCase>,
    pub half_dim: usize,
    pub samples: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_err_max_pct: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RstCase {
    pub p: u64,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorankWindow {
    /// P(r = 0) and P(r = 1) must lie within 0.5 ± this.
    pub p01_tol: f64,
    pub ge2_max: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RstParams {
    pub cases: Vec<RstCase>,
    pub samples: u64,
    #[serde(default = "default_e_init")]
    pub e_init: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corank_window: Option<CorankWindow>,
}

fn default_e_init() -> u32 {
    RstConfig::default().e_init
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CokerParams {
    pub n: usize,
    pub p: u64,
    pub pseudo_rank: usize,
    pub samples: u64,
    #[serde(default = "default_e_init")]
    pub e_init: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactCheck {
    pub x: u64,
    pub numerator: u64,
    pub denominator: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingCase {
    pub n: usize,
    pub r: usize,
    pub x_grid: Vec<u64>,
    /// Monte Carlo samples per grid point when enumeration is infeasible.
    pub samples: u64,
    pub slope_expect: f64,
    pub slope_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_at: Option<ExactCheck>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankScalingParams {
    pub cases: Vec<ScalingCase>,
    #[serde(default = "default_enum_budget")]
    pub enumeration_budget: u64,
}

fn default_enum_budget() -> u64 {
    1 << 21
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeightScanParams {
    pub grid: Vec<u64>,
    pub curves_per_h: u64,
    /// When set, scale the per-height counts like the census H^{5/6},
    /// with `curves_per_h` at the largest height.
    #[serde(default)]
    pub proportional: bool,
    #[serde(default = "default_eta_coeff")]
    pub eta_coeff: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    /// Fitted slope of Prob(rk ≥ 2) must land inside this window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_r2_window: Option<(f64, f64)>,
    #[serde(default)]
    pub require_r3_steeper: bool,
}

fn default_eta_coeff() -> f64 {
    1.0
}

fn default_exponent() -> f64 {
    1.0 / 12.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShaAverageParams {
    pub h: u64,
    pub curves: u64,
    #[serde(default = "default_eta_coeff")]
    pub eta_coeff: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    /// log(median-of-means)/log H must land inside this window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_ratio_window: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundedAltCase {
    pub n: usize,
    pub x: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PadicAltCase {
    pub n: usize,
    pub p: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SquareShaParams {
    pub rst_cases: Vec<RstCase>,
    pub rst_samples_each: u64,
    pub padic_cases: Vec<PadicAltCase>,
    pub padic_samples_each: u64,
    pub bounded_cases: Vec<BoundedAltCase>,
    pub bounded_samples_each: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelEquivalenceParams {
    pub p: u64,
    /// Intersection-model half-dimension; also the matrix size for rank 0.
    pub n_even: usize,
    /// Matrix size for the rank-1 comparison.
    pub n_odd: usize,
    pub samples: u64,
    pub tv_max: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleSuiteParams {
    #[serde(default = "default_oracle_samples")]
    pub snf_samples: u64,
    #[serde(default = "default_oracle_samples")]
    pub coker_samples: u64,
    #[serde(default = "default_chi_draws")]
    pub chi_draws: u64,
    #[serde(default = "default_selmer_primes")]
    pub selmer_primes: Vec<u64>,
}

fn default_oracle_samples() -> u64 {
    10_000
}

fn default_chi_draws() -> u64 {
    100_000
}

fn default_selmer_primes() -> Vec<u64> {
    vec![2, 3, 5, 7]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeterminismParams {
    #[serde(default = "default_jobs_pair")]
    pub jobs: (usize, usize),
}

fn default_jobs_pair() -> (usize, usize) {
    (1, 4)
}

// ---------------------------------------------------------------------------
// Validation

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), String> {
        match &self.kind {
            ExperimentKind::Census(p) => {
                if p.heights.is_empty() {
                    return Err("census: empty height grid".into());
                }
                if p.heights.iter().any(|&h| h < 1) {
                    return Err("census: heights must be >= 1".into());
                }
            }
            ExperimentKind::SelmerDist(p) => {
                if !p.primes.iter().all(|&q| is_prime(q)) {
                    return Err("selmer-dist: non-prime p".into());
                }
                if p.half_dim < 1 || p.samples < 1 {
                    return Err("selmer-dist: need half_dim >= 1 and samples >= 1".into());
                }
            }
            ExperimentKind::SelmerAvg(p) => {
                if !p.cases.iter().all(|c| is_prime(c.p) && c.e >= 1) {
                    return Err("selmer-avg: cases need prime p and e >= 1".into());
                }
                if p.half_dim < 1 || p.samples < 1 {
                    return Err("selmer-avg: need half_dim >= 1 and samples >= 1".into());
                }
            }
            ExperimentKind::Rst(p) => {
                if !p.cases.iter().all(|c| is_prime(c.p) && c.n >= 1) {
                    return Err("rst: cases need prime p and n >= 1".into());
                }
                if p.e_init < 2 {
                    return Err("rst: e_init must be >= 2".into());
                }
            }
            ExperimentKind::Coker(p) => {
                if !is_prime(p.p) || p.n < 1 {
                    return Err("coker: need prime p and n >= 1".into());
                }
                if p.n % 2 != p.pseudo_rank % 2 {
                    return Err("coker: pseudo_rank parity must match n".into());
                }
            }
            ExperimentKind::RankScaling(p) => {
                for c in &p.cases {
                    if c.r < 1 || c.r > c.n || c.x_grid.is_empty() {
                        return Err("rank-scaling: need 1 <= r <= n and a nonempty grid".into());
                    }
                    if c.x_grid.iter().any(|&x| x < 1) {
                        return Err("rank-scaling: entry bounds must be >= 1".into());
                    }
                }
            }
            ExperimentKind::HeightScan(p) => {
                if p.grid.len() < 2 || !p.grid.windows(2).all(|w| w[0] < w[1]) {
                    return Err("height-scan: grid must be strictly increasing, len >= 2".into());
                }
                if p.curves_per_h < 1 {
                    return Err("height-scan: need curves_per_h >= 1".into());
                }
            }
            ExperimentKind::ShaAverage(p) => {
                if p.h < 16 || p.curves < 16 {
                    return Err("sha-average: need h >= 16 and curves >= 16".into());
                }
            }
            ExperimentKind::SquareSha(p) => {
                if !p.rst_cases.iter().all(|c| is_prime(c.p)) {
                    return Err("square-sha: non-prime p".into());
                }
                if !p
                    .padic_cases
                    .iter()
                    .all(|c| is_prime(c.p) && c.n >= 1)
                {
                    return Err("square-sha: bad p-adic case".into());
                }
            }
            ExperimentKind::ModelEquivalence(p) => {
                if !is_prime(p.p) {
                    return Err("model-equivalence: non-prime p".into());
                }
                if p.n_even % 2 != 0 || p.n_odd % 2 != 1 {
                    return Err("model-equivalence: n_even/n_odd parity is wrong".into());
                }
                if !(0.0..=1.0).contains(&p.tv_max) {
                    return Err("model-equivalence: tv_max out of range".into());
                }
            }
            ExperimentKind::OracleSuite(p) => {
                if !p.selmer_primes.iter().all(|&q| is_prime(q)) {
                    return Err("oracle-suite: non-prime p".into());
                }
            }
            ExperimentKind::Determinism(p) => {
                if p.jobs.0 == p.jobs.1 {
                    return Err("determinism: the two worker counts must differ".into());
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Runner

pub fn run(spec: &ExperimentSpec) -> Result<ResultTable, ExperimentError> {
    spec.validate().map_err(ExperimentError::InvalidSpec)?;
    let table = match spec.parallelism {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| ExperimentError::Model(e.to_string()))?;
            pool.install(|| dispatch(spec))?
        }
        None => dispatch(spec)?,
    };
    if let Some(prefix) = &spec.output {
        table.write_files(prefix)?;
    }
    Ok(table)
}

fn dispatch(spec: &ExperimentSpec) -> Result<ResultTable, ExperimentError> {
    let echo = serde_json::to_value(spec).expect("spec serializes");
    let mut table = ResultTable::new(&spec.name, spec.kind.kind_name(), spec.seed, echo);
    let streams = Substreams::new(spec.seed);
    match &spec.kind {
        ExperimentKind::Census(p) => run_census(p, &mut table),
        ExperimentKind::SelmerDist(p) => run_selmer_dist(p, &streams, &mut table),
        ExperimentKind::SelmerAvg(p) => run_selmer_avg(p, &streams, &mut table),
        ExperimentKind::Rst(p) => run_rst(p, &streams, &mut table),
        ExperimentKind::Coker(p) => run_coker(p, &streams, &mut table)?,
        ExperimentKind::RankScaling(p) => run_rank_scaling(p, &streams, &mut table)?,
        ExperimentKind::HeightScan(p) => run_height_scan(p, &streams, &mut table)?,
        ExperimentKind::ShaAverage(p) => run_sha_average(p, &streams, &mut table)?,
        ExperimentKind::SquareSha(p) => run_square_sha(p, &streams, &mut table),
        ExperimentKind::ModelEquivalence(p) => run_model_equivalence(p, &streams, &mut table),
        ExperimentKind::OracleSuite(p) => run_oracle_suite(p, &streams, &mut table),
        ExperimentKind::Determinism(p) => run_determinism(p, spec.seed, &mut table)?,
    }
    Ok(table)
}

const CHUNK: u64 = 256;

/// Splits `total` into fixed chunks, runs `work` on each with its own RNG
/// substream (domain-separated), and returns the per-chunk results in chunk
/// order, independent of the worker count.
fn parallel_chunks<T: Send, F>(streams: &Substreams, domain: u64, total: u64, work: F) -> Vec<T>
where
    F: Fn(&mut ChaCha12Rng, u64) -> T + Sync,
{
    let chunks: Vec<(u64, u64)> = (0..total.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(total - c * CHUNK)))
        .collect();
    chunks
        .par_iter()
        .map(|&(c, count)| {
            let mut rng = streams.stream(task_id(&[domain, c]));
            work(&mut rng, count)
        })
        .collect()
}

// --- census ----------------------------------------------------------------

fn run_census(p: &CensusParams, table: &mut ResultTable) {
    let constant = predictions::census_constant_f64();
    table.columns(&["H", "count", "normalized", "constant_ref"]);
    let mut by_h: BTreeMap<u64, census::CensusRecord> = BTreeMap::new();
    for &h in &p.heights {
        let rec = census::count_curves(h as u128);
        by_h.insert(h, rec);
        table.push_row(vec![
            CellValue::UInt(h),
            rec.count.into(),
            rec.normalized.into(),
            constant.into(),
        ]);
    }
    for check in &p.checks {
        let Some(rec) = by_h.get(&check.h) else {
            continue;
        };
        if let Some(exact) = check.exact_count {
            table.summary.push(SummaryItem::check(
                format!("count at H={}", check.h),
                rec.count,
                format!("{exact}"),
                rec.count == exact,
            ));
        }
        if let Some(pct) = check.normalized_within_pct {
            let rel = (rec.normalized / constant - 1.0).abs() * 100.0;
            table.summary.push(SummaryItem::check(
                format!("normalized deviation at H={} (%)", check.h),
                format!("{rel:.4}"),
                format!("<= {pct}"),
                rel <= pct,
            ));
        }
    }
}

// --- selmer-dist -------------------------------------------------------------

fn run_selmer_dist(p: &SelmerDistParams, streams: &Substreams, table: &mut ResultTable) {
    table.columns(&[
        "p",
        "s",
        "count",
        "freq",
        "wilson_lo",
        "wilson_hi",
        "oracle_density",
    ]);
    for (pi, &prime) in p.primes.iter().enumerate() {
        let n = p.half_dim;
        let hists = parallel_chunks(streams, pi as u64, p.samples, |rng, count| {
            let space = QuadSpace::new(PrimePower::<u64>::new(prime, 1), n);
            let mut h: Histogram<u32> = Histogram::new();
            for _ in 0..count {
                let z = sample_lagrangian(&space, rng);
                let w = sample_lagrangian(&space, rng);
                let prof = intersection_profile(&space, &z, &w, 0);
                let dim = prof.valuations.iter().filter(|&&v| v == 1).count() as u32;
                h.record(dim);
            }
            h
        });
        let hist = hists
            .into_iter()
            .fold(Histogram::new(), |acc, h| acc.merge(h));

        let density_table = predictions::DensityTable::new(prime, (n as u32).max(12));
        let mut density: BTreeMap<u32, f64> = BTreeMap::new();
        for s in 0..=n as u32 {
            density.insert(s, density_table.density_f64(s as usize));
        }
        for s in 0..=n as u32 {
            let count = hist.count(&s);
            let (lo, hi) = wilson_interval(count, hist.total(), Z95);
            table.push_row(vec![
                prime.into(),
                (s as u64).into(),
                count.into(),
                hist.freq(&s).into(),
                lo.into(),
                hi.into(),
                density[&s].into(),
            ]);
        }
        let tv = tv_distance_to_density(&hist, &density);
        match p.tv_max {
            Some(t) => table.summary.push(SummaryItem::check(
                format!("TV(empirical, dimension law) at p={prime}"),
                format!("{tv:.5}"),
                format!("<= {t}"),
                tv <= t,
            )),
            None => table.summary.push(SummaryItem::info(
                format!("TV(empirical, dimension law) at p={prime}"),
                format!("{tv:.5}"),
            )),
        }
    }
}

// --- selmer-avg --------------------------------------------------------------

fn run_selmer_avg(p: &SelmerAvgParams, streams: &Substreams, table: &mut ResultTable) {
    table.columns(&[
        "p",
        "e",
        "m",
        "samples",
        "mean_order",
        "se",
        "sigma_m",
        "rel_err_pct",
    ]);
    for (ci, case) in p.cases.iter().enumerate() {
        let n = p.half_dim;
        let chunks = parallel_chunks(streams, ci as u64, p.samples, |rng, count| {
            let space = QuadSpace::new(PrimePower::<u64>::new(case.p, case.e), n);
            let mut orders = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let z = sample_lagrangian(&space, rng);
                let w = sample_lagrangian(&space, rng);
                let prof = intersection_profile(&space, &z, &w, 0);
                orders.push((case.p as f64).powi(prof.intersection_exponent() as i32));
            }
            orders
        });
        let mut orders = Vec::with_capacity(p.samples as usize);
        for c in chunks {
            orders.extend(c);
        }
        let (mean, se) = crate::stats::mean_and_se(&orders);
        let m = case.p.pow(case.e);
        let sigma = predictions::sigma(m);
        let rel = (mean / sigma as f64 - 1.0).abs() * 100.0;
        table.push_row(vec![
            case.p.into(),
            (case.e as u64).into(),
            m.into(),
            p.samples.into(),
            mean.into(),
            se.into(),
            sigma.into(),
            rel.into(),
        ]);
        match p.rel_err_max_pct {
            Some(tol) => table.summary.push(SummaryItem::check(
                format!("mean #(Z ∩ W) vs sigma({m})"),
                format!("{mean:.4} vs {sigma} ({rel:.2}%)"),
                format!("within {tol}%"),
                rel <= tol,
            )),
            None => table.summary.push(SummaryItem::info(
                format!("mean #(Z ∩ W) vs sigma({m})"),
                format!("{mean:.4} vs {sigma}"),
            )),
        }
    }
}

// --- rst ---------------------------------------------------------------------

fn run_rst(p: &RstParams, streams: &Substreams, table: &mut ResultTable) {
    table.columns(&["p", "n", "r", "count", "freq", "wilson_lo", "wilson_hi"]);
    let cfg = RstConfig {
        e_init: p.e_init,
        ..Default::default()
    };
    for (ci, case) in p.cases.iter().enumerate() {
        let dists = parallel_chunks(streams, ci as u64, p.samples, |rng, count| {
            crate::rst::corank_distribution(case.p, case.n, count, &cfg, rng)
        });
        let dist = dists
            .into_iter()
            .fold(crate::rst::CorankDistribution::empty(), |a, d| a.merge(d));
        let total = dist.histogram.total();
        let max_r = dist.histogram.keys().max().copied().unwrap_or(0);
        for r in 0..=max_r {
            let count = dist.histogram.count(&r);
            let (lo, hi) = wilson_interval(count, total, Z95);
            table.push_row(vec![
                case.p.into(),
                case.n.into(),
                r.into(),
                count.into(),
                dist.histogram.freq(&r).into(),
                lo.into(),
                hi.into(),
            ]);
        }
        if dist.ceiling_events > 0 {
            table.summary.push(SummaryItem::info(
                format!("precision-ceiling events (p={}, n={})", case.p, case.n),
                dist.ceiling_events,
            ));
        }
        if let Some(window) = &p.corank_window {
            let f0 = dist.histogram.freq(&0);
            let f1 = dist.histogram.freq(&1);
            let ge2: u64 = dist
                .histogram
                .iter()
                .filter(|(r, _)| **r >= 2)
                .map(|(_, c)| c)
                .sum();
            let fge2 = ge2 as f64 / total.max(1) as f64;
            table.summary.push(SummaryItem::check(
                format!("P(corank 0) at p={}, n={}", case.p, case.n),
                format!("{f0:.4}"),
                format!("0.5 ± {}", window.p01_tol),
                (f0 - 0.5).abs() <= window.p01_tol,
            ));
            table.summary.push(SummaryItem::check(
                format!("P(corank 1) at p={}, n={}", case.p, case.n),
                format!("{f1:.4}"),
                format!("0.5 ± {}", window.p01_tol),
                (f1 - 0.5).abs() <= window.p01_tol,
            ));
            table.summary.push(SummaryItem::check(
                format!("P(corank >= 2) at p={}, n={}", case.p, case.n),
                format!("{fge2:.4}"),
                format!("<= {}", window.ge2_max),
                fge2 <= window.ge2_max,
            ));
        }
    }
}

// --- coker -------------------------------------------------------------------

fn run_coker(
    p: &CokerParams,
    streams: &Substreams,
    table: &mut ResultTable,
) -> Result<(), ExperimentError> {
    table.columns(&["n", "p", "pseudo_rank", "invariants", "count", "freq"]);
    let cfg = PadicAltConfig {
        e_init: p.e_init,
        ..Default::default()
    };
    let hist = conditioned_coker_parallel(p.n, p.p, p.pseudo_rank, p.samples, &cfg, streams, 0)?;
    for (inv, count) in hist.iter() {
        table.push_row(vec![
            p.n.into(),
            p.p.into(),
            p.pseudo_rank.into(),
            inv.to_string().into(),
            count.into(),
            hist.freq(inv).into(),
        ]);
    }
    let squares = hist.iter().all(|(inv, _)| inv.order_is_square());
    table.summary.push(SummaryItem::check(
        "all sampled pseudo-Ш orders are squares",
        squares,
        "true",
        squares,
    ));
    Ok(())
}

/// Deterministic chunked version of rejection-conditioned cokernel sampling:
/// draws chunk-sized batches until the requested number of conditioned
/// samples is reached, consuming batches in chunk order.
fn conditioned_coker_parallel(
    n: usize,
    p: u64,
    r: usize,
    samples: u64,
    cfg: &PadicAltConfig,
    streams: &Substreams,
    domain: u64,
) -> Result<Histogram<AbelianInvariants>, ExperimentError> {
    let mut hist = Histogram::new();
    let mut round = 0u64;
    let mut drawn = 0u64;
    while hist.total() < samples {
        if drawn > 200 * samples + 1_000_000 {
            return Err(ExperimentError::Model(format!(
                "rejection budget exhausted waiting for pseudo-rank {r}"
            )));
        }
        let need = samples - hist.total();
        let batch = need.clamp(CHUNK, 65_536);
        let chunks = parallel_chunks(streams, (domain << 32) | round, batch, |rng, count| {
            let mut h: Histogram<AbelianInvariants> = Histogram::new();
            for _ in 0..count {
                if let Ok(s) = sample_and_analyze_padic(n, p, cfg, rng) {
                    if s.pseudo_rank == r {
                        h.record(s.pseudo_sha);
                    }
                }
            }
            h
        });
        for c in chunks {
            for (k, v) in c.iter() {
                for _ in 0..v {
                    if hist.total() < samples {
                        hist.record(k.clone());
                    }
                }
            }
        }
        drawn += batch;
        round += 1;
    }
    Ok(hist)
}

// --- rank-scaling --------------------------------------------------------------

fn run_rank_scaling(
    p: &RankScalingParams,
    streams: &Substreams,
    table: &mut ResultTable,
) -> Result<(), ExperimentError> {
    table.columns(&[
        "n",
        "r",
        "x",
        "trials",
        "successes",
        "estimate",
        "wilson_lo",
        "wilson_hi",
        "exact",
    ]);
    for (ci, case) in p.cases.iter().enumerate() {
        let mut points: Vec<(f64, f64, f64)> = Vec::new();
        let mut exact_mode = true;
        for (xi, &x) in case.x_grid.iter().enumerate() {
            let entries = case.n * (case.n - 1) / 2;
            let space = (2.0 * x as f64 + 1.0).powi(entries as i32);
            let est = if space <= p.enumeration_budget as f64 {
                let mut rng = streams.stream(task_id(&[ci as u64, xi as u64]));
                altmatrix::prob_rank_ge(case.n, x, case.r, 0, p.enumeration_budget, &mut rng)
            } else {
                exact_mode = false;
                let hits = parallel_chunks(
                    streams,
                    ((ci as u64) << 32) | xi as u64,
                    case.samples,
                    |rng, count| altmatrix::count_rank_ge_mc(case.n, x, case.r, count, rng),
                );
                let successes: u64 = hits.iter().sum();
                let estimate = successes as f64 / case.samples as f64;
                altmatrix::ProbRankGe {
                    estimate,
                    wilson: wilson_interval(successes, case.samples, Z95),
                    successes,
                    trials: case.samples,
                    exact: false,
                }
            };
            table.push_row(vec![
                case.n.into(),
                case.r.into(),
                x.into(),
                est.trials.into(),
                est.successes.into(),
                est.estimate.into(),
                est.wilson.0.into(),
                est.wilson.1.into(),
                CellValue::Text(est.exact.to_string()),
            ]);
            if let Some(check) = &case.exact_at {
                if check.x == x {
                    let expect = check.numerator as f64 / check.denominator as f64;
                    table.summary.push(SummaryItem::check(
                        format!("exact Prob(rk >= {}) at n={}, X={}", case.r, case.n, x),
                        format!("{}/{}", est.successes, est.trials),
                        format!("{}/{}", check.numerator, check.denominator),
                        est.exact && (est.estimate - expect).abs() < 1e-15,
                    ));
                }
            }
            let sigma = if est.exact || est.successes == 0 {
                0.0
            } else {
                ((1.0 - est.estimate).max(0.0) / est.successes as f64).sqrt()
            };
            points.push((x as f64, est.estimate, sigma));
        }
        let fit = crate::stats::fit_loglog_slope(&points)
            .map_err(|e| ExperimentError::Model(e.to_string()))?;
        table.summary.push(SummaryItem::check(
            format!(
                "log-log slope of Prob(rk >= {}) vs X at n={} ({})",
                case.r,
                case.n,
                if exact_mode { "exact" } else { "sampled" }
            ),
            format!("{:.4} ± {:.4}", fit.slope, fit.slope_se),
            format!("{} ± {}", case.slope_expect, case.slope_tol),
            (fit.slope - case.slope_expect).abs() <= case.slope_tol,
        ));
    }
    Ok(())
}

// --- height-scan ----------------------------------------------------------------

fn run_height_scan(
    p: &HeightScanParams,
    streams: &Substreams,
    table: &mut ResultTable,
) -> Result<(), ExperimentError> {
    table.columns(&[
        "H",
        "eta",
        "X",
        "n_lo",
        "total",
        "count_r0",
        "count_r1",
        "count_ge2",
        "count_ge3",
        "mean_sha0",
        "se",
    ]);
    let cfg = CalibrationConfig {
        exponent: p.exponent,
        eta_coeff: p.eta_coeff,
    };
    let mode = if p.proportional {
        CountMode::Proportional {
            at_max: p.curves_per_h,
        }
    } else {
        CountMode::Fixed(p.curves_per_h)
    };
    let grid: Vec<u128> = p.grid.iter().map(|&h| h as u128).collect();
    let rows = rankmodel::height_scan(&grid, mode, &cfg, streams)?;
    for row in &rows {
        table.push_row(vec![
            row.h.into(),
            row.eta.into(),
            row.x.into(),
            row.n_lo.into(),
            row.total.into(),
            row.count_r0.into(),
            row.count_r1.into(),
            row.count_ge2.into(),
            row.count_ge3.into(),
            row.mean_sha0.into(),
            row.se_sha0.into(),
        ]);
    }
    let slope2 = fit_threshold_slope(&rows, 2)?;
    let slope3 = fit_threshold_slope(&rows, 3)?;
    match p.slope_r2_window {
        Some((lo, hi)) => table.summary.push(SummaryItem::check(
            "slope of Prob(rk >= 2) vs H",
            format!("{:.5} ± {:.5}", slope2.slope, slope2.slope_se),
            format!("in [{lo:.5}, {hi:.5}]"),
            slope2.slope >= lo && slope2.slope <= hi,
        )),
        None => table.summary.push(SummaryItem::info(
            "slope of Prob(rk >= 2) vs H",
            format!("{:.5} ± {:.5}", slope2.slope, slope2.slope_se),
        )),
    }
    if p.require_r3_steeper {
        table.summary.push(SummaryItem::check(
            "slope of Prob(rk >= 3) vs H",
            format!("{:.5} ± {:.5}", slope3.slope, slope3.slope_se),
            format!("< slope(rk >= 2) = {:.5}", slope2.slope),
            slope3.slope < slope2.slope,
        ));
    } else {
        table.summary.push(SummaryItem::info(
            "slope of Prob(rk >= 3) vs H",
            format!("{:.5} ± {:.5}", slope3.slope, slope3.slope_se),
        ));
    }
    Ok(())
}

// --- sha-average -----------------------------------------------------------------

fn run_sha_average(
    p: &ShaAverageParams,
    streams: &Substreams,
    table: &mut ResultTable,
) -> Result<(), ExperimentError> {
    table.columns(&[
        "H",
        "curves",
        "mean",
        "se",
        "median_of_means",
        "rank0_fraction",
        "reference",
    ]);
    let cfg = CalibrationConfig {
        exponent: p.exponent,
        eta_coeff: p.eta_coeff,
    };
    let rep = rankmodel::average_sha0(p.h as u128, p.curves, &cfg, streams)?;
    table.push_row(vec![
        rep.h.into(),
        rep.curves.into(),
        rep.mean.into(),
        rep.se.into(),
        rep.median_of_means.into(),
        rep.rank0_fraction.into(),
        rep.reference.into(),
    ]);
    table.summary.push(SummaryItem::check(
        "mean >= rank-0 fraction",
        format!("{:.4} vs {:.4}", rep.mean, rep.rank0_fraction),
        "mean >= fraction",
        rep.mean >= rep.rank0_fraction,
    ));
    let log_ratio = rep.median_of_means.max(f64::MIN_POSITIVE).ln() / (p.h as f64).ln();
    match p.log_ratio_window {
        Some((lo, hi)) => table.summary.push(SummaryItem::check(
            "log(median-of-means)/log H",
            format!("{log_ratio:.5}"),
            format!("in [{lo:.5}, {hi:.5}]"),
            log_ratio >= lo && log_ratio <= hi,
        )),
        None => table.summary.push(SummaryItem::info(
            "log(median-of-means)/log H",
            format!("{log_ratio:.5}"),
        )),
    }
    Ok(())
}

// --- square-sha ------------------------------------------------------------------

fn run_square_sha(p: &SquareShaParams, streams: &Substreams, table: &mut ResultTable) {
    table.columns(&["source", "samples", "square_violations", "paired_violations"]);
    let mut domain = 0u64;
    let mut all_ok = true;

    for case in &p.rst_cases {
        let cfg = RstConfig::default();
        let reports = parallel_chunks(streams, domain, p.rst_samples_each, |rng, count| {
            let mut sq = 0u64;
            let mut paired = 0u64;
            for _ in 0..count {
                if let Ok(out) = sample_rst(case.p, case.n, &cfg, rng) {
                    sq += !out.t_invariants.order_is_square() as u64;
                    paired += !out.t_invariants.has_paired_factors() as u64;
                }
            }
            (sq, paired)
        });
        let (sq, paired) = reports
            .iter()
            .fold((0, 0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
        all_ok &= sq == 0 && paired == 0;
        table.push_row(vec![
            format!("rst p={} n={}", case.p, case.n).into(),
            p.rst_samples_each.into(),
            sq.into(),
            paired.into(),
        ]);
        domain += 1;
    }
    for case in &p.padic_cases {
        let cfg = PadicAltConfig::default();
        let reports = parallel_chunks(streams, domain, p.padic_samples_each, |rng, count| {
            let mut sq = 0u64;
            let mut paired = 0u64;
            for _ in 0..count {
                if let Ok(s) = sample_and_analyze_padic(case.n, case.p, &cfg, rng) {
                    sq += !s.pseudo_sha.order_is_square() as u64;
                    paired += !s.pseudo_sha.has_paired_factors() as u64;
                }
            }
            (sq, paired)
        });
        let (sq, paired) = reports
            .iter()
            .fold((0, 0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
        all_ok &= sq == 0 && paired == 0;
        table.push_row(vec![
            format!("alt-padic n={} p={}", case.n, case.p).into(),
            p.padic_samples_each.into(),
            sq.into(),
            paired.into(),
        ]);
        domain += 1;
    }
    for case in &p.bounded_cases {
        let reports = parallel_chunks(streams, domain, p.bounded_samples_each, |rng, count| {
            let mut sq = 0u64;
            let mut paired = 0u64;
            for _ in 0..count {
                let a = sample_alt_bounded::<num_bigint::BigInt, _>(case.n, case.x, rng);
                let s = altmatrix::analyze_bounded(&a);
                sq += !s.pseudo_sha.order_is_square() as u64;
                paired += !s.pseudo_sha.has_paired_factors() as u64;
            }
            (sq, paired)
        });
        let (sq, paired) = reports
            .iter()
            .fold((0, 0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
        all_ok &= sq == 0 && paired == 0;
        table.push_row(vec![
            format!("alt-bounded n={} X={}", case.n, case.x).into(),
            p.bounded_samples_each.into(),
            sq.into(),
            paired.into(),
        ]);
        domain += 1;
    }
    table.summary.push(SummaryItem::check(
        "square order with paired invariant factors, all samples",
        all_ok,
        "zero violations",
        all_ok,
    ));
}

// --- model-equivalence -------------------------------------------------------------

fn run_model_equivalence(
    p: &ModelEquivalenceParams,
    streams: &Substreams,
    table: &mut ResultTable,
) {
    table.columns(&["r", "invariants", "freq_intersection", "freq_coker"]);
    // Intersection-model side: unconditioned draws bucketed by corank.
    let cfg = RstConfig::default();
    let draws = (p.samples as f64 * 2.6) as u64;
    let pairs = parallel_chunks(streams, 0, draws, |rng, count| {
        let mut h0: Histogram<AbelianInvariants> = Histogram::new();
        let mut h1: Histogram<AbelianInvariants> = Histogram::new();
        for _ in 0..count {
            if let Ok(out) = sample_rst(p.p, p.n_even, &cfg, rng) {
                match out.corank {
                    0 => h0.record(out.t_invariants),
                    1 => h1.record(out.t_invariants),
                    _ => {}
                }
            }
        }
        (h0, h1)
    });
    let (rst0, rst1) = pairs.into_iter().fold(
        (Histogram::new(), Histogram::new()),
        |(a0, a1), (h0, h1)| (a0.merge(h0), a1.merge(h1)),
    );

    // Matrix-model side: even size for rank 0, odd size for rank 1.
    let alt_cfg = PadicAltConfig::default();
    let coker0 = conditioned_alt_hist(p.n_even, p.p, 0, p.samples, &alt_cfg, streams, 1);
    let coker1 = conditioned_alt_hist(p.n_odd, p.p, 1, p.samples, &alt_cfg, streams, 2);

    for (r, rst_h, coker_h) in [(0usize, &rst0, &coker0), (1, &rst1, &coker1)] {
        let keys: std::collections::BTreeSet<AbelianInvariants> = rst_h
            .keys()
            .cloned()
            .chain(coker_h.keys().cloned())
            .collect();
        for key in keys {
            table.push_row(vec![
                r.into(),
                key.to_string().into(),
                rst_h.freq(&key).into(),
                coker_h.freq(&key).into(),
            ]);
        }
        let tv = tv_distance(rst_h, coker_h);
        table.summary.push(SummaryItem::check(
            format!(
                "TV(intersection T, coker Ш') at rank {r} ({} vs {} samples)",
                rst_h.total(),
                coker_h.total()
            ),
            format!("{tv:.5}"),
            format!("<= {}", p.tv_max),
            tv <= p.tv_max,
        ));
    }
}

fn conditioned_alt_hist(
    n: usize,
    p: u64,
    r: usize,
    samples: u64,
    cfg: &PadicAltConfig,
    streams: &Substreams,
    domain: u64,
) -> Histogram<AbelianInvariants> {
    // pseudo-rank equals the parity-forced minimum almost surely, so a small
    // oversample suffices
    let draws = (samples as f64 * 1.1) as u64 + CHUNK;
    let hists = parallel_chunks(streams, domain, draws, |rng, count| {
        let mut h: Histogram<AbelianInvariants> = Histogram::new();
        for _ in 0..count {
            if let Ok(s) = sample_and_analyze_padic(n, p, cfg, rng) {
                if s.pseudo_rank == r {
                    h.record(s.pseudo_sha);
                }
            }
        }
        h
    });
    hists
        .into_iter()
        .fold(Histogram::new(), |acc, h| acc.merge(h))
}

// --- oracle-suite ---------------------------------------------------------------

fn run_oracle_suite(p: &OracleSuiteParams, streams: &Substreams, table: &mut ResultTable) {
    table.columns(&["check", "cases", "failures"]);

    // Smith-form reconstruction on random integer matrices.
    let snf_fails: u64 = parallel_chunks(streams, 0, p.snf_samples, |rng, count| {
        let mut fails = 0u64;
        for _ in 0..count {
            let rows = rng.gen_range(1..=5);
            let cols = rng.gen_range(1..=5);
            let m: Matrix<num_bigint::BigInt> = Matrix::from_vec(
                rows,
                cols,
                (0..rows * cols)
                    .map(|_| num_bigint::BigInt::from(rng.gen_range(-30i64..=30)))
                    .collect(),
            );
            let snf = smith_normal_form(&m);
            let unit = num_bigint::BigUint::from(1u32);
            let ok = snf.verifies(&m)
                && det(&snf.u).magnitude() == &unit
                && det(&snf.v).magnitude() == &unit
                && chain_holds(&snf.divisors);
            fails += !ok as u64;
        }
        fails
    })
    .iter()
    .sum();
    table.push_row(vec![
        "snf reconstruction U·M·V = D, unimodular transforms".into(),
        p.snf_samples.into(),
        snf_fails.into(),
    ]);

    // Cokernel against coset enumeration and determinantal divisors.
    let coker_fails: u64 = parallel_chunks(streams, 1, p.coker_samples, |rng, count| {
        let mut fails = 0u64;
        for _ in 0..count {
            let m: Matrix<i64> =
                Matrix::from_vec(3, 3, (0..9).map(|_| rng.gen_range(-3i64..=3)).collect());
            let big: Matrix<num_bigint::BigInt> = Matrix::from_vec(
                3,
                3,
                m.iter().map(|&x| num_bigint::BigInt::from(x)).collect(),
            );
            let (free, torsion) = coker_torsion(&big);
            let (free_b, order_b) = oracles::coker_brute(&m);
            let minors = oracles::invariant_factors_by_minors(&m);
            let snf_factors: Vec<num_bigint::BigUint> = smith_normal_form(&big)
                .divisors
                .iter()
                .filter(|d| !num_traits::Zero::is_zero(*d))
                .map(|d| d.magnitude().clone())
                .collect();
            let ok = free == free_b && torsion.order() == order_b && minors == snf_factors;
            fails += !ok as u64;
        }
        fails
    })
    .iter()
    .sum();
    table.push_row(vec![
        "cokernel vs coset enumeration + determinantal divisors".into(),
        p.coker_samples.into(),
        coker_fails.into(),
    ]);

    // Sampler uniformity against exhaustive enumeration.
    let chi_cases: [(u64, usize, u32); 4] = [(2, 1, 1), (2, 2, 1), (3, 1, 1), (2, 1, 2)];
    let mut chi_fails = 0u64;
    for (ci, &(prime, n, e)) in chi_cases.iter().enumerate() {
        let space = QuadSpace::new(PrimePower::<u64>::new(prime, e), n);
        let all = enumerate_lagrangians(&space, 1 << 26).expect("within budget");
        let keys: Vec<Matrix<u64>> = all.iter().map(|l| l.canonical(&space)).collect();
        let hists = parallel_chunks(streams, 2 + ci as u64, p.chi_draws, |rng, count| {
            let mut counts = vec![0u64; keys.len()];
            for _ in 0..count {
                let lag = sample_lagrangian(&space, rng);
                let key = lag.canonical(&space);
                let idx = keys
                    .iter()
                    .position(|k| *k == key)
                    .expect("sampled Lagrangian must be enumerated");
                counts[idx] += 1;
            }
            counts
        });
        let mut counts = vec![0u64; keys.len()];
        for h in hists {
            for (a, b) in counts.iter_mut().zip(h) {
                *a += b;
            }
        }
        let ok = chi_square_uniform_ok(&counts);
        chi_fails += !ok as u64;
        table.push_row(vec![
            format!(
                "sampler chi-square vs enumeration (p={prime}, n={n}, e={e}, {} bins)",
                keys.len()
            )
            .into(),
            p.chi_draws.into(),
            (!ok as u64).into(),
        ]);
    }

    // Moment identity tying the dimension law to the divisor-sum average.
    let mut selmer_fails = 0u64;
    for &prime in &p.selmer_primes {
        let mean = predictions::mean_selmer_check(prime);
        let expect = num_rational::BigRational::from_integer((prime + 1).into());
        let ok = predictions::within(&mean, &expect, 1, 6);
        selmer_fails += !ok as u64;
        table.push_row(vec![
            format!(
                "mean Selmer size identity at p={prime}: {:.8} vs {}",
                predictions::to_f64(&mean),
                prime + 1
            )
            .into(),
            1u64.into(),
            (!ok as u64).into(),
        ]);
    }

    let total_fails = snf_fails + coker_fails + chi_fails + selmer_fails;
    table.summary.push(SummaryItem::check(
        "oracle suite failures",
        total_fails,
        "0",
        total_fails == 0,
    ));
}

fn chain_holds(divisors: &[num_bigint::BigInt]) -> bool {
    use num_traits::Zero;
    let nz: Vec<&num_bigint::BigInt> = divisors.iter().filter(|d| !d.is_zero()).collect();
    let chain = nz.windows(2).all(|w| (w[1] % w[0]).is_zero());
    let zeros_trailing = divisors
        .iter()
        .skip_while(|d| !d.is_zero())
        .all(|d| d.is_zero());
    chain && zeros_trailing
}

// --- determinism ----------------------------------------------------------------

fn run_determinism(
    p: &DeterminismParams,
    seed: u64,
    table: &mut ResultTable,
) -> Result<(), ExperimentError> {
    table.columns(&["subject", "jobs_a", "jobs_b", "rows", "identical"]);
    let subjects = determinism_subjects(seed);
    let mut all_ok = true;
    for subject in subjects {
        let mut a = subject.clone();
        a.parallelism = Some(p.jobs.0);
        a.output = None;
        let mut b = subject.clone();
        b.parallelism = Some(p.jobs.1);
        b.output = None;
        let ta = run(&a)?;
        let tb = run(&b)?;
        let same = ta.same_results(&tb);
        all_ok &= same;
        table.push_row(vec![
            subject.name.clone().into(),
            p.jobs.0.into(),
            p.jobs.1.into(),
            ta.rows.len().into(),
            CellValue::Text(same.to_string()),
        ]);
    }
    table.summary.push(SummaryItem::check(
        "identical rows across worker counts",
        all_ok,
        "true",
        all_ok,
    ));
    Ok(())
}

/// Scaled-down copies of the catalog workloads used for the determinism check.
fn determinism_subjects(seed: u64) -> Vec<ExperimentSpec> {
    vec![
        ExperimentSpec {
            name: "det-census".into(),
            description: None,
            kind: ExperimentKind::Census(CensusParams {
                heights: vec![100, 1_000_000],
                checks: vec![],
            }),
            seed,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "det-selmer-dist".into(),
            description: None,
            kind: ExperimentKind::SelmerDist(SelmerDistParams {
                primes: vec![2],
                half_dim: 6,
                samples: 20_000,
                tv_max: None,
            }),
            seed,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "det-rst".into(),
            description: None,
            kind: ExperimentKind::Rst(RstParams {
                cases: vec![RstCase { p: 2, n: 5 }],
                samples: 3_000,
                e_init: 8,
                corank_window: None,
            }),
            seed,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "det-rank-scaling".into(),
            description: None,
            kind: ExperimentKind::RankScaling(RankScalingParams {
                cases: vec![ScalingCase {
                    n: 5,
                    r: 3,
                    x_grid: vec![2, 3, 4],
                    samples: 30_000,
                    slope_expect: -5.0,
                    slope_tol: 5.0,
                    exact_at: None,
                }],
                enumeration_budget: default_enum_budget(),
            }),
            seed,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "det-height-scan".into(),
            description: None,
            kind: ExperimentKind::HeightScan(HeightScanParams {
                grid: vec![100_000_000, 1_000_000_000_000],
                curves_per_h: 10_000,
                proportional: false,
                eta_coeff: 0.28,
                exponent: 1.0 / 12.0,
                slope_r2_window: None,
                require_r3_steeper: false,
            }),
            seed,
            parallelism: None,
            output: None,
        },
    ]
}

// ---------------------------------------------------------------------------
// Catalog

/// One built-in experiment per verification criterion; every entry runs
/// unattended with pinned budgets, seeds, and expectations.
pub fn catalog() -> Vec<ExperimentSpec> {
    vec![
        ExperimentSpec {
            name: "acc-census-1e10".into(),
            description: Some(
                "exact census to H = 10^10; exact count 14 at H = 100 and the \
                 normalized count within 2% of the leading constant"
                    .into(),
            ),
            kind: ExperimentKind::Census(CensusParams {
                heights: vec![100, 100_000_000, 10_000_000_000],
                checks: vec![
                    CensusCheck {
                        h: 100,
                        exact_count: Some(14),
                        normalized_within_pct: None,
                    },
                    CensusCheck {
                        h: 100_000_000,
                        exact_count: None,
                        normalized_within_pct: Some(5.0),
                    },
                    CensusCheck {
                        h: 10_000_000_000,
                        exact_count: None,
                        normalized_within_pct: Some(2.0),
                    },
                ],
            }),
            seed: 101,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "acc-selmer-dist".into(),
            description: Some(
                "p-Selmer dimension law: TV distance to the closed-form density \
                 <= 0.02 at p in {2,3,5}, n = 10, 10^5 pair samples"
                    .into(),
            ),
            kind: ExperimentKind::SelmerDist(SelmerDistParams {
                primes: vec![2, 3, 5],
                half_dim: 10,
                samples: 100_000,
                tv_max: Some(0.02),
            }),
            seed: 102,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "acc-selmer-avg".into(),
            description: Some(
                "average intersection order equals sigma(p^e) within 5% for \
                 p^e in {2,3,4,5,8,9}, n = 20, 10^5 samples"
                    .into(),
            ),
            kind: ExperimentKind::SelmerAvg(SelmerAvgParams {
                cases: vec![
                    PrimePowerCase { p: 2, e: 1 },
                    PrimePowerCase { p: 3, e: 1 },
                    PrimePowerCase { p: 2, e: 2 },
                    PrimePowerCase { p: 5, e: 1 },
                    PrimePowerCase { p: 2, e: 3 },
                    PrimePowerCase { p: 3, e: 2 },
                ],
                half_dim: 20,
                samples: 100_000,
                rel_err_max_pct: Some(5.0),
            }),
            seed: 103,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "acc-corank-law".into(),
            description: Some(
                "corank is 0 or 1 with probability 1/2 ± 0.02 each and \
                 P(corank >= 2) <= 0.02, for p in {2,3}, n in {6,7,8}, 10^4 samples"
                    .into(),
            ),
            kind: ExperimentKind::Rst(RstParams {
                cases: vec![
                    RstCase { p: 2, n: 6 },
                    RstCase { p: 2, n: 7 },
                    RstCase { p: 2, n: 8 },
                    RstCase { p: 3, n: 6 },
                    RstCase { p: 3, n: 7 },
                    RstCase { p: 3, n: 8 },
                ],
                samples: 10_000,
                e_init: 8,
                corank_window: Some(CorankWindow {
                    p01_tol: 0.02,
                    ge2_max: 0.02,
                }),
            }),
            seed: 104,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "acc-square-sha".into(),
            description: Some(
                "zero tolerance: every sampled T and pseudo-Ш has square order \
                 with paired invariant factors (10^4 intersection + 10^4 matrix samples)"
                    .into(),
            ),
            kind: ExperimentKind::SquareSha(SquareShaParams {
                rst_cases: vec![RstCase { p: 2, n: 6 }, RstCase { p: 3, n: 5 }],
                rst_samples_each: 5_000,
                padic_cases: vec![PadicAltCase { n: 8, p: 2 }, PadicAltCase { n: 5, p: 3 }],
                padic_samples_each: 2_500,
                bounded_cases: vec![
                    BoundedAltCase { n: 6, x: 10 },
                    BoundedAltCase { n: 5, x: 7 },
                ],
                bounded_samples_each: 2_500,
            }),
            seed: 105,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "acc-model-equivalence".into(),
            description: Some(
                "conditioned Ш-distributions of the intersection model and the \
                 alternating-matrix model agree within TV 0.05 at p = 2, ranks 0 and 1"
                    .into(),
            ),
            kind: ExperimentKind::ModelEquivalence(ModelEquivalenceParams {
                p: 2,
                n_even: 8,
                n_odd: 9,
                samples: 10_000,
                tv_max: 0.05,
            }),
            seed: 106,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "acc-rank-scaling".into(),
            description: Some(
                "kernel-rank scaling: exact slope -3 ± 0.3 for n=3, r=3 over \
                 X in {2,...,32} with the exact 1/125 check, and sampled slope \
                 -5 ± 1 for n=5, r=3"
                    .into(),
            ),
            kind: ExperimentKind::RankScaling(RankScalingParams {
                cases: vec![
                    ScalingCase {
                        n: 3,
                        r: 3,
                        x_grid: vec![2, 4, 8, 16, 32],
                        samples: 0,
                        slope_expect: -3.0,
                        slope_tol: 0.3,
                        exact_at: Some(ExactCheck {
                            x: 2,
                            numerator: 1,
                            denominator: 125,
                        }),
                    },
                    ScalingCase {
                        n: 5,
                        r: 3,
                        x_grid: vec![2, 3, 4, 5, 6],
                        samples: 1_000_000,
                        slope_expect: -5.0,
                        slope_tol: 1.0,
                        exact_at: None,
                    },
                ],
                enumeration_budget: default_enum_budget(),
            }),
            seed: 107,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "acc-rank-exponent-r2".into(),
            description: Some(
                "height scan over [10^6, 10^12], 10^5 curves per point: fitted \
                 slope of Prob(rk >= 2) inside [-1.5/24, -0.5/24] and the rk >= 3 \
                 slope strictly steeper"
                    .into(),
            ),
            kind: ExperimentKind::HeightScan(HeightScanParams {
                grid: vec![
                    1_000_000,
                    30_000_000,
                    1_000_000_000,
                    30_000_000_000,
                    1_000_000_000_000,
                ],
                curves_per_h: 100_000,
                proportional: false,
                eta_coeff: 0.28,
                exponent: 1.0 / 12.0,
                slope_r2_window: Some((-1.5 / 24.0, -0.5 / 24.0)),
                require_r3_steeper: true,
            }),
            seed: 108,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "acc-oracle-suite".into(),
            description: Some(
                "oracle cross-checks: Smith reconstruction, coset-enumeration \
                 cokernels, sampler chi-squares vs enumeration, Selmer moment identity"
                    .into(),
            ),
            kind: ExperimentKind::OracleSuite(OracleSuiteParams {
                snf_samples: 10_000,
                coker_samples: 10_000,
                chi_draws: 100_000,
                selmer_primes: vec![2, 3, 5, 7],
            }),
            seed: 109,
            parallelism: None,
            output: None,
        },
        ExperimentSpec {
            name: "acc-determinism".into(),
            description: Some(
                "identical result rows for the same seed across different \
                 worker counts, on scaled-down copies of each workload family"
                    .into(),
            ),
            kind: ExperimentKind::Determinism(DeterminismParams { jobs: (1, 4) }),
            seed: 110,
            parallelism: None,
            output: None,
        },
    ]
}

pub fn catalog_entry(name: &str) -> Option<ExperimentSpec> {
    catalog().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_entries_validate_and_roundtrip() {
        let entries = catalog();
        assert!(entries.iter().any(|s| s.name == "acc-census-1e10"));
        assert!(entries.iter().any(|s| s.name == "acc-rank-exponent-r2"));
        for spec in &entries {
            spec.validate().expect("catalog entry must validate");
            let json = serde_json::to_string(spec).unwrap();
            let back: ExperimentSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back.name, spec.name);
            assert_eq!(back.kind.kind_name(), spec.kind.kind_name());
        }
    }

    #[test]
    fn census_spec_runs_and_checks() {
        let spec = ExperimentSpec {
            name: "census-smoke".into(),
            description: None,
            kind: ExperimentKind::Census(CensusParams {
                heights: vec![100, 10_000],
                checks: vec![CensusCheck {
                    h: 100,
                    exact_count: Some(14),
                    normalized_within_pct: None,
                }],
            }),
            seed: 7,
            parallelism: Some(2),
            output: None,
        };
        let table = run(&spec).unwrap();
        assert!(table.passed());
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0][1], CellValue::UInt(14));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let spec = ExperimentSpec {
            name: "bad".into(),
            description: None,
            kind: ExperimentKind::SelmerDist(SelmerDistParams {
                primes: vec![4],
                half_dim: 4,
                samples: 10,
                tv_max: None,
            }),
            seed: 1,
            parallelism: None,
            output: None,
        };
        assert!(matches!(
            run(&spec),
            Err(ExperimentError::InvalidSpec(_))
        ));
    }

    #[test]
    fn spec_json_shape_is_flat() {
        let spec = catalog_entry("acc-selmer-dist").unwrap();
        let v = serde_json::to_value(&spec).unwrap();
        assert_eq!(v["kind"], "selmer-dist");
        assert_eq!(v["samples"], 100_000);
        assert_eq!(v["seed"], 102);
    }

    #[test]
    fn same_seed_same_rows_different_jobs() {
        let mut spec = ExperimentSpec {
            name: "det-smoke".into(),
            description: None,
            kind: ExperimentKind::SelmerDist(SelmerDistParams {
                primes: vec![2],
                half_dim: 4,
                samples: 5_000,
                tv_max: None,
            }),
            seed: 99,
            parallelism: Some(1),
            output: None,
        };
        let a = run(&spec).unwrap();
        spec.parallelism = Some(3);
        let b = run(&spec).unwrap();
        assert!(a.same_results(&b));
    }
}
