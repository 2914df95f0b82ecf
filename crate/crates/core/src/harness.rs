//! Study orchestration: run case grids, aggregate form reliabilities per
//! length, evaluate length-to-length predictions, track convergence toward
//! the pool limit, and summarize the dispersion of reliabilities.
//!
//! Replicates and cases fan out over rayon, but every random stream is
//! derived from `(master seed, case id, replicate)` and every reduction
//! folds a replicate-ordered vector, so results are byte-identical for any
//! worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration::median;
use crate::error::{Error, Result};
use crate::irt::{FormReliability, PoolContext};
use crate::pool::{self, PoolCaseSpec, Study2Type};
use crate::quad::{QuadratureRule, DEFAULT_QUAD_ORDER};
use crate::rng::RandomStream;
use crate::sampler;
use crate::sb;

/// Shared settings for a study run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Ascending form lengths to evaluate.
    pub lengths: Vec<usize>,
    /// Trajectories per case.
    pub replicates: usize,
    pub master_seed: u64,
    pub quad_order: usize,
}

impl StudyConfig {
    /// The grid the studies use by default: 10 to 50 in steps of 5.
    pub fn default_lengths() -> Vec<usize> {
        (2..=10).map(|k| 5 * k).collect()
    }

    /// Quick configuration: 200 replicates on the standard grid.
    pub fn desk_scale(master_seed: u64) -> Self {
        StudyConfig {
            lengths: Self::default_lengths(),
            replicates: 200,
            master_seed,
            quad_order: DEFAULT_QUAD_ORDER,
        }
    }

    /// Full scale: 1000 replicates on the standard grid.
    pub fn full_scale(master_seed: u64) -> Self {
        StudyConfig {
            replicates: 1000,
            ..Self::desk_scale(master_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::Parameter("need at least 2 replicates".into()));
        }
        if self.lengths.is_empty() || self.lengths[0] == 0 {
            return Err(Error::Parameter("length grid must be non-empty and positive".into()));
        }
        if self.lengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("length grid must be strictly ascending".into()));
        }
        Ok(())
    }

    fn rule(&self) -> Result<QuadratureRule> {
        QuadratureRule::new(self.quad_order)
    }
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self::desk_scale(20240501)
    }
}

/// Identifying columns carried by every aggregate row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMeta {
    pub case_id: String,
    /// Distribution-type tag used for dispersion grouping.
    pub group: String,
    pub dims: usize,
    pub a_max: f64,
}

/// Per-case, per-length aggregates over the replicate trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseLengthAggregate {
    pub case_id: String,
    pub group: String,
    pub dims: usize,
    pub a_max: f64,
    pub n: usize,
    pub mean_rho: f64,
    pub median_rho: f64,
    pub sd_rho: f64,
    /// Mean of the per-form reliabilities rescaled to unit length (not the
    /// rescaling of the mean).
    pub mean_rescaled: f64,
    /// The pool's asymptotic rescaled reliability.
    pub limit: f64,
    /// `mean_rescaled - limit`.
    pub bias: f64,
}

/// Distribution-type tag for the built-in case ids.
pub fn group_of(case_id: &str) -> &'static str {
    if case_id.starts_with("s1_") {
        "beta"
    } else if case_id.starts_with("s2_b1_") {
        "binary1"
    } else if case_id.starts_with("s2_b2_") {
        "binary2"
    } else if case_id.starts_with("s2_irr_") {
        "irregular"
    } else {
        "custom"
    }
}

/// Aggregate one length's worth of form reliabilities.
pub fn aggregate_form_reliabilities(
    meta: &CaseMeta,
    n: usize,
    forms: &[FormReliability],
    limit: f64,
) -> CaseLengthAggregate {
    let rhos: Vec<f64> = forms.iter().map(|f| f.rho).collect();
    let k = rhos.len() as f64;
    let mean_rho = rhos.iter().sum::<f64>() / k;
    let sd_rho = if rhos.len() > 1 {
        (rhos.iter().map(|r| (r - mean_rho).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let mean_rescaled = forms.iter().map(|f| f.rescaled).sum::<f64>() / k;
    CaseLengthAggregate {
        case_id: meta.case_id.clone(),
        group: meta.group.clone(),
        dims: meta.dims,
        a_max: meta.a_max,
        n,
        mean_rho,
        median_rho: median(rhos),
        sd_rho,
        mean_rescaled,
        limit,
        bias: mean_rescaled - limit,
    }
}

/// Draw the case's replicate trajectories and evaluate every grid length.
/// Rows come back ordered by length.
pub fn run_case(spec: &PoolCaseSpec, cfg: &StudyConfig) -> Result<Vec<CaseLengthAggregate>> {
    run_case_on_grid(spec, cfg, &cfg.lengths).map(|(aggs, _)| aggs)
}

fn run_case_on_grid(
    spec: &PoolCaseSpec,
    cfg: &StudyConfig,
    grid: &[usize],
) -> Result<(Vec<CaseLengthAggregate>, f64)> {
    cfg.validate().map_err(|e| e.in_case(&spec.case_id))?;
    let rule = cfg.rule().map_err(|e| e.in_case(&spec.case_id))?;
    let case_stream = RandomStream::new(cfg.master_seed).child(&spec.case_id);
    let stamped = spec.clone().with_seed_from(&case_stream);
    let pool = pool::build_pool(&stamped).map_err(|e| e.in_case(&spec.case_id))?;
    let ctx = PoolContext::new(&pool, &rule).map_err(|e| e.in_case(&spec.case_id))?;

    let form_stream = case_stream.child("forms");
    let per_replicate: Vec<Vec<FormReliability>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| -> Result<Vec<FormReliability>> {
            let traj = sampler::sample_trajectory(&pool, grid, &form_stream.child_index(rep as u64))?;
            ctx.prefix_reliabilities(traj.items(), grid)
        })
        .collect::<Result<_>>()
        .map_err(|e| e.in_case(&spec.case_id))?;

    let limit = ctx.universe_limit().limit;
    let meta = CaseMeta {
        case_id: spec.case_id.clone(),
        group: group_of(&spec.case_id).to_owned(),
        dims: spec.num_dimensions,
        a_max: spec.a_dist.upper_bound(),
    };
    let aggs = grid
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let forms: Vec<FormReliability> =
                per_replicate.iter().map(|reps| reps[k]).collect();
            aggregate_form_reliabilities(&meta, n, &forms, limit)
        })
        .collect();
    Ok((aggs, limit))
}

/// One ordered length pair's prediction error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionPair {
    pub n_from: usize,
    pub n_to: usize,
    pub forward: bool,
    pub error: f64,
}

/// All ordered length-pair prediction errors for one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionErrorReport {
    pub case_id: String,
    pub max_forward_error: f64,
    pub max_backward_error: f64,
    pub pairs: Vec<PredictionPair>,
}

/// Predict every length's mean reliability from every other length's and
/// report absolute errors. The aggregates must belong to one case.
pub fn prediction_errors(aggs: &[CaseLengthAggregate]) -> Result<PredictionErrorReport> {
    if aggs.len() < 2 {
        return Err(Error::Parameter("need at least two lengths for predictions".into()));
    }
    let case_id = aggs[0].case_id.clone();
    if aggs.iter().any(|a| a.case_id != case_id) {
        return Err(Error::Parameter("prediction errors mix cases".into()));
    }
    let mut pairs = Vec::with_capacity(aggs.len() * (aggs.len() - 1));
    let mut max_forward = 0.0f64;
    let mut max_backward = 0.0f64;
    for from in aggs {
        for to in aggs {
            if from.n == to.n {
                continue;
            }
            let predicted = sb::predict(
                sb::Reliability::saturating(from.mean_rho),
                from.n as u64,
                to.n as u64,
            )?;
            let error = (predicted.get() - to.mean_rho).abs();
            let forward = to.n > from.n;
            if forward {
                max_forward = max_forward.max(error);
            } else {
                max_backward = max_backward.max(error);
            }
            pairs.push(PredictionPair {
                n_from: from.n,
                n_to: to.n,
                forward,
                error,
            });
        }
    }
    Ok(PredictionErrorReport {
        case_id,
        max_forward_error: max_forward,
        max_backward_error: max_backward,
        pairs,
    })
}

/// Largest spread of the mean rescaled reliability across the length grid
/// of one case.
pub fn rescaled_spread(aggs: &[CaseLengthAggregate]) -> f64 {
    let lo = aggs.iter().map(|a| a.mean_rescaled).fold(f64::INFINITY, f64::min);
    let hi = aggs.iter().map(|a| a.mean_rescaled).fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// A study's aggregate rows plus per-case prediction reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOutput {
    pub aggregates: Vec<CaseLengthAggregate>,
    pub predictions: Vec<PredictionErrorReport>,
}

/// Run a list of cases, cases in parallel, aggregates in case order.
pub fn run_cases(specs: &[PoolCaseSpec], cfg: &StudyConfig) -> Result<StudyOutput> {
    cfg.validate()?;
    let per_case: Vec<Vec<CaseLengthAggregate>> = specs
        .par_iter()
        .map(|spec| run_case(spec, cfg))
        .collect::<Result<_>>()?;
    let predictions = per_case
        .iter()
        .map(|aggs| prediction_errors(aggs))
        .collect::<Result<_>>()?;
    Ok(StudyOutput {
        aggregates: per_case.into_iter().flatten().collect(),
        predictions,
    })
}

/// The beta-parameter study over the requested dimension counts.
pub fn run_study1(cfg: &StudyConfig, a_max: f64, dims: &[usize]) -> Result<StudyOutput> {
    run_cases(&pool::study1_case_grid_dims(a_max, dims)?, cfg)
}

/// The binary/irregular unidimensional study.
pub fn run_study2(cfg: &StudyConfig, kinds: &[Study2Type]) -> Result<StudyOutput> {
    let mut specs = Vec::new();
    for &kind in kinds {
        specs.extend(pool::study2_case_grid(kind)?);
    }
    run_cases(&specs, cfg)
}

/// Per-group, per-length quantiles of the reliability standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub group: String,
    pub n: usize,
    pub cases: usize,
    pub median_sd_rho: f64,
    /// Nearest-rank 90th percentile.
    pub p90_sd_rho: f64,
}

/// Summarize `sd_rho` across cases, grouped by distribution type and
/// length. Rows are ordered by (group, n).
pub fn dispersion_study(aggs: &[CaseLengthAggregate]) -> Result<Vec<DispersionRow>> {
    let mut keys: Vec<(String, usize)> = aggs.iter().map(|a| (a.group.clone(), a.n)).collect();
    keys.sort();
    keys.dedup();
    let mut rows = Vec::with_capacity(keys.len());
    for (group, n) in keys {
        let sds: Vec<f64> = aggs
            .iter()
            .filter(|a| a.group == group && a.n == n)
            .map(|a| a.sd_rho)
            .collect();
        if sds.len() < 2 {
            return Err(Error::Parameter(format!(
                "dispersion summary needs at least 2 cases per group, group {group} has {}",
                sds.len()
            )));
        }
        let mut sorted = sds.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = ((0.9 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
        rows.push(DispersionRow {
            group,
            n,
            cases: sds.len(),
            median_sd_rho: median(sds),
            p90_sd_rho: sorted[rank - 1],
        });
    }
    Ok(rows)
}

/// The dispersion study: reliability spread across the unidimensional
/// grids. Desk scale covers the first binary grid; full scale adds the
/// unidimensional beta cases, the second binary grid, and the small
/// irregular pools.
pub fn run_study3(cfg: &StudyConfig, full: bool) -> Result<(StudyOutput, Vec<DispersionRow>)> {
    let mut specs = pool::study2_case_grid(Study2Type::Binary1)?;
    if full {
        specs.extend(pool::study1_case_grid_dims(2.0, &[1])?);
        specs.extend(pool::study2_case_grid(Study2Type::Binary2)?);
        specs.extend(pool::study2_case_grid(Study2Type::Irregular)?);
    }
    let output = run_cases(&specs, cfg)?;
    let rows = dispersion_study(&output.aggregates)?;
    Ok((output, rows))
}

/// One length's distance from the pool limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub mean_rescaled: f64,
    pub limit: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSeries {
    pub case_id: String,
    pub points: Vec<ConvergencePoint>,
    /// Largest deviation over the upper half of the grid.
    pub sup_tail_deviation: f64,
}

/// Track the mean rescaled reliability toward the pool limit over a long
/// length grid.
pub fn convergence_diagnostic(
    spec: &PoolCaseSpec,
    cfg: &StudyConfig,
    long_grid: &[usize],
) -> Result<ConvergenceSeries> {
    let (aggs, limit) = run_case_on_grid(spec, cfg, long_grid)?;
    let points: Vec<ConvergencePoint> = aggs
        .iter()
        .map(|a| ConvergencePoint {
            n: a.n,
            mean_rescaled: a.mean_rescaled,
            limit,
            deviation: (a.mean_rescaled - limit).abs(),
        })
        .collect();
    let tail_from = points.len() / 2;
    let sup_tail_deviation = points[tail_from..]
        .iter()
        .map(|p| p.deviation)
        .fold(0.0, f64::max);
    Ok(ConvergenceSeries {
        case_id: spec.case_id.clone(),
        points,
        sup_tail_deviation,
    })
}

/// Grid used by the convergence preset: sparse up to 400 items.
pub fn convergence_grid() -> Vec<usize> {
    vec![10, 25, 50, 100, 200, 400]
}

/// The two built-in convergence cases: a unidimensional and a
/// five-dimensional mid-discrimination beta pool.
pub fn convergence_cases() -> Result<Vec<PoolCaseSpec>> {
    let pick = |dims: usize| -> Result<PoolCaseSpec> {
        let grid = pool::study1_case_grid_dims(2.0, &[dims])?;
        grid.into_iter()
            .find(|c| c.case_id.contains("asum12_amean1.00_bmean0"))
            .ok_or_else(|| Error::Parameter("convergence case missing from grid".into()))
    };
    Ok(vec![pick(1)?, pick(5)?])
}

/// Run the convergence diagnostic on the built-in cases.
pub fn run_convergence(cfg: &StudyConfig) -> Result<Vec<ConvergenceSeries>> {
    let grid = convergence_grid();
    convergence_cases()?
        .par_iter()
        .map(|spec| convergence_diagnostic(spec, cfg, &grid))
        .collect()
}

/// Run a closure on a dedicated rayon pool of the given size; `None` keeps
/// the global pool. Results must not depend on the choice.
pub fn with_worker_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("worker pool")
            .install(f),
    }
}

/// Render sampled forms for the optional dump: one line per form,
/// case id and replicate first, then the item indices.
pub fn render_form_dump(case_id: &str, forms: &[(usize, Vec<usize>)]) -> String {
    let mut out = String::new();
    for (replicate, items) in forms {
        out.push_str(case_id);
        out.push(',');
        out.push_str(&replicate.to_string());
        for i in items {
            out.push(',');
            out.push_str(&i.to_string());
        }
        out.push('\n');
    }
    out
}
