//! Exhaustive enumeration of test forms over tiny pools, and closed-form
//! correlation identities for exchangeable item sampling. These serve as
//! independent oracles for the Monte Carlo harness.
//!
//! The abstract pools here are essentially tau-equivalent: every class
//! shares one true-score variable (a single `tau_sq`), while error
//! variances differ per class. Reliability of a form then depends only on
//! its mean error variance, which makes all `k^n` ordered forms cheap to
//! enumerate exactly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::irt::{FormReliability, ItemPool, PoolContext};
use crate::quad::QuadratureRule;
use crate::sampler::TestForm;
use crate::sb;

/// Default cap on the number of enumerated forms.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// One class of interchangeable items with a class-specific error variance.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractItemClass {
    pub label: String,
    pub eps_sq: f64,
}

/// An essentially tau-equivalent universe: one shared true-score variance,
/// several error-variance classes.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractPool {
    tau_sq: f64,
    classes: Vec<AbstractItemClass>,
}

impl AbstractPool {
    pub fn new(tau_sq: f64, classes: Vec<AbstractItemClass>) -> Result<Self> {
        let tau_ok = tau_sq.is_finite() && tau_sq >= 0.0;
        if !tau_ok {
            return Err(Error::Parameter(format!(
                "shared true-score variance must be non-negative, got {tau_sq}"
            )));
        }
        if classes.is_empty() {
            return Err(Error::Parameter("abstract pool needs at least one class".into()));
        }
        if let Some(bad) = classes
            .iter()
            .find(|c| c.eps_sq.is_nan() || c.eps_sq <= 0.0)
        {
            return Err(Error::Parameter(format!(
                "class {} must have positive error variance",
                bad.label
            )));
        }
        Ok(AbstractPool { tau_sq, classes })
    }

    /// The worked three-class example: error variances 3, 6 and 9 with
    /// shared true-score variance 1.
    pub fn three_class_example() -> Self {
        AbstractPool::new(
            1.0,
            [("A", 3.0), ("B", 6.0), ("C", 9.0)]
                .into_iter()
                .map(|(l, e)| AbstractItemClass {
                    label: l.into(),
                    eps_sq: e,
                })
                .collect(),
        )
        .expect("static example is valid")
    }

    pub fn tau_sq(&self) -> f64 {
        self.tau_sq
    }

    pub fn classes(&self) -> &[AbstractItemClass] {
        &self.classes
    }

    /// Reliability of a form drawn from this pool: the shared true-score
    /// variance against the mean error variance over n.
    pub fn form_rho(&self, class_indices: &[usize]) -> f64 {
        let n = class_indices.len() as f64;
        let mean_eps: f64 =
            class_indices.iter().map(|&c| self.classes[c].eps_sq).sum::<f64>() / n;
        self.tau_sq / (self.tau_sq + mean_eps / n)
    }

    /// The long-form rescaled-reliability limit for this pool under
    /// uniform class sampling.
    pub fn universe_limit(&self) -> f64 {
        let mean_eps: f64 =
            self.classes.iter().map(|c| c.eps_sq).sum::<f64>() / self.classes.len() as f64;
        self.tau_sq / (self.tau_sq + mean_eps)
    }
}

/// One enumerated ordered form.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationRecord {
    /// Class index per position.
    pub classes: Vec<usize>,
    /// Concatenated class labels, e.g. "ACC".
    pub label: String,
    /// Per-position error variances.
    pub eps_sqs: Vec<f64>,
    pub mean_eps_sq: f64,
    /// Reliability of the full form.
    pub rho: f64,
    /// Reliability of the single-item form made of the first position.
    pub rho_first: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationSummary {
    pub n: usize,
    pub median_rho: f64,
    pub mean_rho: f64,
}

/// Every ordered form, plus medians and means of the full-length and
/// first-item reliabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult {
    pub records: Vec<EnumerationRecord>,
    pub full_length: EnumerationSummary,
    pub single_item: EnumerationSummary,
}

/// Enumerate all `k^n` ordered forms of length `n` over the pool's classes
/// in lexicographic order (first position most significant).
pub fn enumerate_forms(pool: &AbstractPool, n: usize, cap: u64) -> Result<EnumerationResult> {
    if n == 0 {
        return Err(Error::Parameter("form length must be at least 1".into()));
    }
    let k = pool.classes.len();
    let total = (k as u128).pow(n as u32);
    if total > cap as u128 {
        return Err(Error::EnumerationCap { forms: total, cap });
    }
    let total = total as u64;

    let records: Vec<EnumerationRecord> = (0..k)
        .into_par_iter()
        .flat_map_iter(|first| {
            let block = total as usize / k;
            (0..block).map(move |offset| {
                let mut classes = vec![0usize; n];
                classes[0] = first;
                let mut rem = offset;
                for pos in (1..n).rev() {
                    classes[pos] = rem % k;
                    rem /= k;
                }
                classes
            })
        })
        .map(|classes| {
            let eps_sqs: Vec<f64> = classes.iter().map(|&c| pool.classes[c].eps_sq).collect();
            let mean_eps_sq = eps_sqs.iter().sum::<f64>() / n as f64;
            let rho = pool.form_rho(&classes);
            let rho_first = pool.tau_sq / (pool.tau_sq + eps_sqs[0]);
            let label = classes.iter().map(|&c| pool.classes[c].label.as_str()).collect();
            EnumerationRecord {
                classes,
                label,
                eps_sqs,
                mean_eps_sq,
                rho,
                rho_first,
            }
        })
        .collect();

    let full: Vec<f64> = records.iter().map(|r| r.rho).collect();
    let first: Vec<f64> = records.iter().map(|r| r.rho_first).collect();
    Ok(EnumerationResult {
        full_length: EnumerationSummary {
            n,
            median_rho: median(full.clone()),
            mean_rho: mean(&full),
        },
        single_item: EnumerationSummary {
            n: 1,
            median_rho: median(first.clone()),
            mean_rho: mean(&first),
        },
        records,
    })
}

/// Enumerate the reliabilities of every ordered form of pool items (2PL
/// pools this time), for oracle comparisons against the sampling harness.
pub fn enumerate_form_reliabilities(
    ctx: &PoolContext<'_>,
    n: usize,
    cap: u64,
) -> Result<Vec<FormReliability>> {
    if n == 0 {
        return Err(Error::Parameter("form length must be at least 1".into()));
    }
    let k = ctx.pool().len();
    let total = (k as u128).pow(n as u32);
    if total > cap as u128 {
        return Err(Error::EnumerationCap { forms: total, cap });
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut indices = vec![0usize; n];
    loop {
        out.push(ctx.form_reliability(&TestForm::new(indices.clone())?)?);
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < k {
                break;
            }
            indices[pos] = 0;
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median with the midpoint convention for even counts.
pub(crate) fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Marginal moments of a randomly drawn item's score: the variance of a
/// single shuffled observation and the covariance and correlation between
/// two independent draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalMoments {
    /// `var(X)` for one random draw: mean observed variance plus the
    /// variance of item means.
    pub var1: f64,
    /// Covariance of the scores from two independent draws; equals the
    /// universe-score variance of the pool.
    pub cov12: f64,
    /// `cov12 / var1`.
    pub rho12: f64,
}

/// Compute [`MarginalMoments`] from a pool's moment structure.
pub fn marginal_moments(ctx: &PoolContext<'_>) -> MarginalMoments {
    let k = ctx.pool().len();
    let mut mean_sigma = 0.0;
    let mut mean_mu = 0.0;
    let mut mean_mu_sq = 0.0;
    for i in 0..k {
        let m = ctx.item_moments(i);
        mean_sigma += m.sigma_sq;
        mean_mu += m.mu;
        mean_mu_sq += m.mu * m.mu;
    }
    let kf = k as f64;
    mean_sigma /= kf;
    mean_mu /= kf;
    mean_mu_sq /= kf;
    let var1 = mean_sigma + (mean_mu_sq - mean_mu * mean_mu);
    let cov12 = ctx.universe_limit().universe_var;
    MarginalMoments {
        var1,
        cov12,
        rho12: cov12 / var1,
    }
}

/// The correlation between the means of two disjoint random forms of
/// length `n`, computed two ways that must agree for exchangeable item
/// sampling: assembled from the marginal moments, and predicted by the
/// Spearman-Brown map of the single-draw correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedFormCorrelation {
    pub assembled: f64,
    pub predicted: f64,
}

pub fn paired_form_correlation(ctx: &PoolContext<'_>, n: usize) -> Result<PairedFormCorrelation> {
    if n == 0 {
        return Err(Error::Parameter("form length must be at least 1".into()));
    }
    let m = marginal_moments(ctx);
    let nf = n as f64;
    // cov of disjoint-form means is cov12; a form mean has variance
    // var1/n + (n-1) cov12 / n.
    let form_var = m.var1 / nf + (nf - 1.0) * m.cov12 / nf;
    let assembled = m.cov12 / form_var;
    let predicted = sb::sb_value(m.rho12, nf);
    Ok(PairedFormCorrelation { assembled, predicted })
}

/// Convenience for callers holding a bare pool and rule.
pub fn paired_form_correlation_for_pool(
    pool: &ItemPool,
    n: usize,
    rule: &QuadratureRule,
) -> Result<PairedFormCorrelation> {
    let ctx = PoolContext::new(pool, rule)?;
    paired_form_correlation(&ctx, n)
}
