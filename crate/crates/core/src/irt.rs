//! Multidimensional 2PL response model: exact item moments over independent
//! standard-normal traits, true-score covariances, and form-level
//! reliability.
//!
//! An item loads on exactly one latent dimension. Conditional on the trait
//! vector, responses are independent Bernoulli draws with probability given
//! by the logistic response function, so an item's true score is its
//! response function evaluated at the trait and its error variance is
//! `E[P(1-P)]`. Items appearing more than once in a form are treated as
//! independent replications: their true scores coincide (full covariance)
//! while their errors stay independent.

use rayon::prelude::*;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::quad::{PreparedTransition, QuadratureRule, Transition};
use crate::sb;
use crate::sampler::TestForm;

/// Scaling constant of the logistic response function.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelConstants {
    pub d: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants { d: 1.7 }
    }
}

/// One item: discrimination, difficulty, and the latent dimension it loads
/// on (1-based).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ItemParams {
    pub a: f64,
    pub b: f64,
    pub dim: usize,
}

impl ItemParams {
    pub fn new(a: f64, b: f64, dim: usize) -> Result<Self> {
        let a_ok = a.is_finite() && a > 0.0;
        if !a_ok {
            return Err(Error::Parameter(format!(
                "discrimination must be positive and finite, got {a}"
            )));
        }
        if !b.is_finite() {
            return Err(Error::Parameter(format!("difficulty must be finite, got {b}")));
        }
        if dim == 0 {
            return Err(Error::Parameter("dimension index is 1-based".into()));
        }
        Ok(ItemParams { a, b, dim })
    }

    pub fn unidimensional(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, 1)
    }
}

/// The latent space: independent standard-normal coordinates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LatentSpec {
    pub num_dimensions: usize,
}

impl LatentSpec {
    pub fn new(num_dimensions: usize) -> Result<Self> {
        if num_dimensions == 0 {
            return Err(Error::Parameter("latent space needs at least one dimension".into()));
        }
        Ok(LatentSpec { num_dimensions })
    }
}

/// A finite universe of items over a shared latent space.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ItemPool {
    pub latent: LatentSpec,
    pub items: Vec<ItemParams>,
}

impl ItemPool {
    pub fn new(latent: LatentSpec, items: Vec<ItemParams>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Parameter("item pool must be non-empty".into()));
        }
        if let Some(bad) = items.iter().find(|it| it.dim > latent.num_dimensions) {
            return Err(Error::Parameter(format!(
                "item dimension {} exceeds latent dimensions {}",
                bad.dim, latent.num_dimensions
            )));
        }
        Ok(ItemPool { latent, items })
    }

    pub fn unidimensional(items: Vec<ItemParams>) -> Result<Self> {
        Self::new(LatentSpec { num_dimensions: 1 }, items)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Largest discrimination in the pool.
    pub fn max_discrimination(&self) -> f64 {
        self.items.iter().map(|it| it.a).fold(0.0, f64::max)
    }
}

/// Exact moments of one item under the standard-normal trait.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ItemMoments {
    /// Marginal success probability `E[X]`.
    pub mu: f64,
    /// True-score variance `var(E[X | trait])`.
    pub tau_sq: f64,
    /// Error variance `E[P(1-P)]`.
    pub eps_sq: f64,
    /// Observed-score variance; equals `mu (1 - mu)` for a binary item and
    /// decomposes as `tau_sq + eps_sq`.
    pub sigma_sq: f64,
}

const MOMENT_CONSISTENCY_TOL: f64 = 1e-8;

/// Probability of a positive response at the given coordinate of the trait
/// vector (the coordinate the item loads on).
pub fn irf(item: &ItemParams, theta: f64, c: ModelConstants) -> f64 {
    stable_logistic(c.d * item.a * (theta - item.b))
}

fn stable_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn transition(item: &ItemParams, c: ModelConstants) -> Transition {
    Transition::new(item.b, c.d * item.a)
}

/// Exact moments of an item by transition-adapted quadrature.
pub fn item_moments(item: &ItemParams, rule: &QuadratureRule, c: ModelConstants) -> Result<ItemMoments> {
    item_moments_prepared(item, rule.prepare(transition(item, c)), rule, c)
}

fn item_moments_prepared(
    item: &ItemParams,
    prep: PreparedTransition,
    rule: &QuadratureRule,
    c: ModelConstants,
) -> Result<ItemMoments> {
    let realized = rule.realize_prepared(&[prep]);
    let mut mu = 0.0;
    let mut m2 = 0.0;
    let mut eps = 0.0;
    for (&x, &w) in realized.nodes.iter().zip(&realized.weights) {
        let p = irf(item, x, c);
        mu += w * p;
        m2 += w * p * p;
        eps += w * p * (1.0 - p);
    }
    let tau_sq = (m2 - mu * mu).max(0.0);
    let sigma_sq = mu * (1.0 - mu);
    let gap = (sigma_sq - (tau_sq + eps)).abs();
    if !gap.is_finite() || gap > MOMENT_CONSISTENCY_TOL {
        return Err(Error::QuadratureInconsistency {
            gap,
            tol: MOMENT_CONSISTENCY_TOL,
        });
    }
    Ok(ItemMoments {
        mu,
        tau_sq,
        eps_sq: eps,
        sigma_sq,
    })
}

/// Covariance of the true scores of two items. Zero across dimensions
/// (independent traits); a one-dimensional integral on a shared dimension;
/// the item's own true-score variance when the parameters coincide (the
/// duplicate-draw case).
pub fn true_score_cov(
    i: &ItemParams,
    j: &ItemParams,
    rule: &QuadratureRule,
    c: ModelConstants,
) -> Result<f64> {
    if i.dim != j.dim {
        return Ok(0.0);
    }
    if i.a == j.a && i.b == j.b {
        return Ok(item_moments(i, rule, c)?.tau_sq);
    }
    let trans = [transition(i, c), transition(j, c)];
    let realized = rule.realize(&trans);
    let mut m12 = 0.0;
    let mut mi = 0.0;
    let mut mj = 0.0;
    for (&x, &w) in realized.nodes.iter().zip(&realized.weights) {
        let pi = irf(i, x, c);
        let pj = irf(j, x, c);
        m12 += w * pi * pj;
        mi += w * pi;
        mj += w * pj;
    }
    Ok(m12 - mi * mj)
}

/// Reliability and variance pieces of one fixed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormReliability {
    /// True-score variance of the form mean, `var(T | form)`.
    pub true_var: f64,
    /// Error variance of the form mean: mean item error variance over n.
    pub err_var: f64,
    /// Mean item error variance across the form.
    pub mean_eps_sq: f64,
    /// `true_var / (true_var + err_var)`.
    pub rho: f64,
    /// The reliability rescaled to unit length.
    pub rescaled: f64,
}

fn assemble_reliability(sum_cov: f64, sum_eps: f64, n: usize) -> Result<FormReliability> {
    let nf = n as f64;
    let true_var = sum_cov / (nf * nf);
    let err_var = sum_eps / (nf * nf);
    let total = true_var + err_var;
    if total <= 0.0 {
        return Err(Error::DegenerateForm);
    }
    let rho = (true_var / total).clamp(0.0, 1.0);
    let rescaled = sb::spearman_brown(
        sb::Reliability::saturating(rho),
        sb::LengthFactor::unit_rescale(n as u64).expect("n >= 1"),
    )
    .get();
    Ok(FormReliability {
        true_var,
        err_var,
        mean_eps_sq: sum_eps / nf,
        rho,
        rescaled,
    })
}

/// The large-form limit of the rescaled reliability for a pool.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PoolLimit {
    /// Variance of the universe score (the pool-average true score).
    pub universe_var: f64,
    /// Pool-average item error variance.
    pub mean_eps_sq: f64,
    /// `universe_var / (universe_var + mean_eps_sq)`.
    pub limit: f64,
}

/// A pool bound to a quadrature rule, with item moments and the full
/// true-score covariance matrix precomputed. Immutable after construction;
/// form evaluations are pure and can run from any number of threads.
pub struct PoolContext<'p> {
    pool: &'p ItemPool,
    constants: ModelConstants,
    moments: Vec<ItemMoments>,
    cov: Vec<f64>,
    n_items: usize,
}

impl<'p> PoolContext<'p> {
    pub fn new(pool: &'p ItemPool, rule: &QuadratureRule) -> Result<Self> {
        Self::with_constants(pool, rule, ModelConstants::default())
    }

    pub fn with_constants(
        pool: &'p ItemPool,
        rule: &QuadratureRule,
        constants: ModelConstants,
    ) -> Result<Self> {
        let n = pool.len();

        // Items sharing identical parameters (binary-valued pools collapse
        // to a handful of classes) are computed once.
        let mut class_of = Vec::with_capacity(n);
        let mut class_items: Vec<usize> = Vec::new();
        let mut index: HashMap<(u64, u64, usize), usize> = HashMap::new();
        for (i, it) in pool.items.iter().enumerate() {
            let key = (it.a.to_bits(), it.b.to_bits(), it.dim);
            let cls = *index.entry(key).or_insert_with(|| {
                class_items.push(i);
                class_items.len() - 1
            });
            class_of.push(cls);
        }
        let k = class_items.len();

        let prepared: Vec<PreparedTransition> = class_items
            .par_iter()
            .map(|&i| rule.prepare(transition(&pool.items[i], constants)))
            .collect();

        let class_moments: Vec<ItemMoments> = class_items
            .par_iter()
            .zip(&prepared)
            .map(|(&i, &prep)| item_moments_prepared(&pool.items[i], prep, rule, constants))
            .collect::<Result<_>>()?;

        // Same-dimension class covariance table, diagonal from the moment
        // pass so duplicate draws agree with `tau_sq` exactly.
        let class_cov: Vec<f64> = (0..k * k)
            .into_par_iter()
            .with_min_len(64)
            .map(|idx| {
                let (ci, cj) = (idx / k, idx % k);
                let (ii, ij) = (class_items[ci], class_items[cj]);
                if ci == cj {
                    class_moments[ci].tau_sq
                } else if cj < ci {
                    0.0 // filled from the transpose below
                } else {
                    let (a, b) = (&pool.items[ii], &pool.items[ij]);
                    if a.dim != b.dim {
                        0.0
                    } else {
                        pair_cov_prepared(a, b, [prepared[ci], prepared[cj]], rule, constants)
                    }
                }
            })
            .collect();
        let mut class_cov = class_cov;
        for ci in 0..k {
            for cj in 0..ci {
                class_cov[ci * k + cj] = class_cov[cj * k + ci];
            }
        }

        let moments: Vec<ItemMoments> = class_of.iter().map(|&c| class_moments[c]).collect();
        let cov: Vec<f64> = (0..n * n)
            .map(|idx| class_cov[class_of[idx / n] * k + class_of[idx % n]])
            .collect();

        Ok(PoolContext {
            pool,
            constants,
            moments,
            cov,
            n_items: n,
        })
    }

    pub fn pool(&self) -> &ItemPool {
        self.pool
    }

    pub fn constants(&self) -> ModelConstants {
        self.constants
    }

    pub fn item_moments(&self, index: usize) -> ItemMoments {
        self.moments[index]
    }

    pub fn true_score_cov(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.n_items + j]
    }

    /// Reliability of one fixed form.
    pub fn form_reliability(&self, form: &TestForm) -> Result<FormReliability> {
        let idx = form.item_indices();
        self.check_indices(idx)?;
        let n = idx.len();
        let mut sum_cov = 0.0;
        let mut sum_eps = 0.0;
        for (pos, &i) in idx.iter().enumerate() {
            sum_cov += self.cov[i * self.n_items + i];
            for &j in &idx[pos + 1..] {
                sum_cov += 2.0 * self.cov[i * self.n_items + j];
            }
            sum_eps += self.moments[i].eps_sq;
        }
        assemble_reliability(sum_cov, sum_eps, n)
    }

    /// Reliabilities of every prefix of `items` whose length appears in the
    /// ascending `grid`, computed incrementally so a whole trajectory costs
    /// one pass over the final form's item pairs.
    pub fn prefix_reliabilities(&self, items: &[usize], grid: &[usize]) -> Result<Vec<FormReliability>> {
        self.check_indices(items)?;
        let mut out = Vec::with_capacity(grid.len());
        let mut sum_cov = 0.0;
        let mut sum_eps = 0.0;
        let mut next = 0;
        for (m, &t) in items.iter().enumerate() {
            let row = &self.cov[t * self.n_items..(t + 1) * self.n_items];
            let mut cross = 0.0;
            for &prev in &items[..m] {
                cross += row[prev];
            }
            sum_cov += row[t] + 2.0 * cross;
            sum_eps += self.moments[t].eps_sq;
            while next < grid.len() && grid[next] == m + 1 {
                out.push(assemble_reliability(sum_cov, sum_eps, m + 1)?);
                next += 1;
            }
        }
        if next != grid.len() {
            return Err(Error::Parameter(format!(
                "trajectory of {} items cannot serve grid lengths beyond it",
                items.len()
            )));
        }
        Ok(out)
    }

    /// The asymptotic reliability of long random forms from this pool.
    ///
    /// The universe score is the pool-average response function, which
    /// splits across dimensions into independent pieces, so its variance is
    /// the grand mean of the true-score covariance matrix.
    pub fn universe_limit(&self) -> PoolLimit {
        let n = self.n_items as f64;
        let sum_cov: f64 = self.cov.iter().sum();
        let universe_var = sum_cov / (n * n);
        let mean_eps_sq = self.moments.iter().map(|m| m.eps_sq).sum::<f64>() / n;
        PoolLimit {
            universe_var,
            mean_eps_sq,
            limit: universe_var / (universe_var + mean_eps_sq),
        }
    }

    fn check_indices(&self, idx: &[usize]) -> Result<()> {
        if idx.is_empty() {
            return Err(Error::Parameter("form must contain at least one item".into()));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.n_items) {
            return Err(Error::Parameter(format!(
                "item index {bad} out of range for pool of {}",
                self.n_items
            )));
        }
        Ok(())
    }
}

fn pair_cov(i: &ItemParams, j: &ItemParams, rule: &QuadratureRule, c: ModelConstants) -> f64 {
    let prepared = [
        rule.prepare(transition(i, c)),
        rule.prepare(transition(j, c)),
    ];
    pair_cov_prepared(i, j, prepared, rule, c)
}

fn pair_cov_prepared(
    i: &ItemParams,
    j: &ItemParams,
    prepared: [PreparedTransition; 2],
    rule: &QuadratureRule,
    c: ModelConstants,
) -> f64 {
    let realized = rule.realize_prepared(&prepared);
    let mut m12 = 0.0;
    let mut mi = 0.0;
    let mut mj = 0.0;
    for (&x, &w) in realized.nodes.iter().zip(&realized.weights) {
        let pi = irf(i, x, c);
        let pj = irf(j, x, c);
        m12 += w * pi * pj;
        mi += w * pi;
        mj += w * pj;
    }
    m12 - mi * mj
}

/// One-off form reliability without a prebuilt context; computes only the
/// moments and pairs the form touches.
pub fn form_reliability(form: &TestForm, pool: &ItemPool, rule: &QuadratureRule) -> Result<FormReliability> {
    let c = ModelConstants::default();
    let idx = form.item_indices();
    if idx.is_empty() {
        return Err(Error::Parameter("form must contain at least one item".into()));
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= pool.len()) {
        return Err(Error::Parameter(format!(
            "item index {bad} out of range for pool of {}",
            pool.len()
        )));
    }
    let mut moment_memo: HashMap<usize, ItemMoments> = HashMap::new();
    let mut cov_memo: HashMap<(usize, usize), f64> = HashMap::new();
    let n = idx.len();
    let mut sum_cov = 0.0;
    let mut sum_eps = 0.0;
    for (pos, &i) in idx.iter().enumerate() {
        let mi = match moment_memo.get(&i) {
            Some(m) => *m,
            None => {
                let m = item_moments(&pool.items[i], rule, c)?;
                moment_memo.insert(i, m);
                m
            }
        };
        sum_cov += mi.tau_sq;
        sum_eps += mi.eps_sq;
        for &j in &idx[pos + 1..] {
            let key = (i.min(j), i.max(j));
            let cv = match cov_memo.get(&key) {
                Some(c) => *c,
                None => {
                    let (it, jt) = (&pool.items[key.0], &pool.items[key.1]);
                    let cv = if key.0 == key.1 {
                        mi.tau_sq
                    } else if it.dim != jt.dim {
                        0.0
                    } else {
                        pair_cov(it, jt, rule, c)
                    };
                    cov_memo.insert(key, cv);
                    cv
                }
            };
            sum_cov += 2.0 * cv;
        }
    }
    assemble_reliability(sum_cov, sum_eps, n)
}

/// Asymptotic reliability limit of a pool; builds the full covariance
/// structure, so prefer [`PoolContext::universe_limit`] when evaluating
/// forms from the same pool as well.
pub fn universe_limit(pool: &ItemPool, rule: &QuadratureRule) -> Result<PoolLimit> {
    Ok(PoolContext::new(pool, rule)?.universe_limit())
}
