//! Item-pool construction: four-parameter-beta and discrete parameter
//! distributions, the built-in study case grids, externally supplied
//! parameter files, and seed-deterministic pool builds.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::irt::{ItemParams, ItemPool, LatentSpec};
use crate::rng::RandomStream;

/// A beta distribution rescaled to the interval `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beta4Spec {
    pub alpha: f64,
    pub beta: f64,
    pub min: f64,
    pub max: f64,
}

impl Beta4Spec {
    pub fn new(alpha: f64, beta: f64, min: f64, max: f64) -> Result<Self> {
        let shapes_ok = alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0;
        if !shapes_ok {
            return Err(Error::Parameter(format!(
                "beta shape parameters must be positive, got alpha={alpha}, beta={beta}"
            )));
        }
        let support_ok = max > min;
        if !support_ok {
            return Err(Error::Parameter(format!(
                "beta support must have max > min, got [{min}, {max}]"
            )));
        }
        Ok(Beta4Spec { alpha, beta, min, max })
    }

    /// Solve for the shapes from a target mean and a fixed `alpha + beta`,
    /// via `mean = min + (max - min) * alpha / (alpha + beta)`.
    pub fn from_mean(mean: f64, shape_sum: f64, min: f64, max: f64) -> Result<Self> {
        let mean_ok = mean > min && mean < max;
        if !mean_ok {
            return Err(Error::Parameter(format!(
                "mean {mean} must lie strictly inside ({min}, {max})"
            )));
        }
        let alpha = shape_sum * (mean - min) / (max - min);
        Self::new(alpha, shape_sum - alpha, min, max)
    }

    pub fn mean(&self) -> f64 {
        self.min + (self.max - self.min) * self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        let unit = self.alpha * self.beta / (s * s * (s + 1.0));
        unit * (self.max - self.min).powi(2)
    }
}

/// A finite table of values with probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDist {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::Parameter(
                "discrete table needs matching non-empty values and probabilities".into(),
            ));
        }
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::Parameter("discrete probabilities must be non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "discrete probabilities must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(DiscreteDist { values, probs })
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (&v, &p) in self.values.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return v;
            }
        }
        *self.values.last().unwrap()
    }
}

/// How one item parameter is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamDist {
    Beta4(Beta4Spec),
    Discrete(DiscreteDist),
}

impl ParamDist {
    pub fn uniform(min: f64, max: f64) -> Result<Self> {
        Ok(ParamDist::Beta4(Beta4Spec::new(1.0, 1.0, min, max)?))
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            ParamDist::Beta4(spec) => sample_beta4_rng(spec, rng),
            ParamDist::Discrete(d) => d.sample(rng),
        }
    }

    /// Largest value the distribution can produce.
    pub fn upper_bound(&self) -> f64 {
        match self {
            ParamDist::Beta4(spec) => spec.max,
            ParamDist::Discrete(d) => d.values.iter().copied().fold(f64::MIN, f64::max),
        }
    }
}

/// Everything needed to rebuild one study case's pool bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolCaseSpec {
    pub case_id: String,
    pub num_dimensions: usize,
    pub pool_size: usize,
    pub a_dist: ParamDist,
    pub b_dist: ParamDist,
    pub seed: u64,
}

impl PoolCaseSpec {
    /// Stamp the derived pool seed from this case's stream node.
    pub fn with_seed_from(mut self, case_stream: &RandomStream) -> Self {
        self.seed = case_stream.child("pool").seed();
        self
    }
}

fn sample_beta4_rng(spec: &Beta4Spec, rng: &mut impl Rng) -> f64 {
    let beta = rand_distr::Beta::new(spec.alpha, spec.beta).expect("validated shapes");
    spec.min + (spec.max - spec.min) * beta.sample(rng)
}

/// One draw from a four-parameter beta distribution.
pub fn sample_beta4(spec: &Beta4Spec, stream: &RandomStream) -> f64 {
    sample_beta4_rng(spec, &mut stream.rng())
}

/// Default pool size for the generated study cases.
pub const DEFAULT_POOL_SIZE: usize = 1000;

/// The unidimensional-to-five-dimensional beta-parameter case grid: for
/// each dimension count, 18 cases crossing six discrimination
/// distributions (shape sums 12 and 2; means at 1/6, 1/2 and 5/6 of
/// `a_max`) with three difficulty distributions (support (-2, 2), shape
/// sum 4, means -1, 0, 1).
pub fn study1_case_grid(a_max: f64) -> Result<Vec<PoolCaseSpec>> {
    study1_case_grid_dims(a_max, &[1, 2, 5])
}

/// The same grid restricted to chosen dimension counts.
pub fn study1_case_grid_dims(a_max: f64, dims: &[usize]) -> Result<Vec<PoolCaseSpec>> {
    let a_max_ok = a_max.is_finite() && a_max > 0.0;
    if !a_max_ok {
        return Err(Error::Parameter(format!("a_max must be positive, got {a_max}")));
    }
    let mut cases = Vec::new();
    for &num_dimensions in dims {
        for &shape_sum in &[12.0, 2.0] {
            for &mean_frac in &[1.0 / 6.0, 0.5, 5.0 / 6.0] {
                let a_mean = a_max * mean_frac;
                for &b_mean in &[-1.0, 0.0, 1.0] {
                    let case_id = format!(
                        "s1_d{num_dimensions}_amax{amax}_asum{ssum}_amean{am:.2}_bmean{bm}",
                        amax = a_max,
                        ssum = shape_sum,
                        am = a_mean,
                        bm = b_mean,
                    );
                    cases.push(PoolCaseSpec {
                        case_id,
                        num_dimensions,
                        pool_size: DEFAULT_POOL_SIZE,
                        a_dist: ParamDist::Beta4(Beta4Spec::from_mean(a_mean, shape_sum, 0.0, a_max)?),
                        b_dist: ParamDist::Beta4(Beta4Spec::from_mean(b_mean, 4.0, -2.0, 2.0)?),
                        seed: 0,
                    });
                }
            }
        }
    }
    Ok(cases)
}

/// The unidimensional binary/irregular parameter grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Study2Type {
    /// Two-point discriminations {0.5, 2.0} and difficulties {-1.7, 1.7}.
    Binary1,
    /// Same, with difficulties {0, 1.7}.
    Binary2,
    /// 100 small pools of 10 items with uniform parameters.
    Irregular,
}

pub fn study2_case_grid(kind: Study2Type) -> Result<Vec<PoolCaseSpec>> {
    let mut cases = Vec::new();
    match kind {
        Study2Type::Binary1 | Study2Type::Binary2 => {
            let (b_lo, tag) = match kind {
                Study2Type::Binary1 => (-1.7, "b1"),
                _ => (0.0, "b2"),
            };
            for &p_a in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                for &p_b in &[0.1, 0.5, 0.9] {
                    cases.push(PoolCaseSpec {
                        case_id: format!("s2_{tag}_pa{p_a}_pb{p_b}"),
                        num_dimensions: 1,
                        pool_size: DEFAULT_POOL_SIZE,
                        a_dist: ParamDist::Discrete(DiscreteDist::new(
                            vec![0.5, 2.0],
                            vec![p_a, 1.0 - p_a],
                        )?),
                        b_dist: ParamDist::Discrete(DiscreteDist::new(
                            vec![b_lo, 1.7],
                            vec![p_b, 1.0 - p_b],
                        )?),
                        seed: 0,
                    });
                }
            }
        }
        Study2Type::Irregular => {
            for k in 0..100 {
                cases.push(PoolCaseSpec {
                    case_id: format!("s2_irr_{k:03}"),
                    num_dimensions: 1,
                    pool_size: 10,
                    a_dist: ParamDist::uniform(0.5, 2.0)?,
                    b_dist: ParamDist::uniform(-2.0, 2.0)?,
                    seed: 0,
                });
            }
        }
    }
    Ok(cases)
}

/// Build the pool for a case: parameters from its distributions, each item
/// assigned a uniformly random dimension, everything driven by the case
/// seed alone.
pub fn build_pool(spec: &PoolCaseSpec) -> Result<ItemPool> {
    if spec.pool_size == 0 {
        return Err(Error::Parameter("pool size must be positive".into()));
    }
    let latent = LatentSpec::new(spec.num_dimensions)?;
    let mut rng = RandomStream::new(spec.seed).rng();
    let mut items = Vec::with_capacity(spec.pool_size);
    for _ in 0..spec.pool_size {
        let a = spec.a_dist.sample(&mut rng);
        let b = spec.b_dist.sample(&mut rng);
        let dim = rng.gen_range(1..=spec.num_dimensions);
        items.push(ItemParams::new(a, b, dim).map_err(|e| {
            Error::Parameter(format!("case {}: generated invalid item: {e}", spec.case_id))
        })?);
    }
    ItemPool::new(latent, items)
}

/// Load a pool from a delimiter-separated text file with header `a,b` or
/// `a,b,dim`. Rows are one item each; the dimension column defaults to 1.
pub fn load_external_pool(path: &Path) -> Result<ItemPool> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut items = Vec::new();
    let mut has_dim_col = false;
    let mut header_seen = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !header_seen {
            header_seen = true;
            let lower: Vec<String> = fields.iter().map(|f| f.to_ascii_lowercase()).collect();
            match lower.as_slice() {
                [a, b] if a == "a" && b == "b" => has_dim_col = false,
                [a, b, d] if a == "a" && b == "b" && d == "dim" => has_dim_col = true,
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected header 'a,b' or 'a,b,dim', got '{line}'"),
                    })
                }
            }
            continue;
        }
        let expected = if has_dim_col { 3 } else { 2 };
        if fields.len() != expected {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {expected} fields, got {}", fields.len()),
            });
        }
        let parse_f = |s: &str, name: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("could not parse {name} value '{s}'"),
            })
        };
        let a = parse_f(fields[0], "a")?;
        let b = parse_f(fields[1], "b")?;
        let dim = if has_dim_col {
            fields[2].parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("could not parse dim value '{}'", fields[2]),
            })?
        } else {
            1
        };
        let item = ItemParams::new(a, b, dim).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    if items.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "pool file contains no items".into(),
        });
    }
    let num_dimensions = items.iter().map(|it| it.dim).max().unwrap_or(1);
    ItemPool::new(LatentSpec::new(num_dimensions)?, items)
}

/// Serialize a case list (ids and resolved hyperparameters) as JSON.
pub fn cases_to_json(cases: &[PoolCaseSpec]) -> String {
    serde_json::to_string_pretty(cases).expect("case specs serialize")
}
