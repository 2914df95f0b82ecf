//! Configuration resolution: defaults, then config file, then flags, in
//! rising priority. A run manifest embeds the resolved config, so a
//! manifest file is accepted anywhere a config file is.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use relsim_core::harness::StudyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Study1,
    Study2,
    Study3,
    Converge,
    Table1,
}

impl std::str::FromStr for Preset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "study1" => Preset::Study1,
            "study2" => Preset::Study2,
            "study3" => Preset::Study3,
            "converge" => Preset::Converge,
            "table1" => Preset::Table1,
            other => bail!("unknown preset '{other}' (expected study1|study2|study3|converge|table1)"),
        })
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Preset::Study1 => "study1",
            Preset::Study2 => "study2",
            Preset::Study3 => "study3",
            Preset::Converge => "converge",
            Preset::Table1 => "table1",
        };
        f.write_str(s)
    }
}

/// On-disk study configuration; every field optional so files can be
/// partial. Flags override file values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FileConfig {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub lengths: Option<Vec<usize>>,
    pub dims: Option<usize>,
    pub a_max: Option<f64>,
    pub quad_nodes: Option<usize>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub full: Option<bool>,
}

/// Fully resolved settings recorded in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResolvedConfig {
    pub preset: Preset,
    pub seed: u64,
    pub replicates: usize,
    pub lengths: Vec<usize>,
    pub dims: usize,
    pub a_max: f64,
    pub quad_nodes: usize,
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
    pub full: bool,
}

impl ResolvedConfig {
    pub fn study_config(&self) -> StudyConfig {
        StudyConfig {
            lengths: self.lengths.clone(),
            replicates: self.replicates,
            master_seed: self.seed,
            quad_order: self.quad_nodes,
        }
    }
}

/// A config file or the `config` object of a manifest.
pub fn load_file_config(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("config file {} is not valid JSON", path.display()))?;
    let config_value = match value.get("config") {
        Some(inner) if value.get("tool_version").is_some() => inner.clone(),
        _ => value,
    };
    serde_json::from_value(config_value)
        .with_context(|| format!("config file {} has unexpected fields", path.display()))
}

pub struct Overrides {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub lengths: Option<Vec<usize>>,
    pub dims: Option<usize>,
    pub a_max: Option<f64>,
    pub quad_nodes: Option<usize>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub full: bool,
}

pub fn resolve(file: FileConfig, flags: Overrides) -> anyhow::Result<ResolvedConfig> {
    let preset = flags
        .preset
        .or(file.preset)
        .context("no preset given (use --preset or a config file)")?;
    let full = flags.full || file.full.unwrap_or(false);
    let default_replicates = if full { 1000 } else { 200 };
    let out_dir = flags
        .out_dir
        .or(file.out_dir)
        .or_else(|| std::env::var_os("RELSIM_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("relsim-out"));
    let cfg = ResolvedConfig {
        preset,
        seed: flags.seed.or(file.seed).unwrap_or(20240501),
        replicates: flags.replicates.or(file.replicates).unwrap_or(default_replicates),
        lengths: flags
            .lengths
            .or(file.lengths)
            .unwrap_or_else(StudyConfig::default_lengths),
        dims: flags.dims.or(file.dims).unwrap_or(1),
        a_max: flags.a_max.or(file.a_max).unwrap_or(2.0),
        quad_nodes: flags.quad_nodes.or(file.quad_nodes).unwrap_or(61),
        workers: flags.workers.or(file.workers),
        out_dir,
        full,
    };
    if ![1, 2, 5].contains(&cfg.dims) {
        bail!("--dims must be 1, 2 or 5, got {}", cfg.dims);
    }
    if cfg.a_max != 2.0 && cfg.a_max != 5.0 {
        bail!("--a-max must be 2 or 5, got {}", cfg.a_max);
    }
    cfg.study_config()
        .validate()
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    relsim_core::quad::QuadratureRule::new(cfg.quad_nodes)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(cfg)
}

pub fn parse_lengths(text: &str) -> anyhow::Result<Vec<usize>> {
    let lengths: Vec<usize> = text
        .split(',')
        .map(|part| part.trim().parse::<usize>().context("lengths must be integers"))
        .collect::<anyhow::Result<_>>()?;
    if lengths.is_empty() {
        bail!("--lengths needs at least one value");
    }
    Ok(lengths)
}
