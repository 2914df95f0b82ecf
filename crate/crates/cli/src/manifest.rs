//! Run manifests: the resolved configuration plus the derived per-case
//! seeds and timestamps. A manifest is sufficient to reproduce every CSV
//! of its run bit for bit (pass it back as `--config`).

use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::ResolvedConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseSeed {
    pub case_id: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: ResolvedConfig,
    pub case_seeds: Vec<CaseSeed>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

impl RunManifest {
    pub fn new(config: ResolvedConfig, case_seeds: Vec<CaseSeed>, started: SystemTime) -> Self {
        let to_unix = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            config,
            case_seeds,
            started_unix: to_unix(started),
            finished_unix: to_unix(SystemTime::now()),
        }
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("run_manifest.json");
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// The per-case pool seeds a study derives from its master seed.
pub fn derive_case_seeds(master_seed: u64, case_ids: &[String]) -> Vec<CaseSeed> {
    let root = relsim_core::rng::RandomStream::new(master_seed);
    case_ids
        .iter()
        .map(|case_id| CaseSeed {
            case_id: case_id.clone(),
            seed: root.child(case_id).child("pool").seed(),
        })
        .collect()
}
