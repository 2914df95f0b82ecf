//! Command-line front end: run the built-in studies and write their CSVs,
//! or apply length predictions to a user-supplied item pool.

mod config;
mod manifest;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

use relsim_core::harness::{self, run_cases, with_worker_pool, StudyOutput};
use relsim_core::pool::{self, PoolCaseSpec, Study2Type};
use relsim_core::quad::QuadratureRule;
use relsim_core::report;
use relsim_core::rng::RandomStream;
use relsim_core::sampler;
use relsim_core::sb;

use config::{load_file_config, parse_lengths, resolve, FileConfig, Overrides, Preset, ResolvedConfig};
use manifest::{derive_case_seeds, RunManifest};

#[derive(Parser)]
#[command(
    name = "relsim",
    version,
    about = "Reliability of random test forms: simulation studies and length predictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in study preset and write its CSV outputs.
    Study(StudyArgs),
    /// Predict a pool's mean reliability at other test lengths.
    Prophecy(ProphecyArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// study1 | study2 | study3 | converge | table1
    #[arg(long)]
    preset: Option<Preset>,
    /// JSON config file (or a previous run's manifest).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; every stream derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectories per case (desk default 200; 1000 with --full).
    #[arg(long)]
    replicates: Option<usize>,
    /// Comma-separated ascending form lengths, e.g. 10,15,20.
    #[arg(long)]
    lengths: Option<String>,
    /// Latent dimensions for study1 at desk scale (1, 2 or 5).
    #[arg(long)]
    dims: Option<usize>,
    /// Discrimination maximum for study1 (2 or 5).
    #[arg(long = "a-max")]
    a_max: Option<f64>,
    /// Quadrature node budget per transition.
    #[arg(long = "quad-nodes")]
    quad_nodes: Option<usize>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: $RELSIM_OUT_DIR or ./relsim-out).
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Full scale: 1000 replicates and the complete case grids.
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct ProphecyArgs {
    /// Item parameter file: header `a,b` or `a,b,dim`, one item per row.
    #[arg(long)]
    pool: PathBuf,
    /// The length whose mean reliability anchors the predictions.
    #[arg(long = "from-len")]
    from_len: usize,
    /// Comma-separated target lengths.
    #[arg(long = "to-lens")]
    to_lens: String,
    /// Random forms used to estimate the anchor reliability.
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    #[arg(long, default_value_t = 20240501)]
    seed: u64,
    #[arg(long = "quad-nodes", default_value_t = 61)]
    quad_nodes: usize,
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Study(args) => run_study_command(args),
        Command::Prophecy(args) => run_prophecy_command(args),
    }
}

fn run_study_command(args: StudyArgs) -> ExitCode {
    let resolved = match resolve_study_config(&args) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("config error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let started = SystemTime::now();
    let outcome = with_worker_pool(resolved.workers, || execute_preset(&resolved));
    match outcome {
        Ok(case_ids) => {
            let seeds = derive_case_seeds(resolved.seed, &case_ids);
            let manifest = RunManifest::new(resolved.clone(), seeds, started);
            if let Err(err) = manifest.write(&resolved.out_dir) {
                eprintln!("runtime error: {err:#}");
                return ExitCode::from(3);
            }
            println!("wrote outputs to {}", resolved.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("runtime error: {err:#}");
            ExitCode::from(3)
        }
    }
}

fn resolve_study_config(args: &StudyArgs) -> anyhow::Result<ResolvedConfig> {
    let file = match &args.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    let lengths = args.lengths.as_deref().map(parse_lengths).transpose()?;
    resolve(
        file,
        Overrides {
            preset: args.preset,
            seed: args.seed,
            replicates: args.replicates,
            lengths,
            dims: args.dims,
            a_max: args.a_max,
            quad_nodes: args.quad_nodes,
            workers: args.workers,
            out_dir: args.out_dir.clone(),
            full: args.full,
        },
    )
}

/// Run the selected preset; returns the case ids the manifest records.
fn execute_preset(cfg: &ResolvedConfig) -> anyhow::Result<Vec<String>> {
    let study = cfg.study_config();
    let dir = &cfg.out_dir;
    match cfg.preset {
        Preset::Study1 => {
            let dims: Vec<usize> = if cfg.full { vec![1, 2, 5] } else { vec![cfg.dims] };
            let specs = pool::study1_case_grid_dims(cfg.a_max, &dims)?;
            let out = run_cases(&specs, &study)?;
            write_study_outputs(dir, "study1", &specs, &out)?;
            summarize_aggregates("study1", &out);
            Ok(case_ids(&specs))
        }
        Preset::Study2 => {
            let kinds: Vec<Study2Type> = if cfg.full {
                vec![Study2Type::Binary1, Study2Type::Binary2, Study2Type::Irregular]
            } else {
                vec![Study2Type::Binary1]
            };
            let mut specs = Vec::new();
            for &k in &kinds {
                specs.extend(pool::study2_case_grid(k)?);
            }
            let out = run_cases(&specs, &study)?;
            write_study_outputs(dir, "study2", &specs, &out)?;
            summarize_aggregates("study2", &out);
            Ok(case_ids(&specs))
        }
        Preset::Study3 => {
            let (out, rows) = harness::run_study3(&study, cfg.full)?;
            report::write_aggregates_csv(&dir.join("study3_aggregates.csv"), "study3", &out.aggregates)?;
            report::write_dispersion_csv(&dir.join("study3_dispersion.csv"), "study3", &rows)?;
            let mut ids: Vec<String> = out.aggregates.iter().map(|a| a.case_id.clone()).collect();
            ids.dedup();
            for r in rows.iter().filter(|r| r.n == *study.lengths.first().unwrap()) {
                println!(
                    "group {}: median sd {:.3} at n={}, {} cases",
                    r.group, r.median_sd_rho, r.n, r.cases
                );
            }
            Ok(ids)
        }
        Preset::Converge => {
            let specs = harness::convergence_cases()?;
            let series = harness::run_convergence(&study)?;
            report::write_convergence_csv(&dir.join("convergence.csv"), &series)?;
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("cases.json"), pool::cases_to_json(&specs))?;
            for s in &series {
                let last = s.points.last().unwrap();
                println!(
                    "{}: rescaled mean {:.3} vs limit {:.3} at n={} (sup tail deviation {:.4})",
                    s.case_id, last.mean_rescaled, last.limit, last.n, s.sup_tail_deviation
                );
            }
            Ok(case_ids(&specs))
        }
        Preset::Table1 => {
            let pool = relsim_core::enumeration::AbstractPool::three_class_example();
            let result = relsim_core::enumeration::enumerate_forms(
                &pool,
                3,
                relsim_core::enumeration::DEFAULT_ENUMERATION_CAP,
            )?;
            report::write_enumeration_csv(&dir.join("table1.csv"), &result)?;
            println!(
                "{} forms; median rho {:.3} (full) / {:.3} (single item); mean rho {:.3} / {:.3}",
                result.records.len(),
                result.full_length.median_rho,
                result.single_item.median_rho,
                result.full_length.mean_rho,
                result.single_item.mean_rho,
            );
            let chained = sb::spearman_brown(
                sb::Reliability::saturating(result.single_item.median_rho),
                sb::LengthFactor::whole(3).unwrap(),
            );
            println!(
                "prophecy from the single-item median: {:.3} (enumerated median {:.3})",
                chained.get(),
                result.full_length.median_rho
            );
            Ok(vec!["table1".into()])
        }
    }
}

fn case_ids(specs: &[PoolCaseSpec]) -> Vec<String> {
    specs.iter().map(|s| s.case_id.clone()).collect()
}

fn write_study_outputs(
    dir: &std::path::Path,
    study: &str,
    specs: &[PoolCaseSpec],
    out: &StudyOutput,
) -> anyhow::Result<()> {
    report::write_aggregates_csv(&dir.join(format!("{study}_aggregates.csv")), study, &out.aggregates)?;
    report::write_predictions_csv(&dir.join(format!("{study}_predictions.csv")), &out.predictions)?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("cases.json"), pool::cases_to_json(specs))?;
    Ok(())
}

fn summarize_aggregates(study: &str, out: &StudyOutput) {
    let max_fwd = out
        .predictions
        .iter()
        .map(|p| p.max_forward_error)
        .fold(0.0, f64::max);
    let max_bwd = out
        .predictions
        .iter()
        .map(|p| p.max_backward_error)
        .fold(0.0, f64::max);
    println!(
        "{study}: {} cases, max forward prediction error {max_fwd:.3}, max backward {max_bwd:.3}",
        out.predictions.len()
    );
}

fn run_prophecy_command(args: ProphecyArgs) -> ExitCode {
    let to_lens: Vec<usize> = match args
        .to_lens
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(v) if !v.is_empty() && v.iter().all(|&n| n >= 1) && args.from_len >= 1 => v,
        _ => {
            eprintln!("config error: lengths must be positive integers");
            return ExitCode::from(2);
        }
    };
    let pool = match pool::load_external_pool(&args.pool)
        .with_context(|| format!("loading pool {}", args.pool.display()))
    {
        Ok(p) => p,
        Err(err) => {
            eprintln!("config error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let rule = match QuadratureRule::new(args.quad_nodes) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("config error: {err}");
            return ExitCode::from(2);
        }
    };
    let outcome = with_worker_pool(args.workers, || -> anyhow::Result<()> {
        let ctx = relsim_core::irt::PoolContext::new(&pool, &rule)?;
        let stream = RandomStream::new(args.seed).child("prophecy");
        let mut sum = 0.0;
        for rep in 0..args.replicates {
            let form = sampler::sample_form(&pool, args.from_len, &stream.child_index(rep as u64))?;
            sum += ctx.form_reliability(&form)?.rho;
        }
        let mean_rho = sum / args.replicates as f64;
        let limit = ctx.universe_limit().limit;
        println!(
            "pool: {} items, {} dimension{}",
            pool.len(),
            pool.latent.num_dimensions,
            if pool.latent.num_dimensions == 1 { "" } else { "s" }
        );
        println!(
            "mean reliability at length {} ({} random forms): {:.3}",
            args.from_len, args.replicates, mean_rho
        );
        for &to in &to_lens {
            let predicted = sb::predict(
                sb::Reliability::saturating(mean_rho),
                args.from_len as u64,
                to as u64,
            )?;
            println!("predicted mean reliability at length {to}: {:.3}", predicted.get());
        }
        println!("asymptotic limit (reliability rescaled to unit length): {limit:.3}");
        if pool.latent.num_dimensions > 1 {
            println!(
                "warning: multidimensional pool; short-form reliabilities run high, so forward predictions tend to be too optimistic"
            );
        }
        Ok(())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("runtime error: {err:#}");
            ExitCode::from(3)
        }
    }
}
