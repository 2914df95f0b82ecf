//! CSV emission for study results. Data files carry 17 significant digits
//! so every float round-trips; headers and row order are fixed so equal
//! runs produce byte-identical files.

use std::io::Write;
use std::path::Path;

use crate::enumeration::EnumerationResult;
use crate::error::Result;
use crate::harness::{CaseLengthAggregate, ConvergenceSeries, DispersionRow, PredictionErrorReport};

/// Round-trip-safe float rendering: 17 significant digits.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(body.as_bytes())?;
    f.flush()?;
    Ok(())
}

pub const AGGREGATE_HEADER: &str =
    "study,case_id,dims,a_max,n,mean_rho,median_rho,sd_rho,mean_rescaled,limit,bias";

pub fn render_aggregates(study: &str, rows: &[CaseLengthAggregate]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{study},{},{},{},{},{},{},{},{},{},{}\n",
            r.case_id,
            r.dims,
            fmt_g17(r.a_max),
            r.n,
            fmt_g17(r.mean_rho),
            fmt_g17(r.median_rho),
            fmt_g17(r.sd_rho),
            fmt_g17(r.mean_rescaled),
            fmt_g17(r.limit),
            fmt_g17(r.bias),
        ));
    }
    out
}

pub fn write_aggregates_csv(path: &Path, study: &str, rows: &[CaseLengthAggregate]) -> Result<()> {
    write_file(path, &render_aggregates(study, rows))
}

pub const PREDICTION_HEADER: &str = "case_id,n_from,n_to,direction,error";

pub fn render_predictions(reports: &[PredictionErrorReport]) -> String {
    let mut out = String::from(PREDICTION_HEADER);
    out.push('\n');
    for report in reports {
        for p in &report.pairs {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                report.case_id,
                p.n_from,
                p.n_to,
                if p.forward { "forward" } else { "backward" },
                fmt_g17(p.error),
            ));
        }
    }
    out
}

pub fn write_predictions_csv(path: &Path, reports: &[PredictionErrorReport]) -> Result<()> {
    write_file(path, &render_predictions(reports))
}

pub const DISPERSION_HEADER: &str = "study,group,n,cases,median_sd_rho,p90_sd_rho";

pub fn render_dispersion(study: &str, rows: &[DispersionRow]) -> String {
    let mut out = String::from(DISPERSION_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{study},{},{},{},{},{}\n",
            r.group,
            r.n,
            r.cases,
            fmt_g17(r.median_sd_rho),
            fmt_g17(r.p90_sd_rho),
        ));
    }
    out
}

pub fn write_dispersion_csv(path: &Path, study: &str, rows: &[DispersionRow]) -> Result<()> {
    write_file(path, &render_dispersion(study, rows))
}

pub const CONVERGENCE_HEADER: &str = "case_id,n,mean_rescaled,limit,deviation";

pub fn render_convergence(series: &[ConvergenceSeries]) -> String {
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for s in series {
        for p in &s.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.case_id,
                p.n,
                fmt_g17(p.mean_rescaled),
                fmt_g17(p.limit),
                fmt_g17(p.deviation),
            ));
        }
    }
    out
}

pub fn write_convergence_csv(path: &Path, series: &[ConvergenceSeries]) -> Result<()> {
    write_file(path, &render_convergence(series))
}

/// Enumeration dump: one row per ordered form with its per-position error
/// variances, mean error variance, and the full-length and first-item
/// reliabilities.
pub fn render_enumeration(result: &EnumerationResult) -> String {
    let n = result.full_length.n;
    let mut out = String::new();
    for k in 1..=n {
        out.push_str(&format!("r{k},"));
    }
    for k in 1..=n {
        out.push_str(&format!("eps2_r{k},"));
    }
    out.push_str("mean_eps2,rho,rho_first\n");
    for rec in &result.records {
        out.push_str(&rec.label.chars().map(|c| format!("{c},")).collect::<String>());
        for e in &rec.eps_sqs {
            out.push_str(&fmt_g17(*e));
            out.push(',');
        }
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_g17(rec.mean_eps_sq),
            fmt_g17(rec.rho),
            fmt_g17(rec.rho_first),
        ));
    }
    out
}

pub fn write_enumeration_csv(path: &Path, result: &EnumerationResult) -> Result<()> {
    write_file(path, &render_enumeration(result))
}

/// Write an optional form dump produced by
/// [`crate::harness::render_form_dump`].
pub fn write_text(path: &Path, body: &str) -> Result<()> {
    write_file(path, body)
}
