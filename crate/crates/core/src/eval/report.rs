//! Report files: `metrics.json`, `summary.csv` and `plotdata_<name>.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::ExperimentReport;
use super::sweep::Sweep;
use crate::error::{Error, Result};

pub const METRICS_FILE: &str = "metrics.json";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Short description of the settings that distinguish reports of the same
/// model.
pub fn setting_label(report: &ExperimentReport) -> String {
    let window = report
        .config
        .window
        .map_or_else(|| "none".to_string(), |w| w.to_string());
    format!("window={window};labels={}", report.config.label_proportion)
}

/// Writes every report plus one plot-data file per sweep. Returns the paths
/// written, in order.
pub fn emit_report(
    dir: &Path,
    reports: &[ExperimentReport],
    sweeps: &[Sweep],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let all: Vec<&ExperimentReport> = reports
        .iter()
        .chain(
            sweeps
                .iter()
                .flat_map(|s| s.points.iter().map(|p| &p.report)),
        )
        .collect();
    let mut written = Vec::new();

    let path = dir.join(METRICS_FILE);
    let mut json = serde_json::to_string_pretty(&all)?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let path = dir.join(SUMMARY_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["model", "setting", "metric", "mean", "std"])?;
    for r in &all {
        for (metric, agg) in [("accuracy", &r.accuracy), ("macro_f1", &r.macro_f1)] {
            w.write_record([
                r.model.name(),
                &setting_label(r),
                metric,
                &agg.mean.to_string(),
                &agg.std.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    for sweep in sweeps {
        let path = dir.join(format!("plotdata_{}.csv", sweep.name));
        let mut rows: Vec<_> = sweep.points.iter().collect();
        rows.sort_by(|a, b| {
            a.x.total_cmp(&b.x)
                .then(a.report.model.cmp(&b.report.model))
        });
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record([
            sweep.x_label.as_str(),
            "model",
            "macro_f1_mean",
            "macro_f1_std",
        ])?;
        for p in rows {
            w.write_record([
                &p.x.to_string(),
                p.report.model.name(),
                &p.report.macro_f1.mean.to_string(),
                &p.report.macro_f1.std.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn load_reports(path: &Path) -> Result<Vec<ExperimentReport>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
