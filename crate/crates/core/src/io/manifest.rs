use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;

use super::config::RunConfig;
use super::series::write_series;
use super::snapshot::write_snapshot;
use crate::error::{Error, Result};
use crate::harness::{bounds_report, cross_check, BoundsReport, CrossCheck};
use crate::integrate::{run, RunResult, RunStatus};
use crate::lp::DyadicFilterBank;

pub const SERIES_FILE: &str = "series.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub status: RunStatus,
    pub t_star_numerical: Option<f64>,
    pub final_time: f64,
    pub steps: usize,
    pub snapshots: Vec<String>,
    pub bounds: BoundsReport,
    pub cross_check: CrossCheck,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Writes `value` as pretty JSON to `path` through a temporary file and a
/// rename, so readers never see a partial file.
pub fn write_json_atomic<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    let text = serde_json::to_string_pretty(value).expect("manifest serializes");
    std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Runs a configuration and writes the series, the snapshots and the
/// manifest into `dir`.
pub fn simulate(cfg: &RunConfig, dir: &Path) -> Result<(RunResult, RunManifest)> {
    cfg.validate()?;
    let started_at = now();
    let initial = cfg.initial_state()?;
    let bank = DyadicFilterBank::build(cfg.grid.n_modes, cfg.lp.filter)?;
    let bounds = bounds_report(&initial, &cfg.bounds_coefficients(), &bank, &cfg.bounds_params()?)?;
    let result = run(&initial, &cfg.dynamics(), &cfg.integrator())?;

    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_series(&result.series, &dir.join(SERIES_FILE))?;
    let mut snapshots = Vec::with_capacity(result.snapshots.len());
    for s in &result.snapshots {
        let path: PathBuf = write_snapshot(s, dir)?;
        snapshots.push(path.file_name().expect("file path").to_string_lossy().into_owned());
    }
    let t_star_numerical = match result.status {
        RunStatus::BlowupDetected { t_star, .. } => Some(t_star),
        _ => None,
    };
    let manifest = RunManifest {
        config: cfg.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: now(),
        status: result.status.clone(),
        t_star_numerical,
        final_time: result.final_time,
        steps: result.steps.len(),
        snapshots,
        cross_check: cross_check(&result.status, &bounds),
        bounds,
    };
    write_json_atomic(&manifest, &dir.join(MANIFEST_FILE))?;
    Ok((result, manifest))
}
