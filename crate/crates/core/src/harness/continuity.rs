use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{run, run_with_steps, Dynamics, IntegratorConfig, RunResult, RunStatus};
use crate::lp::{besov_norm, BesovParams, DyadicFilterBank, Integrability, Summability, CRITICAL};
use crate::model::{make_initial, InitialSpec, State};
use crate::parallel;
use crate::spectral::SpectralField;

/// `B^{-1/2}_{2,1}`, the weak norm of the continuity estimate.
pub const WEAK: BesovParams = BesovParams {
    s: -0.5,
    p: Integrability::Two,
    r: Summability::One,
    homogeneous: false,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuityConfig {
    pub deltas: Vec<f64>,
    /// Highest wavenumber of the perturbation direction.
    #[serde(default = "default_max_mode")]
    pub max_mode: i64,
    #[serde(default = "default_seed")]
    pub rng_seed: u64,
}

fn default_max_mode() -> i64 {
    8
}

fn default_seed() -> u64 {
    7
}

impl ContinuityConfig {
    pub fn new(deltas: Vec<f64>) -> Self {
        ContinuityConfig {
            deltas,
            max_mode: default_max_mode(),
            rng_seed: default_seed(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityEntry {
    pub delta: f64,
    /// `sup_t` of the difference in `B^{-1/2}_{2,1}`, both components summed.
    pub distance_weak: f64,
    /// `sup_t` of the difference in `B^{1/2}_{2,1}`.
    pub distance_strong: f64,
    pub status: RunStatus,
    /// The perturbed run stopped early; its distances cover a shorter window.
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub baseline_status: RunStatus,
    pub steps: usize,
    pub entries: Vec<ContinuityEntry>,
    /// Least-squares slope of `log distance` against `log δ` over unflagged entries.
    pub slope_weak: Option<f64>,
    pub slope_strong: Option<f64>,
}

/// Unit direction in `B^{1/2}_{2,1}` for each component.
pub fn perturbation_direction(n_modes: usize, cfg: &ContinuityConfig, bank: &DyadicFilterBank) -> Result<State> {
    let unit = |seed: u64| -> Result<SpectralField> {
        let spec = InitialSpec::RandomBandLimited {
            max_mode: cfg.max_mode,
            amplitude: 1.0,
            rng_seed: seed,
        };
        let f = make_initial(&spec, n_modes)?;
        let norm = besov_norm(&f, CRITICAL, bank)?;
        if norm == 0.0 {
            return Err(Error::config("perturbation direction vanishes"));
        }
        Ok(f.scale(1.0 / norm))
    };
    State::new(unit(cfg.rng_seed)?, unit(cfg.rng_seed.wrapping_add(1))?)
}

fn pair_norm(a: &State, b: &State, params: BesovParams, bank: &DyadicFilterBank) -> Result<f64> {
    Ok(besov_norm(&(&a.m - &b.m), params, bank)? + besov_norm(&(&a.n - &b.n), params, bank)?)
}

fn log_slope(points: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Perturbs the data by `δ` along a fixed unit direction and measures how far
/// the solution moves, on the step sequence of the unperturbed run.
pub fn continuity_probe(
    initial: &State,
    dynamics: &Dynamics,
    integrator: &IntegratorConfig,
    cfg: &ContinuityConfig,
) -> Result<ContinuityReport> {
    continuity_inner(initial, dynamics, integrator, cfg, true)
}

/// [`continuity_probe`] with every run on the calling thread.
pub fn continuity_probe_sequential(
    initial: &State,
    dynamics: &Dynamics,
    integrator: &IntegratorConfig,
    cfg: &ContinuityConfig,
) -> Result<ContinuityReport> {
    continuity_inner(initial, dynamics, integrator, cfg, false)
}

fn continuity_inner(
    initial: &State,
    dynamics: &Dynamics,
    integrator: &IntegratorConfig,
    cfg: &ContinuityConfig,
    parallel_runs: bool,
) -> Result<ContinuityReport> {
    if cfg.deltas.is_empty() || cfg.deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::config(
            "deltas must be a nonempty list of finite nonnegative numbers",
        ));
    }
    if cfg.max_mode < 1 {
        return Err(Error::config("max_mode must be at least 1"));
    }
    let bank = DyadicFilterBank::build(initial.n_modes(), integrator.filter)?;
    let direction = perturbation_direction(initial.n_modes(), cfg, &bank)?;
    let integrator = IntegratorConfig {
        snapshot_every: 1,
        series_every: usize::MAX,
        ..integrator.clone()
    };
    let baseline = run(initial, dynamics, &integrator)?;

    let perturbed_run = |delta: &f64| -> Result<RunResult> {
        let data = State::new(
            initial.m.axpy(*delta, &direction.m)?,
            initial.n.axpy(*delta, &direction.n)?,
        )?;
        run_with_steps(&data, dynamics, &integrator, &baseline.steps)
    };
    let runs = if parallel_runs {
        parallel::map(&cfg.deltas, perturbed_run)
    } else {
        parallel::map_sequential(&cfg.deltas, perturbed_run)
    };

    let mut entries = Vec::with_capacity(runs.len());
    for (delta, result) in cfg.deltas.iter().zip(runs) {
        let result = result?;
        let (mut weak, mut strong) = (0.0f64, 0.0f64);
        for (a, b) in result.snapshots.iter().zip(&baseline.snapshots) {
            if !a.state.is_finite() {
                break;
            }
            weak = weak.max(pair_norm(&a.state, &b.state, WEAK, &bank)?);
            strong = strong.max(pair_norm(&a.state, &b.state, CRITICAL, &bank)?);
        }
        let flagged = result.status != RunStatus::Completed || result.steps.len() < baseline.steps.len();
        entries.push(ContinuityEntry {
            delta: *delta,
            distance_weak: weak,
            distance_strong: strong,
            status: result.status,
            flagged,
        });
    }
    let usable = || entries.iter().filter(|e| !e.flagged);
    Ok(ContinuityReport {
        baseline_status: baseline.status,
        steps: baseline.steps.len(),
        slope_weak: log_slope(usable().map(|e| (e.delta, e.distance_weak))),
        slope_strong: log_slope(usable().map(|e| (e.delta, e.distance_strong))),
        entries,
    })
}
