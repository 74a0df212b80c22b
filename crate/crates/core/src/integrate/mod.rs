//! Method-of-lines time stepping, blow-up monitoring and the Friedrichs
//! iteration.

mod friedrichs;
mod series;

pub use friedrichs::{friedrichs_iterate, FriedrichsReport, IterateRecord};
pub use series::{SeriesRow, TimeSeries, SERIES_HEADER};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{
    besov_from_blocks, besov_norm, block_norms, DyadicFilterBank, FilterKind, Integrability, Summability, CRITICAL,
};
use crate::model::{
    compute_psi, damped_velocity, nonlocal_transport, rhs_damped, rhs_nonlocal_at, Coefficients, DampedForm, Increment,
    RhsOptions, State, TransportForm,
};
use crate::spectral::{dealias_cutoff, derivative, mean, to_grid, SpectralField};

/// Thresholds of the three-signal blow-up monitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorConfig {
    pub linf_threshold: f64,
    /// Energy fraction allowed in the top third of the retained band.
    pub tail_ratio_threshold: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            linf_threshold: 1e6,
            tail_ratio_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub t_end: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub dealias: bool,
    /// Steps between series records; the initial and final states are always recorded.
    pub series_every: usize,
    /// Steps between snapshots; 0 keeps only the initial and final states.
    pub snapshot_every: usize,
    pub filter: FilterKind,
    pub monitor: MonitorConfig,
}

impl IntegratorConfig {
    pub fn new(t_end: f64, dt_max: f64) -> Self {
        IntegratorConfig {
            t_end,
            cfl: 0.4,
            dt_max,
            dt_min: 1e-9,
            dealias: true,
            series_every: 1,
            snapshot_every: 0,
            filter: FilterKind::Smooth,
            monitor: MonitorConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::config(format!(
                "t_end = {} must be finite and positive",
                self.t_end
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::config(format!("cfl = {} must lie in (0, 1]", self.cfl)));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max && self.dt_max.is_finite()) {
            return Err(Error::config(format!(
                "need 0 < dt_min < dt_max < inf, got dt_min = {}, dt_max = {}",
                self.dt_min, self.dt_max
            )));
        }
        if self.series_every == 0 {
            return Err(Error::config("series_every must be at least 1"));
        }
        if !(self.monitor.linf_threshold > 0.0 && self.monitor.tail_ratio_threshold > 0.0) {
            return Err(Error::config("monitor thresholds must be positive"));
        }
        Ok(())
    }
}

/// The evolution equation being integrated.
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    Nonlocal {
        coeffs: Coefficients,
        form: TransportForm,
        /// Constant added to the transport velocity.
        frame_velocity: f64,
    },
    Damped {
        lambda: f64,
        form: DampedForm,
    },
}

impl Dynamics {
    pub fn nonlocal(coeffs: Coefficients) -> Self {
        Dynamics::Nonlocal {
            coeffs,
            form: TransportForm::Divergence,
            frame_velocity: 0.0,
        }
    }

    pub fn rhs(&self, s: &State, t: f64, dealias: bool) -> Result<Increment> {
        match self {
            Dynamics::Nonlocal {
                coeffs,
                form,
                frame_velocity,
            } => {
                let (alpha, gamma) = coeffs.at(t);
                let opts = RhsOptions {
                    form: *form,
                    dealias,
                    frame_velocity: *frame_velocity,
                };
                rhs_nonlocal_at(s, alpha, gamma, &opts)
            }
            Dynamics::Damped { lambda, form } => rhs_damped(s, *lambda, *form, dealias),
        }
    }

    /// `(‖velocity‖_∞, ‖strain‖_∞)` entering the step-size rule.
    pub fn transport_scales(&self, s: &State, t: f64, dealias: bool) -> Result<(f64, f64)> {
        match self {
            Dynamics::Nonlocal {
                coeffs, frame_velocity, ..
            } => {
                let (alpha, gamma) = coeffs.at(t);
                let (rho, strain) = nonlocal_transport(s, alpha, gamma, dealias)?;
                let rho_inf = to_grid(&rho)
                    .values()
                    .iter()
                    .fold(0.0f64, |a, v| a.max((v + frame_velocity).abs()));
                Ok((rho_inf, to_grid(&strain).max_abs()))
            }
            Dynamics::Damped { form, .. } => {
                let w = damped_velocity(s, *form, dealias)?;
                Ok((to_grid(&w).max_abs(), to_grid(&derivative(&w)).max_abs()))
            }
        }
    }

    /// `|α(t)| + |γ(t)|`; the damped forms carry unit weight.
    pub fn weight(&self, t: f64) -> f64 {
        match self {
            Dynamics::Nonlocal { coeffs, .. } => coeffs.weight(t),
            Dynamics::Damped { .. } => 1.0,
        }
    }

    /// `ψ̄(t)`; zero for the damped forms, which have no `ψ`.
    pub fn psi_bar(&self, s: &State, t: f64) -> Result<f64> {
        match self {
            Dynamics::Nonlocal { coeffs, .. } => {
                let (alpha, gamma) = coeffs.at(t);
                Ok(compute_psi(s, alpha, gamma)?.1)
            }
            Dynamics::Damped { .. } => Ok(0.0),
        }
    }
}

/// `min(dt_max, cfl Δx / ‖ρ‖_∞, cfl / ‖ψ - ψ̄‖_∞)` with `Δx = 1/N`.
pub fn cfl_dt(rho_inf: f64, strain_inf: f64, n_modes: usize, cfl: f64, dt_max: f64) -> f64 {
    let dx = 1.0 / n_modes as f64;
    let mut dt = dt_max;
    if rho_inf > 0.0 {
        dt = dt.min(cfl * dx / rho_inf);
    }
    if strain_inf > 0.0 {
        dt = dt.min(cfl / strain_inf);
    }
    dt
}

pub fn adaptive_dt(s: &State, t: f64, dynamics: &Dynamics, cfg: &IntegratorConfig) -> Result<f64> {
    let (rho_inf, strain_inf) = dynamics.transport_scales(s, t, cfg.dealias)?;
    Ok(cfl_dt(rho_inf, strain_inf, s.n_modes(), cfg.cfl, cfg.dt_max))
}

/// One classical RK4 step for a right-hand side indexed by stage
/// (`0..4`, at offsets `0, dt/2, dt/2, dt`). Returns the new state, the
/// integrated drift, and the four stage states.
pub(crate) fn rk4_with_stages(
    y: &State,
    t: f64,
    dt: f64,
    mut f: impl FnMut(usize, &State) -> Result<Increment>,
) -> Result<(State, f64, [State; 4])> {
    let check = |inc: Increment, stage_t: f64| {
        if inc.is_finite() {
            Ok(inc)
        } else {
            Err(Error::NonFinite { t: stage_t })
        }
    };
    let y1 = y.clone();
    let k1 = check(f(0, &y1)?, t)?;
    let y2 = y.axpy(0.5 * dt, &k1);
    let k2 = check(f(1, &y2)?, t + 0.5 * dt)?;
    let y3 = y.axpy(0.5 * dt, &k2);
    let k3 = check(f(2, &y3)?, t + 0.5 * dt)?;
    let y4 = y.axpy(dt, &k3);
    let k4 = check(f(3, &y4)?, t + dt)?;
    let next = y
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4);
    if !next.is_finite() {
        return Err(Error::NonFinite { t: t + dt });
    }
    let drift = dt / 6.0 * (k1.drift + 2.0 * k2.drift + 2.0 * k3.drift + k4.drift);
    Ok((next, drift, [y1, y2, y3, y4]))
}

const STAGE_OFFSETS: [f64; 4] = [0.0, 0.5, 0.5, 1.0];

/// One RK4 step; returns the new state and the rigid translation
/// accumulated over the step.
pub fn step_rk4(s: &State, t: f64, dt: f64, dynamics: &Dynamics, dealias: bool) -> Result<(State, f64)> {
    let (next, drift, _) = rk4_with_stages(s, t, dt, |i, y| dynamics.rhs(y, t + STAGE_OFFSETS[i] * dt, dealias))?;
    Ok((next, drift))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupReason {
    LinfThreshold,
    DtUnderflow,
    TailRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// `t_star` is the last time at which every monitor was quiet.
    BlowupDetected {
        t_star: f64,
        reason: BlowupReason,
    },
    Aborted {
        t: f64,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub state: State,
    /// Accumulated rigid translation from the velocity mean.
    pub shift: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub series: TimeSeries,
    pub snapshots: Vec<Snapshot>,
    pub status: RunStatus,
    pub final_state: State,
    pub final_time: f64,
    pub shift: f64,
    /// Step sizes actually taken, for matched-step replays.
    pub steps: Vec<f64>,
}

/// Fraction of the non-mean energy of `(m, n)` in `|k| ∈ (2K/3, K]`, with
/// `K` the dealiasing cutoff.
pub fn tail_ratio(s: &State) -> f64 {
    let cutoff = dealias_cutoff(s.n_modes());
    let (mut tail, mut total) = (0.0, 0.0);
    for f in [&s.m, &s.n] {
        for (k, c) in f.modes() {
            let a = k.abs();
            if a == 0 {
                continue;
            }
            let e = c.norm_sqr();
            total += e;
            if 3 * a > 2 * cutoff && a <= cutoff {
                tail += e;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

struct Diagnostics {
    row: SeriesRow,
    /// Integrands of the two blow-up functionals.
    integrand_critical: f64,
    integrand_noncritical: f64,
}

fn diagnostics(s: &State, t: f64, dt: f64, dynamics: &Dynamics, bank: &DyadicFilterBank) -> Result<Diagnostics> {
    let norms = |f: &SpectralField| -> Result<(f64, f64, f64)> {
        let blocks = block_norms(f, Integrability::Infinity, true, bank)?;
        Ok((
            besov_norm(f, CRITICAL, bank)?,
            besov_from_blocks(&blocks, 0.0, Summability::One),
            besov_from_blocks(&blocks, 0.0, Summability::Two),
        ))
    };
    let (b_m, h1_m, h2_m) = norms(&s.m)?;
    let (b_n, h1_n, h2_n) = norms(&s.n)?;
    let w = dynamics.weight(t);
    Ok(Diagnostics {
        row: SeriesRow {
            t,
            mass_m: mean(&s.m),
            mass_n: mean(&s.n),
            psi_bar: dynamics.psi_bar(s, t)?,
            b12_21_m: b_m,
            b12_21_n: b_n,
            hb0_inf1_m: h1_m,
            hb0_inf1_n: h1_n,
            hb0_inf2_m: h2_m,
            hb0_inf2_n: h2_n,
            linf_m: to_grid(&s.m).max_abs(),
            linf_n: to_grid(&s.n).max_abs(),
            dt,
            tail_ratio: tail_ratio(s),
            blowup_integral_critical: 0.0,
            blowup_integral_noncritical: 0.0,
        },
        integrand_critical: w * (h1_m * h1_m + h1_n * h1_n),
        integrand_noncritical: w * (h2_m * h2_m + h2_n * h2_n),
    })
}

enum StepPlan<'a> {
    Adaptive,
    Replay(&'a [f64]),
}

/// Integrates from `t = 0` to `cfg.t_end` with adaptive steps.
pub fn run(initial: &State, dynamics: &Dynamics, cfg: &IntegratorConfig) -> Result<RunResult> {
    run_inner(initial, dynamics, cfg, StepPlan::Adaptive)
}

/// Integrates with a prescribed step sequence (for matched-step
/// comparisons); `cfg.t_end` is ignored.
pub fn run_with_steps(
    initial: &State,
    dynamics: &Dynamics,
    cfg: &IntegratorConfig,
    steps: &[f64],
) -> Result<RunResult> {
    if steps.iter().any(|&dt| !(dt > 0.0 && dt.is_finite())) {
        return Err(Error::config("replayed steps must be positive and finite"));
    }
    run_inner(initial, dynamics, cfg, StepPlan::Replay(steps))
}

fn run_inner(initial: &State, dynamics: &Dynamics, cfg: &IntegratorConfig, plan: StepPlan) -> Result<RunResult> {
    cfg.validate()?;
    if let Dynamics::Nonlocal { coeffs, .. } = dynamics {
        coeffs.validate()?;
    }
    let bank = DyadicFilterBank::build(initial.n_modes(), cfg.filter)?;

    let mut state = initial.clone();
    let mut t = 0.0;
    let mut shift = 0.0;
    let mut steps = Vec::new();
    let mut series = TimeSeries::new();
    let mut snapshots = vec![Snapshot {
        step: 0,
        t,
        state: state.clone(),
        shift,
    }];

    if !state.is_finite() {
        let status = RunStatus::Aborted {
            t,
            message: "initial data is not finite".into(),
        };
        return Ok(RunResult {
            series,
            snapshots,
            status,
            final_state: state,
            final_time: t,
            shift,
            steps,
        });
    }

    let first = diagnostics(&state, t, 0.0, dynamics, &bank)?;
    let (mut prev_crit, mut prev_noncrit) = (first.integrand_critical, first.integrand_noncritical);
    let (mut int_crit, mut int_noncrit) = (0.0, 0.0);
    series.push(first.row);
    let mut pending: Option<SeriesRow> = None;
    let mut status = RunStatus::Completed;
    let end_tol = 1e-13 * cfg.t_end.max(1.0);

    loop {
        let step_index = steps.len();
        let dt = match plan {
            StepPlan::Adaptive => {
                if cfg.t_end - t <= end_tol {
                    break;
                }
                let dt = match adaptive_dt(&state, t, dynamics, cfg) {
                    Ok(dt) => dt,
                    Err(Error::NonFinite { t }) => {
                        status = RunStatus::Aborted {
                            t,
                            message: "non-finite transport fields".into(),
                        };
                        break;
                    }
                    Err(e) => return Err(e),
                };
                if !dt.is_finite() {
                    status = RunStatus::Aborted {
                        t,
                        message: "non-finite step size".into(),
                    };
                    break;
                }
                if dt < cfg.dt_min {
                    status = RunStatus::BlowupDetected {
                        t_star: t,
                        reason: BlowupReason::DtUnderflow,
                    };
                    break;
                }
                dt.min(cfg.t_end - t)
            }
            StepPlan::Replay(seq) => match seq.get(step_index) {
                Some(&dt) => dt,
                None => break,
            },
        };

        let (next, drift) = match step_rk4(&state, t, dt, dynamics, cfg.dealias) {
            Ok(v) => v,
            Err(Error::NonFinite { t: bad }) => {
                status = RunStatus::Aborted {
                    t: bad,
                    message: "non-finite values during a step".into(),
                };
                break;
            }
            Err(e) => return Err(e),
        };
        let t_next = match plan {
            StepPlan::Adaptive if cfg.t_end - (t + dt) <= end_tol => cfg.t_end,
            _ => t + dt,
        };
        steps.push(dt);
        let stable_t = t;
        state = next;
        t = t_next;
        shift += drift;

        let d = diagnostics(&state, t, dt, dynamics, &bank)?;
        int_crit += 0.5 * dt * (prev_crit + d.integrand_critical);
        int_noncrit += 0.5 * dt * (prev_noncrit + d.integrand_noncritical);
        prev_crit = d.integrand_critical;
        prev_noncrit = d.integrand_noncritical;
        let mut row = d.row;
        row.blowup_integral_critical = int_crit;
        row.blowup_integral_noncritical = int_noncrit;

        let n_steps = steps.len();
        let fired = if row.linf_m.max(row.linf_n) > cfg.monitor.linf_threshold {
            Some(BlowupReason::LinfThreshold)
        } else if row.tail_ratio > cfg.monitor.tail_ratio_threshold {
            Some(BlowupReason::TailRatio)
        } else {
            None
        };
        if n_steps % cfg.series_every == 0 || fired.is_some() {
            series.push(row);
            pending = None;
        } else {
            pending = Some(row);
        }
        if cfg.snapshot_every > 0 && n_steps % cfg.snapshot_every == 0 {
            snapshots.push(Snapshot {
                step: n_steps,
                t,
                state: state.clone(),
                shift,
            });
        }
        if let Some(reason) = fired {
            status = RunStatus::BlowupDetected {
                t_star: stable_t,
                reason,
            };
            break;
        }
    }

    // the final state is always recorded
    if let Some(row) = pending {
        series.push(row);
    }
    if snapshots.last().is_none_or(|s| s.step != steps.len()) {
        snapshots.push(Snapshot {
            step: steps.len(),
            t,
            state: state.clone(),
            shift,
        });
    }
    Ok(RunResult {
        series,
        snapshots,
        status,
        final_state: state,
        final_time: t,
        shift,
        steps,
    })
}
