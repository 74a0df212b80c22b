use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{run, run_with_steps, Dynamics, IntegratorConfig, RunStatus};
use crate::model::{Coefficients, DampedForm, Schedule, State};

/// Outcome of a damped-versus-nonlocal comparison.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub lambda: f64,
    pub form: DampedForm,
    /// `sup_t sup_x |e^{λt} m̃(t, x + s(t)) - m(t, x)|` over both components,
    /// where `m̃` is the damped solution and `s` its accumulated drift.
    pub max_discrepancy: f64,
    pub steps: usize,
    pub nonlocal_status: RunStatus,
    pub damped_status: RunStatus,
}

/// The nonlocal system with `α = e^{-2λt}`, `γ = 0` used by the comparison.
pub fn equivalent_coefficients(lambda: f64) -> Coefficients {
    Coefficients::new(
        Schedule::ExpDecay {
            amplitude: 1.0,
            rate: lambda,
        },
        Schedule::Zero,
    )
}

/// Runs the nonlocal system with `α = e^{-2λt}`, `γ = 0` and replays its
/// steps on the damped reduction. The damped solution rescaled by `e^{λt}`
/// solves the nonlocal system up to a rigid translation, since the damped
/// transport velocity has a nonzero mean.
pub fn damping_equivalence(
    initial: &State,
    lambda: f64,
    form: DampedForm,
    cfg: &IntegratorConfig,
) -> Result<EquivalenceReport> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::config(format!(
            "lambda = {lambda} must be finite and nonnegative"
        )));
    }
    if form == DampedForm::Forq && initial.m != initial.n {
        return Err(Error::InconsistentReduction("forq requires m = n".into()));
    }
    let cfg = IntegratorConfig {
        snapshot_every: 1,
        ..cfg.clone()
    };
    let nonlocal = run(initial, &Dynamics::nonlocal(equivalent_coefficients(lambda)), &cfg)?;
    let damped = run_with_steps(initial, &Dynamics::Damped { lambda, form }, &cfg, &nonlocal.steps)?;
    let max_discrepancy = nonlocal
        .snapshots
        .iter()
        .zip(&damped.snapshots)
        .map(|(a, b)| {
            let rescaled = b.state.translate(-b.shift).scale((lambda * b.t).exp());
            rescaled.sup_distance(&a.state)
        })
        .fold(0.0, f64::max);
    Ok(EquivalenceReport {
        lambda,
        form,
        max_discrepancy,
        steps: nonlocal.steps.len(),
        nonlocal_status: nonlocal.status,
        damped_status: damped.status,
    })
}
