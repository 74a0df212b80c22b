//! Closed-form bounds, the damping comparison, the continuity probe and the
//! cross-check of simulated blow-up times against the lower bounds.

mod bounds;
mod continuity;
mod equivalence;

pub use bounds::{
    blowup_lower_bound_critical, blowup_lower_bound_noncritical, bounds_report, global_sufficient_condition, hbar,
    lambda_threshold, lifespan_condition, lifespan_integral_threshold, time_to_reach, uniform_bound, BoundsParams,
    BoundsReport, Constants,
};
pub use continuity::{
    continuity_probe, continuity_probe_sequential, perturbation_direction, ContinuityConfig, ContinuityEntry,
    ContinuityReport, WEAK,
};
pub use equivalence::{damping_equivalence, equivalent_coefficients, EquivalenceReport};

use serde::Serialize;

use crate::integrate::RunStatus;

/// Simulated blow-up time next to the guaranteed lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    /// Last stable time of the run, or `None` when the run completed.
    pub t_star_numerical: Option<f64>,
    pub t_star_lower: f64,
    /// The run stopped before the guaranteed existence time. With the default
    /// constant this points at under-resolution or a too-small `C`.
    pub violates_lower_bound: bool,
}

pub fn cross_check(status: &RunStatus, report: &BoundsReport) -> CrossCheck {
    let t_num = match status {
        RunStatus::Completed => None,
        RunStatus::BlowupDetected { t_star, .. } => Some(*t_star),
        RunStatus::Aborted { t, .. } => Some(*t),
    };
    let lower = report.t_star_lower_critical;
    CrossCheck {
        t_star_numerical: t_num,
        t_star_lower: lower,
        violates_lower_bound: t_num.is_some_and(|t| t < lower),
    }
}
