use serde::Serialize;

use super::{rk4_with_stages, run, Dynamics, IntegratorConfig, RunStatus, STAGE_OFFSETS};
use crate::error::{Error, Result};
use crate::lp::{besov_norm, low_pass, BesovParams, DyadicFilterBank, Integrability, Summability, CRITICAL};
use crate::model::{nonlocal_transport, Coefficients, Increment, State, TransportForm};
use crate::spectral::{derivative, product};

/// Difference diagnostics of one iterate pair `(k, k+1)`.
#[derive(Debug, Clone, Serialize)]
pub struct IterateRecord {
    pub k: usize,
    /// `D_k(t) = ‖m_{k+1}-m_k‖_{B^{-1/2}_{2,∞}} + ‖n_{k+1}-n_k‖_{B^{-1/2}_{2,∞}}` at each step time.
    pub d_series: Vec<f64>,
    pub d_sup: f64,
    /// `sup_t (‖m_k‖_{B^{1/2}_{2,1}} + ‖n_k‖_{B^{1/2}_{2,1}})`.
    pub f_sup: f64,
}

#[derive(Debug, Clone)]
pub struct FriedrichsReport {
    /// Step times shared by every iterate and the direct run.
    pub times: Vec<f64>,
    pub iterates: Vec<IterateRecord>,
    /// Iterate index at which non-finite values appeared, if any.
    pub halted_at: Option<usize>,
    /// Status of the direct nonlinear run that fixed the step sequence.
    pub direct_status: RunStatus,
    /// Trajectory of the direct nonlinear run at the step times.
    pub direct: Vec<State>,
    /// Trajectory of the last computed iterate at the step times.
    pub last_iterate: Vec<State>,
    /// `sup_t sup_x |last iterate - direct|`.
    pub consistency: f64,
}

impl FriedrichsReport {
    pub fn d_sups(&self) -> Vec<f64> {
        self.iterates.iter().map(|r| r.d_sup).collect()
    }
}

/// Iterate `k` as its RK4 stage states for every step, plus the step-end
/// trajectory.
struct Iterate {
    stages: Vec<[State; 4]>,
    trajectory: Vec<State>,
}

const NEG_HALF_INF: BesovParams = BesovParams {
    s: -0.5,
    p: Integrability::Two,
    r: Summability::Infinity,
    homogeneous: false,
};

fn f_norm(s: &State, bank: &DyadicFilterBank) -> Result<f64> {
    Ok(besov_norm(&s.m, CRITICAL, bank)? + besov_norm(&s.n, CRITICAL, bank)?)
}

fn difference_norm(a: &State, b: &State, bank: &DyadicFilterBank) -> Result<f64> {
    Ok(besov_norm(&(&a.m - &b.m), NEG_HALF_INF, bank)? + besov_norm(&(&a.n - &b.n), NEG_HALF_INF, bank)?)
}

/// Friedrichs iteration: `(m_1, n_1) = (S_1 m_0, S_1 n_0)` and, for
/// `k = 1..=k_max`, the linear transport problem
///
/// ```text
/// ∂_t m_{k+1} + ρ_k ∂_x m_{k+1} = -m_k (ψ_k - ψ̄_k),   m_{k+1}(0) = S_{k+1} m_0,
/// ```
///
/// likewise for `n`. Each linear solve reuses the step sequence of a direct
/// advective-form nonlinear run, and freezes `ρ_k`, `ψ_k` and `m_k` at the
/// RK4 stage states of iterate `k`, so a fixed point of the iteration is
/// exactly the direct discrete solution.
pub fn friedrichs_iterate(
    initial: &State,
    k_max: usize,
    coeffs: &Coefficients,
    cfg: &IntegratorConfig,
) -> Result<FriedrichsReport> {
    if k_max == 0 {
        return Err(Error::config("the iteration count K must be at least 1"));
    }
    let bank = DyadicFilterBank::build(initial.n_modes(), cfg.filter)?;
    let dynamics = Dynamics::Nonlocal {
        coeffs: coeffs.clone(),
        form: TransportForm::Advective,
        frame_velocity: 0.0,
    };
    let direct_cfg = IntegratorConfig {
        snapshot_every: 1,
        series_every: usize::MAX,
        ..cfg.clone()
    };
    let direct_run = run(initial, &dynamics, &direct_cfg)?;
    let steps = direct_run.steps.clone();
    let mut times = Vec::with_capacity(steps.len() + 1);
    let mut t = 0.0;
    times.push(t);
    for dt in &steps {
        t += dt;
        times.push(t);
    }
    let direct: Vec<State> = direct_run.snapshots.iter().map(|s| s.state.clone()).collect();

    let filtered =
        |q: u32| -> Result<State> { State::new(low_pass(q, &initial.m, &bank)?, low_pass(q, &initial.n, &bank)?) };

    let first = filtered(1)?;
    let mut current = Iterate {
        stages: steps.iter().map(|_| std::array::from_fn(|_| first.clone())).collect(),
        trajectory: vec![first.clone(); steps.len() + 1],
    };

    let mut iterates = Vec::with_capacity(k_max);
    let mut halted_at = None;
    for k in 1..=k_max {
        let start = filtered((k + 1) as u32)?;
        let next = match solve_linear(&current, start, &steps, &times, coeffs, cfg.dealias) {
            Ok(it) => it,
            Err(Error::NonFinite { .. }) => {
                halted_at = Some(k + 1);
                break;
            }
            Err(e) => return Err(e),
        };
        let mut d_series = Vec::with_capacity(times.len());
        let mut f_sup = 0.0f64;
        for (a, b) in next.trajectory.iter().zip(&current.trajectory) {
            d_series.push(difference_norm(a, b, &bank)?);
            f_sup = f_sup.max(f_norm(b, &bank)?);
        }
        let d_sup = d_series.iter().cloned().fold(0.0, f64::max);
        iterates.push(IterateRecord {
            k,
            d_series,
            d_sup,
            f_sup,
        });
        current = next;
    }

    let consistency = current
        .trajectory
        .iter()
        .zip(&direct)
        .map(|(a, b)| a.sup_distance(b))
        .fold(0.0, f64::max);
    Ok(FriedrichsReport {
        times,
        iterates,
        halted_at,
        direct_status: direct_run.status,
        direct,
        last_iterate: current.trajectory,
        consistency,
    })
}

fn solve_linear(
    prev: &Iterate,
    start: State,
    steps: &[f64],
    times: &[f64],
    coeffs: &Coefficients,
    dealias: bool,
) -> Result<Iterate> {
    let mut stages = Vec::with_capacity(steps.len());
    let mut trajectory = Vec::with_capacity(steps.len() + 1);
    let mut y = start;
    trajectory.push(y.clone());
    for (j, &dt) in steps.iter().enumerate() {
        let t = times[j];
        let frozen = &prev.stages[j];
        let (next, _, stage_states) = rk4_with_stages(&y, t, dt, |i, z| {
            let (alpha, gamma) = coeffs.at(t + STAGE_OFFSETS[i] * dt);
            let yk = &frozen[i];
            let (rho, strain) = nonlocal_transport(yk, alpha, gamma, dealias)?;
            let adv_m = product(&rho, &derivative(&z.m), dealias)?;
            let adv_n = product(&rho, &derivative(&z.n), dealias)?;
            let src_m = product(&yk.m, &strain, dealias)?;
            let src_n = product(&yk.n, &strain, dealias)?;
            Ok(Increment {
                dm: -&(&adv_m + &src_m),
                dn: -&(&adv_n + &src_n),
                drift: 0.0,
            })
        })?;
        stages.push(stage_states);
        y = next;
        trajectory.push(y.clone());
    }
    Ok(Iterate { stages, trajectory })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralField;
    use num_complex::Complex64;

    fn single_mode(k: i64) -> State {
        let f = SpectralField::from_modes(64, &[(k, Complex64::new(0.5, 0.0))]).unwrap();
        State::new(f.clone(), f).unwrap()
    }

    #[test]
    fn first_iterate_filters_the_data() {
        let cfg = IntegratorConfig::new(0.01, 1e-3);
        let bank = DyadicFilterBank::build(64, cfg.filter).unwrap();
        let one = single_mode(1);
        assert_eq!(low_pass(1, &one.m, &bank).unwrap(), one.m);
        let eight = single_mode(8);
        assert_eq!(low_pass(1, &eight.m, &bank).unwrap().l2_norm(), 0.0);
    }

    #[test]
    fn rejects_zero_iterations() {
        let cfg = IntegratorConfig::new(0.01, 1e-3);
        assert!(friedrichs_iterate(&single_mode(1), 0, &Coefficients::unit_alpha(), &cfg).is_err());
    }

    #[test]
    fn converges_to_the_direct_run() {
        let cfg = IntegratorConfig::new(0.05, 2e-3);
        let mut s = single_mode(1).scale(3.0);
        s.n = s.n.axpy(1.0, &single_mode(2).n).unwrap();
        let report = friedrichs_iterate(&s, 14, &Coefficients::unit_alpha(), &cfg).unwrap();
        assert!(report.halted_at.is_none());
        let d = report.d_sups();
        assert!(*d.last().unwrap() < 1e-10, "{d:?}");
        assert!(report.consistency < 1e-8, "{}", report.consistency);
    }
}
