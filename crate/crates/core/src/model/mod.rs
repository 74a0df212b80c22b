//! The two-component cubic Camassa–Holm system with time-dependent
//! coefficients, written as a pair of nonlocal transport equations
//!
//! ```text
//! m_t + ρ m_x = -m (ψ - ψ̄),   n_t + ρ n_x = -n (ψ - ψ̄),   ρ = ∂_x^{-1} ψ,
//! ψ = (α + γ)(v + v_x) m - α (u - u_x) n,   m = u - u_xx,   n = v - v_xx,
//! ```
//!
//! together with its damped isospectral reductions.

mod initial;
mod schedule;

pub use initial::{initial_state, make_initial, InitialSpec, ModeSpec};
pub use schedule::{Coefficients, Schedule, QUADRATURE_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    antiderivative_zero_mean, derivative, helmholtz_inverse, mean, product, to_grid, GridField, SpectralField,
};

/// The momentum pair `(m, n)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub m: SpectralField,
    pub n: SpectralField,
}

impl State {
    pub fn new(m: SpectralField, n: SpectralField) -> Result<Self> {
        if m.n_modes() != n.n_modes() {
            return Err(Error::Shape {
                left: m.n_modes(),
                right: n.n_modes(),
            });
        }
        Ok(State { m, n })
    }

    pub fn zeros(n_modes: usize) -> Result<Self> {
        let z = SpectralField::zeros(n_modes)?;
        Ok(State { m: z.clone(), n: z })
    }

    pub fn n_modes(&self) -> usize {
        self.m.n_modes()
    }

    pub fn is_finite(&self) -> bool {
        self.m.is_finite() && self.n.is_finite()
    }

    /// `self + a * delta`.
    pub fn axpy(&self, a: f64, delta: &Increment) -> State {
        State {
            m: self.m.axpy(a, &delta.dm).expect("matching grids"),
            n: self.n.axpy(a, &delta.dn).expect("matching grids"),
        }
    }

    pub fn scale(&self, a: f64) -> State {
        State {
            m: self.m.scale(a),
            n: self.n.scale(a),
        }
    }

    pub fn translate(&self, shift: f64) -> State {
        State {
            m: self.m.translate(shift),
            n: self.n.translate(shift),
        }
    }

    /// Grid sup-norm of `self - other` over both components.
    pub fn sup_distance(&self, other: &State) -> f64 {
        let dm = to_grid(&(&self.m - &other.m)).max_abs();
        let dn = to_grid(&(&self.n - &other.n)).max_abs();
        dm.max(dn)
    }
}

/// Time derivative of a [`State`], plus the spatial mean of the transport
/// velocity. A nonzero `drift` translates the solution rigidly; steppers
/// integrate it so gauge-shifted runs can be compared.
#[derive(Debug, Clone, PartialEq)]
pub struct Increment {
    pub dm: SpectralField,
    pub dn: SpectralField,
    pub drift: f64,
}

impl Increment {
    pub fn is_finite(&self) -> bool {
        self.dm.is_finite() && self.dn.is_finite() && self.drift.is_finite()
    }
}

/// How the transport term is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TransportForm {
    /// `-∂_x(ρ m)`; conserves `∫ m` exactly.
    #[default]
    Divergence,
    /// `-ρ ∂_x m - m (ψ - ψ̄)`.
    Advective,
}

/// Damped isospectral reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampedForm {
    /// `m_t + [(u² - u_x²) m]_x + λ m = 0` with `n = m`.
    Forq,
    /// `m_t + [(u - u_x)(v + v_x) m]_x + λ m = 0`, same for `n`.
    Sqq,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsOptions {
    pub form: TransportForm,
    pub dealias: bool,
    /// Constant added to the zero-mean velocity `ρ`.
    pub frame_velocity: f64,
}

impl Default for RhsOptions {
    fn default() -> Self {
        RhsOptions {
            form: TransportForm::Divergence,
            dealias: true,
            frame_velocity: 0.0,
        }
    }
}

/// Velocities and the nonlocal transport fields of one state.
#[derive(Debug, Clone)]
pub struct DerivedFields {
    pub u: SpectralField,
    pub v: SpectralField,
    pub psi: GridField,
    pub psi_bar: f64,
    pub rho: SpectralField,
}

/// `u = (1 - ∂_x²)^{-1} m`, `v = (1 - ∂_x²)^{-1} n`.
pub fn reconstruct_velocities(s: &State) -> (SpectralField, SpectralField) {
    (helmholtz_inverse(&s.m), helmholtz_inverse(&s.n))
}

fn psi_spectral(s: &State, alpha: f64, gamma: f64, dealias: bool) -> Result<SpectralField> {
    let (u, v) = reconstruct_velocities(s);
    let ux = derivative(&u);
    let vx = derivative(&v);
    let v_plus = &v + &vx;
    let u_minus = &u - &ux;
    let first = product(&v_plus, &s.m, dealias)?;
    let second = product(&u_minus, &s.n, dealias)?;
    first.scale(alpha + gamma).axpy(-alpha, &second)
}

/// `ψ = (α+γ)(v+v_x) m - α (u-u_x) n` on the grid, and its mean `ψ̄`.
pub fn compute_psi(s: &State, alpha: f64, gamma: f64) -> Result<(GridField, f64)> {
    let psi = psi_spectral(s, alpha, gamma, true)?;
    Ok((to_grid(&psi), mean(&psi)))
}

/// `ρ = ∂_x^{-1} ψ`; zero mean, `∂_x ρ = ψ - ψ̄`.
pub fn compute_rho(psi: &GridField) -> Result<SpectralField> {
    Ok(antiderivative_zero_mean(&crate::spectral::to_spectral(psi)?))
}

pub fn derived_fields(s: &State, alpha: f64, gamma: f64) -> Result<DerivedFields> {
    let (u, v) = reconstruct_velocities(s);
    let psi = psi_spectral(s, alpha, gamma, true)?;
    let rho = antiderivative_zero_mean(&psi);
    Ok(DerivedFields {
        u,
        v,
        psi_bar: mean(&psi),
        psi: to_grid(&psi),
        rho,
    })
}

/// Transport velocity and strain `ψ - ψ̄` of the nonlocal system, in
/// spectral form.
pub(crate) fn nonlocal_transport(
    s: &State,
    alpha: f64,
    gamma: f64,
    dealias: bool,
) -> Result<(SpectralField, SpectralField)> {
    let psi = psi_spectral(s, alpha, gamma, dealias)?;
    let rho = antiderivative_zero_mean(&psi);
    let mut strain = psi;
    let c0 = strain.coeffs()[0];
    strain = strain.axpy(-c0.re, &SpectralField::constant(strain.n_modes(), 1.0)?)?;
    Ok((rho, strain))
}

/// Right-hand side of the nonlocal system with the coefficients already
/// evaluated at the current time.
pub fn rhs_nonlocal_at(s: &State, alpha: f64, gamma: f64, opts: &RhsOptions) -> Result<Increment> {
    let (rho, strain) = nonlocal_transport(s, alpha, gamma, opts.dealias)?;
    let velocity = if opts.frame_velocity != 0.0 {
        rho.axpy(opts.frame_velocity, &SpectralField::constant(rho.n_modes(), 1.0)?)?
    } else {
        rho
    };
    let (dm, dn) = match opts.form {
        TransportForm::Divergence => (
            -&derivative(&product(&velocity, &s.m, opts.dealias)?),
            -&derivative(&product(&velocity, &s.n, opts.dealias)?),
        ),
        TransportForm::Advective => {
            let adv_m = product(&velocity, &derivative(&s.m), opts.dealias)?;
            let adv_n = product(&velocity, &derivative(&s.n), opts.dealias)?;
            let src_m = product(&s.m, &strain, opts.dealias)?;
            let src_n = product(&s.n, &strain, opts.dealias)?;
            (-&(&adv_m + &src_m), -&(&adv_n + &src_n))
        }
    };
    Ok(Increment {
        dm,
        dn,
        drift: opts.frame_velocity,
    })
}

/// Right-hand side of the nonlocal system at time `t`.
pub fn rhs_nonlocal(s: &State, t: f64, coeffs: &Coefficients, opts: &RhsOptions) -> Result<Increment> {
    let (alpha, gamma) = coeffs.at(t);
    rhs_nonlocal_at(s, alpha, gamma, opts)
}

/// Flux velocity of the damped reductions: `u² - u_x²` (FORQ, which
/// requires `n = m`) or `(u - u_x)(v + v_x)` (SQQ).
pub fn damped_velocity(s: &State, form: DampedForm, dealias: bool) -> Result<SpectralField> {
    let (u, v) = reconstruct_velocities(s);
    let ux = derivative(&u);
    match form {
        DampedForm::Forq => {
            if s.m != s.n {
                return Err(Error::InconsistentReduction("the FORQ reduction requires n = m".into()));
            }
            let uu = product(&u, &u, dealias)?;
            let uxux = product(&ux, &ux, dealias)?;
            Ok(&uu - &uxux)
        }
        DampedForm::Sqq => {
            let vx = derivative(&v);
            product(&(&u - &ux), &(&v + &vx), dealias)
        }
    }
}

/// Right-hand side of the damped reductions. The returned `drift` is the
/// mean of the flux velocity, which the zero-mean nonlocal gauge removes.
pub fn rhs_damped(s: &State, lambda: f64, form: DampedForm, dealias: bool) -> Result<Increment> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::config(format!("damping λ = {lambda} must be finite and >= 0")));
    }
    let velocity = damped_velocity(s, form, dealias)?;
    let dm = (-&derivative(&product(&velocity, &s.m, dealias)?)).axpy(-lambda, &s.m)?;
    let dn = match form {
        DampedForm::Forq => dm.clone(),
        DampedForm::Sqq => (-&derivative(&product(&velocity, &s.n, dealias)?)).axpy(-lambda, &s.n)?,
    };
    Ok(Increment {
        dm,
        dn,
        drift: mean(&velocity),
    })
}
