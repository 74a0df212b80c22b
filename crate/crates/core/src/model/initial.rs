use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{to_spectral, GridField, SpectralField};

use super::State;

/// `amplitude · cos(2π k x + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub wavenumber: i64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Initial momentum profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    FourierModes {
        #[serde(default)]
        modes: Vec<ModeSpec>,
    },
    /// `offset + amplitude · cos(2π k x)`.
    Cosine {
        wavenumber: i64,
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `amplitude · exp(-(x - center)² / (2 width²))`, wrapped onto the torus.
    GaussianBump { center: f64, width: f64, amplitude: f64 },
    /// `amplitude · Σ_{k≥1} radius^k cos(2π k (x - center))`, i.e.
    /// `amplitude · (P_r(x - center) - 1) / 2` with `P_r` the Poisson kernel,
    /// truncated below the Nyquist mode.
    PoissonKernel {
        amplitude: f64,
        radius: f64,
        #[serde(default)]
        center: f64,
    },
    /// Random coefficients on `|k| ≤ max_mode` with `(1 + k)^{-2}` decay.
    RandomBandLimited {
        max_mode: i64,
        amplitude: f64,
        rng_seed: u64,
    },
}

const WRAP_TAIL: f64 = 1e-15;

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite")))
    }
}

fn check_mode(k: i64, n_modes: usize) -> Result<()> {
    let half = (n_modes / 2) as i64;
    if k.abs() > half {
        return Err(Error::config(format!(
            "wavenumber {k} exceeds the Nyquist limit {half} of an N = {n_modes} grid"
        )));
    }
    Ok(())
}

fn wrapped_gaussian(x: f64, center: f64, width: f64) -> f64 {
    let d = (x - center).rem_euclid(1.0);
    let g = |y: f64| (-0.5 * (y / width).powi(2)).exp();
    let mut total = g(d) + g(d - 1.0);
    for k in 1.. {
        let right = g(d + k as f64);
        let left = g(d - 1.0 - k as f64);
        total += right + left;
        if right.max(left) < WRAP_TAIL * total.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    total
}

impl InitialSpec {
    pub fn validate(&self, n_modes: usize) -> Result<()> {
        match self {
            InitialSpec::FourierModes { modes } => {
                for m in modes {
                    check_finite("mode amplitude", m.amplitude)?;
                    check_finite("mode phase", m.phase)?;
                    check_mode(m.wavenumber, n_modes)?;
                }
                Ok(())
            }
            InitialSpec::Cosine {
                wavenumber,
                amplitude,
                offset,
            } => {
                check_finite("amplitude", *amplitude)?;
                check_finite("offset", *offset)?;
                check_mode(*wavenumber, n_modes)
            }
            InitialSpec::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                check_finite("center", *center)?;
                check_finite("amplitude", *amplitude)?;
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::config("gaussian width must be positive"));
                }
                Ok(())
            }
            InitialSpec::PoissonKernel {
                amplitude,
                radius,
                center,
            } => {
                check_finite("amplitude", *amplitude)?;
                check_finite("center", *center)?;
                if !(0.0..1.0).contains(radius) {
                    return Err(Error::config("poisson kernel radius must lie in [0, 1)"));
                }
                Ok(())
            }
            InitialSpec::RandomBandLimited {
                max_mode, amplitude, ..
            } => {
                check_finite("amplitude", *amplitude)?;
                if *max_mode < 0 {
                    return Err(Error::config("max_mode must be nonnegative"));
                }
                check_mode(*max_mode, n_modes)
            }
        }
    }
}

/// Builds one momentum field on an `n_modes` grid.
pub fn make_initial(spec: &InitialSpec, n_modes: usize) -> Result<SpectralField> {
    spec.validate(n_modes)?;
    match spec {
        InitialSpec::FourierModes { modes } => {
            let pairs: Vec<(i64, Complex64)> = modes
                .iter()
                .map(|m| {
                    let c = if m.wavenumber == 0 {
                        Complex64::new(m.amplitude * m.phase.cos(), 0.0)
                    } else {
                        0.5 * Complex64::from_polar(m.amplitude, m.phase)
                    };
                    (m.wavenumber.abs(), if m.wavenumber < 0 { c.conj() } else { c })
                })
                .collect();
            SpectralField::from_modes(n_modes, &pairs)
        }
        InitialSpec::Cosine {
            wavenumber,
            amplitude,
            offset,
        } => {
            let k = wavenumber.abs();
            let c = if k == 0 { *amplitude } else { 0.5 * amplitude };
            SpectralField::from_modes(
                n_modes,
                &[(0, Complex64::new(*offset, 0.0)), (k, Complex64::new(c, 0.0))],
            )
        }
        InitialSpec::GaussianBump {
            center,
            width,
            amplitude,
        } => {
            let g = GridField::from_fn(n_modes, |x| amplitude * wrapped_gaussian(x, *center, *width))?;
            to_spectral(&g)
        }
        InitialSpec::PoissonKernel {
            amplitude,
            radius,
            center,
        } => {
            let modes: Vec<(i64, Complex64)> = (1..(n_modes / 2) as i64)
                .map(|k| {
                    let phase = -2.0 * PI * k as f64 * center;
                    (k, Complex64::from_polar(0.5 * amplitude * radius.powi(k as i32), phase))
                })
                .collect();
            SpectralField::from_modes(n_modes, &modes)
        }
        InitialSpec::RandomBandLimited {
            max_mode,
            amplitude,
            rng_seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*rng_seed);
            let modes: Vec<(i64, Complex64)> = (0..=*max_mode)
                .map(|k| {
                    let re: f64 = rng.gen_range(-1.0..1.0);
                    let im: f64 = rng.gen_range(-1.0..1.0);
                    let decay = amplitude / (1.0 + k as f64).powi(2);
                    (k, Complex64::new(re, im) * decay)
                })
                .collect();
            SpectralField::from_modes(n_modes, &modes)
        }
    }
}

/// Builds the pair `(m, n)`.
pub fn initial_state(m: &InitialSpec, n: &InitialSpec, n_modes: usize) -> Result<State> {
    State::new(make_initial(m, n_modes)?, make_initial(n, n_modes)?)
}
