//! Empirical ratio probes for the product, interpolation and commutator
//! estimates used in the well-posedness argument.
//!
//! Each probe evaluates `LHS / RHS` with the unspecified universal constant
//! dropped; the maximum over a corpus is reported as `C_emp`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{besov_norm, BesovParams, DyadicFilterBank, Integrability, Summability};
use crate::error::{Error, Result};
use crate::parallel;
use crate::spectral::{product, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Probe {
    /// `‖fg‖_{B^{s1}_{2,r}} ≤ C ‖f‖_{B^{s1}_{2,r}} ‖g‖_{B^{s2}_{2,r}}`.
    Moser { s1: f64, s2: f64, r: Summability },
    /// `‖fg‖_{B^{-1/2}_{2,∞}} ≤ C ‖f‖_{B^{-1/2}_{2,1}} (‖g‖_{B^{1/2}_{2,∞}} + ‖g‖_∞)`.
    Endpoint,
    /// `‖f‖_{B^s_{2,1}} ≤ C (1+δ)/δ ‖f‖_{B^s_{2,∞}} (1 + log(‖f‖_{B^{s+δ}_{2,∞}} / ‖f‖_{B^s_{2,∞}}))`.
    LogInterp { s: f64, delta: f64 },
    /// `‖f‖_{B^{θ s1 + (1-θ) s2}_{2,1}} ≤ C/(s2-s1) (1/θ + 1/(1-θ)) ‖f‖^θ_{B^{s1}_{2,∞}} ‖f‖^{1-θ}_{B^{s2}_{2,∞}}`.
    RealInterp { s1: f64, s2: f64, theta: f64 },
    /// `‖(2^{qσ} ‖[v∂_x, Δ_q] f‖_{L²})_q‖_{ℓ^r} ≤ C ‖∂_x v‖_∞ ‖f‖_{B^σ_{2,r}}`.
    Commutator { sigma: f64, r: Summability },
}

impl Probe {
    pub fn name(&self) -> &'static str {
        match self {
            Probe::Moser { .. } => "moser",
            Probe::Endpoint => "endpoint",
            Probe::LogInterp { .. } => "log_interp",
            Probe::RealInterp { .. } => "real_interp",
            Probe::Commutator { .. } => "commutator",
        }
    }

    /// The five probes at the parameters the estimates are applied with.
    pub fn standard_suite() -> Vec<Probe> {
        vec![
            Probe::Moser {
                s1: -0.5,
                s2: 1.5,
                r: Summability::Infinity,
            },
            Probe::Endpoint,
            Probe::LogInterp { s: -0.5, delta: 1.0 },
            Probe::RealInterp {
                s1: -0.5,
                s2: 0.5,
                theta: 0.5,
            },
            Probe::Commutator {
                sigma: 0.5,
                r: Summability::One,
            },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{what} must be finite")))
            }
        };
        match *self {
            Probe::Moser { s1, s2, r } => {
                finite(s1, "s1")?;
                finite(s2, "s2")?;
                let upper_ok = if r == Summability::One { s2 >= 0.5 } else { s2 > 0.5 };
                if !(s1 <= 0.5 && upper_ok && s1 + s2 > 0.0) {
                    return Err(Error::config(format!(
                        "moser probe needs s1 <= 1/2 < s2 (s2 >= 1/2 when r = 1) and s1 + s2 > 0, got s1 = {s1}, s2 = {s2}"
                    )));
                }
            }
            Probe::Endpoint => {}
            Probe::LogInterp { s, delta } => {
                finite(s, "s")?;
                if !(delta > 0.0 && delta <= 1.0) {
                    return Err(Error::config(format!(
                        "log_interp probe needs 0 < delta <= 1, got {delta}"
                    )));
                }
            }
            Probe::RealInterp { s1, s2, theta } => {
                finite(s1, "s1")?;
                finite(s2, "s2")?;
                if s1 >= s2 {
                    return Err(Error::config(format!(
                        "real_interp probe needs s1 < s2, got s1 = {s1}, s2 = {s2}"
                    )));
                }
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(Error::config(format!(
                        "real_interp probe needs 0 < theta < 1, got {theta}"
                    )));
                }
            }
            Probe::Commutator { sigma, .. } => {
                if !(sigma > 0.0 && sigma < 1.0) {
                    return Err(Error::config(format!(
                        "commutator probe needs 0 < sigma < 1, got {sigma}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One trial: `f` and a second field `g`, which doubles as the velocity
/// of the commutator probe.
#[derive(Debug, Clone)]
pub struct Trial {
    pub f: SpectralField,
    pub g: SpectralField,
}

/// Ratios of one probe over a corpus.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub probe: Probe,
    pub ratios: Vec<f64>,
    /// Largest ratio over the corpus.
    pub c_emp: f64,
}

impl ProbeReport {
    pub fn is_finite(&self) -> bool {
        self.c_emp.is_finite() && self.ratios.iter().all(|r| r.is_finite())
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn norm(f: &SpectralField, s: f64, r: Summability, bank: &DyadicFilterBank) -> Result<f64> {
    besov_norm(f, BesovParams::new(s, Integrability::Two, r), bank)
}

/// `[v∂_x, Δ_q] f` by direct coefficient convolution:
/// `Σ_k v̂(k) i2π(n-k) f̂(n-k) (φ_q(n-k) - φ_q(n))`.
/// A constant `v` gives exactly zero.
pub fn commutator(q: i32, v: &SpectralField, f: &SpectralField, bank: &DyadicFilterBank) -> Result<SpectralField> {
    bank.check_grid(v)?;
    bank.check_grid(f)?;
    bank.check_index(q)?;
    let n_modes = f.n_modes();
    let half = (n_modes / 2) as i64;
    let v_modes: Vec<(i64, Complex64)> = v.modes().filter(|(_, c)| c.norm() != 0.0).collect();
    let f_modes: Vec<(i64, Complex64)> = f.modes().filter(|&(k, c)| c.norm() != 0.0 && k.abs() < half).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n_modes];
    for &(k, vk) in &v_modes {
        for &(l, fl) in &f_modes {
            let n = k + l;
            if n.abs() >= half {
                continue;
            }
            let w = bank.weight(q, l.unsigned_abs()) - bank.weight(q, n.unsigned_abs());
            if w == 0.0 {
                continue;
            }
            let dl = Complex64::new(0.0, 2.0 * std::f64::consts::PI * l as f64) * fl;
            let idx = n.rem_euclid(n_modes as i64) as usize;
            out[idx] += vk * dl * w;
        }
    }
    SpectralField::from_coeffs(out)
}

/// Ratio of one probe on one trial.
pub fn inequality_probe(probe: &Probe, trial: &Trial, bank: &DyadicFilterBank) -> Result<f64> {
    probe.validate()?;
    let Trial { f, g } = trial;
    match *probe {
        Probe::Moser { s1, s2, r } => {
            let fg = product(f, g, false)?;
            let lhs = norm(&fg, s1, r, bank)?;
            Ok(ratio(lhs, norm(f, s1, r, bank)? * norm(g, s2, r, bank)?))
        }
        Probe::Endpoint => {
            let fg = product(f, g, false)?;
            let lhs = norm(&fg, -0.5, Summability::Infinity, bank)?;
            let rhs =
                norm(f, -0.5, Summability::One, bank)? * (norm(g, 0.5, Summability::Infinity, bank)? + g.linf_norm());
            Ok(ratio(lhs, rhs))
        }
        Probe::LogInterp { s, delta } => {
            let lhs = norm(f, s, Summability::One, bank)?;
            let base = norm(f, s, Summability::Infinity, bank)?;
            let upper = norm(f, s + delta, Summability::Infinity, bank)?;
            if base == 0.0 {
                return Ok(ratio(lhs, 0.0));
            }
            let rhs = (1.0 + delta) / delta * base * (1.0 + (upper / base).ln());
            Ok(ratio(lhs, rhs))
        }
        Probe::RealInterp { s1, s2, theta } => {
            let s = theta * s1 + (1.0 - theta) * s2;
            let lhs = norm(f, s, Summability::One, bank)?;
            let factor = (1.0 / theta + 1.0 / (1.0 - theta)) / (s2 - s1);
            let rhs = factor
                * norm(f, s1, Summability::Infinity, bank)?.powf(theta)
                * norm(f, s2, Summability::Infinity, bank)?.powf(1.0 - theta);
            Ok(ratio(lhs, rhs))
        }
        Probe::Commutator { sigma, r } => {
            let v = g;
            let mut terms = Vec::with_capacity(bank.q_max() as usize + 2);
            for q in -1..=bank.q_max() {
                let c = commutator(q, v, f, bank)?;
                terms.push(2f64.powf(q as f64 * sigma) * c.l2_norm());
            }
            let lhs = r.sum(terms);
            let dv = crate::spectral::derivative(v).linf_norm();
            Ok(ratio(lhs, dv * norm(f, sigma, r, bank)?))
        }
    }
}

/// Seeded corpus of band-limited trial pairs. Fields carry modes
/// `|k| < N/4`, so products are resolved exactly on the grid.
pub fn random_corpus(trials: usize, seed: u64, n_modes: usize) -> Result<Vec<Trial>> {
    if n_modes < 16 || !n_modes.is_multiple_of(2) {
        return Err(Error::config(format!(
            "probe corpus needs an even grid with N >= 16, got {n_modes}"
        )));
    }
    let max_mode = (n_modes / 4 - 1) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = |rng: &mut ChaCha8Rng| {
        // random bandwidth so the corpus spans several dyadic blocks
        let band = rng.gen_range(1..=max_mode);
        let decay = rng.gen_range(0.0..3.0);
        let modes: Vec<(i64, Complex64)> = (0..=band)
            .map(|k| {
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                (k, c / (1.0 + k as f64).powf(decay))
            })
            .collect();
        SpectralField::from_modes(n_modes, &modes)
    };
    (0..trials)
        .map(|_| {
            Ok(Trial {
                f: field(&mut rng)?,
                g: field(&mut rng)?,
            })
        })
        .collect()
}

fn report(probe: Probe, ratios: Vec<Result<f64>>) -> Result<ProbeReport> {
    let ratios = ratios.into_iter().collect::<Result<Vec<f64>>>()?;
    let c_emp = ratios
        .iter()
        .cloned()
        .fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    Ok(ProbeReport { probe, ratios, c_emp })
}

/// Runs one probe over a corpus with the build's default strategy.
pub fn run_probe(probe: Probe, corpus: &[Trial], bank: &DyadicFilterBank) -> Result<ProbeReport> {
    probe.validate()?;
    report(probe, parallel::map(corpus, |t| inequality_probe(&probe, t, bank)))
}

/// Same as [`run_probe`] on the calling thread.
pub fn run_probe_sequential(probe: Probe, corpus: &[Trial], bank: &DyadicFilterBank) -> Result<ProbeReport> {
    probe.validate()?;
    report(
        probe,
        parallel::map_sequential(corpus, |t| inequality_probe(&probe, t, bank)),
    )
}
