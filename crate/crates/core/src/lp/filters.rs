use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Inner radius of the dyadic annulus.
const ANNULUS_INNER: f64 = 3.0 / 4.0;
/// Radius beyond which the low-pass weight vanishes.
const BALL_OUTER: f64 = 4.0 / 3.0;
/// Outer radius of the dyadic annulus.
const ANNULUS_OUTER: f64 = 8.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    /// C∞ weights built from the `exp(-1/t)` smooth step.
    #[default]
    Smooth,
    /// Indicator weights: `χ = 1_{ξ=0}`, `φ_q = 1_{2^q ≤ |ξ| < 2^{q+1}}`.
    Sharp,
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, C∞ in between.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump(t);
        a / (a + bump(1.0 - t))
    }
}

/// Radial low-pass profile: 1 on `|ξ| ≤ 3/4`, 0 on `|ξ| ≥ 4/3`.
fn chi_profile(r: f64) -> f64 {
    1.0 - smooth_step((r - ANNULUS_INNER) / (BALL_OUTER - ANNULUS_INNER))
}

/// Precomputed dyadic weights on the wavenumbers `0..=N/2` of one grid.
#[derive(Debug, Clone)]
pub struct DyadicFilterBank {
    n_modes: usize,
    kind: FilterKind,
    q_max: i32,
    chi: Vec<f64>,
    phi: Vec<Vec<f64>>,
}

impl DyadicFilterBank {
    /// Builds the bank for an `n_modes` grid. `q_max` is the smallest `q`
    /// with `2^q · 8/3 ≥ N/2`; the top block absorbs every frequency above
    /// its inner radius so the weights always sum to one.
    pub fn build(n_modes: usize, kind: FilterKind) -> Result<Self> {
        if !n_modes.is_multiple_of(2) || n_modes < 8 {
            return Err(Error::config(format!(
                "filter bank needs an even grid with N >= 8, got {n_modes}"
            )));
        }
        let half = n_modes / 2;
        let mut q_max = 0i32;
        while 2f64.powi(q_max) * ANNULUS_OUTER < half as f64 {
            q_max += 1;
        }

        let radii = 0..=half;
        let (chi, phi) = match kind {
            FilterKind::Smooth => {
                let chi: Vec<f64> = radii.clone().map(|xi| chi_profile(xi as f64)).collect();
                let phi = (0..=q_max)
                    .map(|q| {
                        radii
                            .clone()
                            .map(|xi| {
                                let x = xi as f64;
                                let inner = chi_profile(x / 2f64.powi(q));
                                let outer = if q == q_max {
                                    1.0
                                } else {
                                    chi_profile(x / 2f64.powi(q + 1))
                                };
                                outer - inner
                            })
                            .collect()
                    })
                    .collect();
                (chi, phi)
            }
            FilterKind::Sharp => {
                let chi: Vec<f64> = radii.clone().map(|xi| if xi == 0 { 1.0 } else { 0.0 }).collect();
                let phi = (0..=q_max)
                    .map(|q| {
                        let lo = 1usize << q;
                        let hi = 1usize << (q + 1);
                        radii
                            .clone()
                            .map(|xi| {
                                let inside = xi >= lo && (xi < hi || q == q_max);
                                if inside {
                                    1.0
                                } else {
                                    0.0
                                }
                            })
                            .collect()
                    })
                    .collect();
                (chi, phi)
            }
        };
        Ok(DyadicFilterBank {
            n_modes,
            kind,
            q_max,
            chi,
            phi,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    /// `χ(|ξ|)`.
    pub fn chi(&self, xi: u64) -> f64 {
        self.chi.get(xi as usize).copied().unwrap_or(0.0)
    }

    /// `φ_q(|ξ|)` for `0 ≤ q ≤ q_max`.
    pub fn phi(&self, q: i32, xi: u64) -> f64 {
        if q < 0 || q > self.q_max {
            return 0.0;
        }
        self.phi[q as usize].get(xi as usize).copied().unwrap_or(0.0)
    }

    /// Weight of block `q` (with `q = -1` the low-pass block) at `|ξ|`.
    pub fn weight(&self, q: i32, xi: u64) -> f64 {
        if q == -1 {
            self.chi(xi)
        } else {
            self.phi(q, xi)
        }
    }

    /// Weight of the homogeneous block `q` at `|ξ|`; the zero frequency is
    /// excluded from every block.
    pub fn homogeneous_weight(&self, q: i32, xi: u64) -> f64 {
        if xi == 0 {
            0.0
        } else {
            self.weight(q, xi)
        }
    }

    /// Weight of `S_q = Σ_{p ≤ q-1} Δ_p` at `|ξ|`.
    pub fn low_pass_weight(&self, q: u32, xi: u64) -> f64 {
        if q as i32 > self.q_max {
            return 1.0;
        }
        match self.kind {
            // the block sum telescopes to χ(2^{-q} ξ)
            FilterKind::Smooth => chi_profile(xi as f64 / 2f64.powi(q as i32)),
            FilterKind::Sharp => (-1..q as i32).map(|p| self.weight(p, xi)).sum(),
        }
    }

    /// Largest `|χ + Σ φ_q - 1|` over the represented wavenumbers.
    pub fn partition_defect(&self) -> f64 {
        (0..=self.n_modes as u64 / 2)
            .map(|xi| {
                let total: f64 = (-1..=self.q_max).map(|q| self.weight(q, xi)).sum();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_grid(&self, f: &SpectralField) -> Result<()> {
        if f.n_modes() != self.n_modes {
            return Err(Error::Shape {
                left: f.n_modes(),
                right: self.n_modes,
            });
        }
        Ok(())
    }

    pub(crate) fn check_index(&self, q: i32) -> Result<()> {
        if q < -1 || q > self.q_max {
            return Err(Error::BlockIndex { q, q_max: self.q_max });
        }
        Ok(())
    }

    pub(crate) fn apply(&self, q: i32, f: &SpectralField, homogeneous: bool) -> Result<SpectralField> {
        self.check_index(q)?;
        Ok(if homogeneous {
            f.map_radial(|xi| self.homogeneous_weight(q, xi))
        } else {
            f.map_radial(|xi| self.weight(q, xi))
        })
    }
}
