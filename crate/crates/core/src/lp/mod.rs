//! Dyadic frequency decomposition and Besov norms on the torus.
//!
//! A [`DyadicFilterBank`] holds the radial weights `χ(|ξ|)` and
//! `φ_q(|ξ|) = φ(2^{-q}|ξ|)` evaluated on the integer wavenumbers of one
//! grid. The nonhomogeneous blocks are `Δ_{-1} = χ(D)` and `Δ_q = φ_q(D)`;
//! the homogeneous blocks use the same weights on nonzero frequencies and
//! drop the mean entirely.

mod filters;
pub mod probes;

pub use filters::{DyadicFilterBank, FilterKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{to_grid, SpectralField};

/// Integrability exponent `p` of a Besov norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrability {
    Two,
    Infinity,
}

/// Summation exponent `r` of a Besov norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Summability {
    One,
    Two,
    Infinity,
}

impl Integrability {
    pub fn from_f64(p: f64) -> Result<Self> {
        if p == 2.0 {
            Ok(Integrability::Two)
        } else if p == f64::INFINITY {
            Ok(Integrability::Infinity)
        } else {
            Err(Error::config(format!(
                "unsupported integrability p = {p}; use 2 or inf"
            )))
        }
    }
}

impl Summability {
    pub fn from_f64(r: f64) -> Result<Self> {
        if r == 1.0 {
            Ok(Summability::One)
        } else if r == 2.0 {
            Ok(Summability::Two)
        } else if r == f64::INFINITY {
            Ok(Summability::Infinity)
        } else {
            Err(Error::config(format!(
                "unsupported summability r = {r}; use 1, 2 or inf"
            )))
        }
    }

    /// `ℓ^r` norm of a nonnegative sequence.
    pub fn sum(self, terms: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            Summability::One => terms.into_iter().sum(),
            Summability::Two => terms.into_iter().map(|t| t * t).sum::<f64>().sqrt(),
            Summability::Infinity => terms.into_iter().fold(0.0, f64::max),
        }
    }
}

/// Parses `"1"`, `"2"`, `"inf"` (also `"infinity"`) into an exponent.
pub fn parse_exponent(text: &str) -> Result<f64> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| Error::config(format!("cannot parse exponent `{text}`"))),
    }
}

/// Parameters `(s, p, r)` of a Besov norm, homogeneous or not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: Integrability,
    pub r: Summability,
    pub homogeneous: bool,
}

impl BesovParams {
    pub fn new(s: f64, p: Integrability, r: Summability) -> Self {
        BesovParams {
            s,
            p,
            r,
            homogeneous: false,
        }
    }

    pub fn homogeneous(s: f64, p: Integrability, r: Summability) -> Self {
        BesovParams {
            s,
            p,
            r,
            homogeneous: true,
        }
    }

    /// Builds parameters from numeric exponents, rejecting anything but
    /// `p ∈ {2, ∞}` and `r ∈ {1, 2, ∞}`.
    pub fn from_exponents(s: f64, p: f64, r: f64, homogeneous: bool) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::config(format!("regularity s = {s} must be finite")));
        }
        Ok(BesovParams {
            s,
            p: Integrability::from_f64(p)?,
            r: Summability::from_f64(r)?,
            homogeneous,
        })
    }
}

/// The `B^{1/2}_{2,1}` parameters, the critical space of the model.
pub const CRITICAL: BesovParams = BesovParams {
    s: 0.5,
    p: Integrability::Two,
    r: Summability::One,
    homogeneous: false,
};

/// Norms `‖Δ_q f‖_{L^p}` for every block, as `(q, norm)` pairs from
/// `q = -1` up to `q_max`.
pub fn block_norms(
    f: &SpectralField,
    p: Integrability,
    homogeneous: bool,
    bank: &DyadicFilterBank,
) -> Result<Vec<(i32, f64)>> {
    bank.check_grid(f)?;
    (-1..=bank.q_max())
        .map(|q| {
            let blk = bank.apply(q, f, homogeneous)?;
            let norm = match p {
                Integrability::Two => blk.l2_norm(),
                Integrability::Infinity => to_grid(&blk).max_abs(),
            };
            Ok((q, norm))
        })
        .collect()
}

/// Combines precomputed block norms into `‖(2^{qs} ‖Δ_q f‖)_q‖_{ℓ^r}`.
pub fn besov_from_blocks(blocks: &[(i32, f64)], s: f64, r: Summability) -> f64 {
    r.sum(blocks.iter().map(|&(q, b)| 2f64.powf(q as f64 * s) * b))
}

/// Besov norm of `f` with the given parameters.
pub fn besov_norm(f: &SpectralField, params: BesovParams, bank: &DyadicFilterBank) -> Result<f64> {
    let blocks = block_norms(f, params.p, params.homogeneous, bank)?;
    Ok(besov_from_blocks(&blocks, params.s, params.r))
}

/// Dyadic block `Δ_q f` for `q ∈ [-1, q_max]`.
pub fn block(q: i32, f: &SpectralField, bank: &DyadicFilterBank) -> Result<SpectralField> {
    bank.check_grid(f)?;
    bank.apply(q, f, false)
}

/// Low-frequency cut-off `S_q f = Σ_{p ≤ q-1} Δ_p f`.
pub fn low_pass(q: u32, f: &SpectralField, bank: &DyadicFilterBank) -> Result<SpectralField> {
    bank.check_grid(f)?;
    Ok(f.map_radial(|xi| bank.low_pass_weight(q, xi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn mode(n: usize, k: i64) -> SpectralField {
        // cos(2πkx), built exactly in coefficient space
        SpectralField::from_modes(n, &[(k, Complex64::new(0.5, 0.0))]).unwrap()
    }

    fn random_field(n: usize, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<_> = (0..n as i64 / 2)
            .map(|k| (k, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        SpectralField::from_modes(n, &modes).unwrap()
    }

    #[test]
    fn blocks_of_constant() {
        for kind in [FilterKind::Smooth, FilterKind::Sharp] {
            let bank = DyadicFilterBank::build(64, kind).unwrap();
            let c = SpectralField::constant(64, 2.5).unwrap();
            assert_eq!(block(-1, &c, &bank).unwrap(), c);
            for q in 0..=bank.q_max() {
                assert_eq!(block(q, &c, &bank).unwrap().l2_norm(), 0.0);
            }
        }
    }

    #[test]
    fn sharp_mode_eight_lives_in_one_block() {
        let bank = DyadicFilterBank::build(64, FilterKind::Sharp).unwrap();
        let f = mode(64, 8);
        // scan the sharp supports directly: the block holding |ξ| = 8
        let holder: Vec<i32> = (0..=bank.q_max())
            .filter(|&q| (1u64 << q) <= 8 && (8 < (1u64 << (q + 1)) || q == bank.q_max()))
            .collect();
        assert_eq!(holder, vec![3]);
        for q in -1..=bank.q_max() {
            let nonzero = block(q, &f, &bank).unwrap().l2_norm() > 0.0;
            assert_eq!(nonzero, q == 3, "q = {q}");
        }
    }

    #[test]
    fn block_index_out_of_range() {
        let bank = DyadicFilterBank::build(64, FilterKind::Smooth).unwrap();
        let f = mode(64, 1);
        assert!(matches!(block(-2, &f, &bank), Err(Error::BlockIndex { .. })));
        assert!(matches!(
            block(bank.q_max() + 1, &f, &bank),
            Err(Error::BlockIndex { .. })
        ));
    }

    #[test]
    fn low_pass_examples() {
        for kind in [FilterKind::Smooth, FilterKind::Sharp] {
            let bank = DyadicFilterBank::build(64, kind).unwrap();
            let one = mode(64, 1);
            assert!(low_pass(1, &one, &bank).unwrap().max_coeff_diff(&one) == 0.0);
            let eight = mode(64, 8);
            assert_eq!(low_pass(1, &eight, &bank).unwrap().l2_norm(), 0.0);
            let f = random_field(64, 5);
            let full = low_pass(bank.q_max() as u32 + 1, &f, &bank).unwrap();
            assert!(full.max_coeff_diff(&f) < 1e-15);
        }
    }

    #[test]
    fn besov_examples() {
        let n = 64;
        let f = mode(n, 8);
        let smooth = DyadicFilterBank::build(n, FilterKind::Smooth).unwrap();
        let sharp = DyadicFilterBank::build(n, FilterKind::Sharp).unwrap();
        let p = BesovParams::new(0.0, Integrability::Two, Summability::One);
        assert!((besov_norm(&f, p, &smooth).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);

        // sharp blocks put |ξ| = 8 in q = 3 alone: 2^{3/2} * ‖f‖_{L2}
        let half = BesovParams::new(0.5, Integrability::Two, Summability::One);
        let expect = 2f64.powf(1.5) * f.l2_norm();
        assert!((expect - 2.0).abs() < 1e-14);
        assert!((besov_norm(&f, half, &sharp).unwrap() - expect).abs() < 1e-14);

        let zero = SpectralField::zeros(n).unwrap();
        for s in [-1.0, 0.0, 0.5, 2.0] {
            for p in [Integrability::Two, Integrability::Infinity] {
                for r in [Summability::One, Summability::Two, Summability::Infinity] {
                    for h in [false, true] {
                        let params = BesovParams {
                            s,
                            p,
                            r,
                            homogeneous: h,
                        };
                        assert_eq!(besov_norm(&zero, params, &smooth).unwrap(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn unsupported_exponents_are_config_errors() {
        assert!(matches!(
            BesovParams::from_exponents(0.0, 1.0, 1.0, false),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            BesovParams::from_exponents(0.0, 2.0, 3.0, false),
            Err(Error::Config(_))
        ));
        assert!(BesovParams::from_exponents(0.0, f64::INFINITY, f64::INFINITY, true).is_ok());
        assert_eq!(parse_exponent("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_exponent("2").unwrap(), 2.0);
    }

    #[test]
    fn homogeneous_norm_ignores_constants() {
        let bank = DyadicFilterBank::build(64, FilterKind::Smooth).unwrap();
        let c = SpectralField::constant(64, 3.0).unwrap();
        let p = BesovParams::homogeneous(0.0, Integrability::Infinity, Summability::One);
        assert_eq!(besov_norm(&c, p, &bank).unwrap(), 0.0);
        let f = random_field(64, 9);
        let shifted = f.axpy(1.0, &c).unwrap();
        let a = besov_norm(&f, p, &bank).unwrap();
        let b = besov_norm(&shifted, p, &bank).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn helmholtz_norm_equivalence() {
        // per block, 2^{2q} / (1 + 4π²ξ²) over the annulus support is bounded by
        // 1/4 (low block, ξ = 0) and 1 / (1 + 4π² (8/3)²) (outer annulus edge)
        let c1 = 1.0 / (1.0 + 4.0 * PI * PI * (8.0f64 / 3.0).powi(2));
        let c2 = 0.25;
        let bank = DyadicFilterBank::build(128, FilterKind::Smooth).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for seed in 0..100 {
            let m = random_field(128, seed);
            let u = crate::spectral::helmholtz_inverse(&m);
            let ratio = besov_norm(&u, BesovParams::new(2.5, Integrability::Two, Summability::One), &bank).unwrap()
                / besov_norm(&m, CRITICAL, &bank).unwrap();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        assert!(c1 <= lo && hi <= c2, "[{lo}, {hi}]");
    }

    proptest! {
        #[test]
        fn reconstruction_both_kinds(seed in any::<u64>()) {
            for kind in [FilterKind::Smooth, FilterKind::Sharp] {
                let bank = DyadicFilterBank::build(128, kind).unwrap();
                let f = random_field(128, seed);
                let mut sum = SpectralField::zeros(128).unwrap();
                for q in -1..=bank.q_max() {
                    sum = &sum + &block(q, &f, &bank).unwrap();
                }
                prop_assert!(sum.max_coeff_diff(&f) < 1e-12);
            }
        }

        #[test]
        fn monotone_in_s_and_r(seed in any::<u64>(), s in -1.0..2.0f64, ds in 0.0..1.0f64) {
            let bank = DyadicFilterBank::build(64, FilterKind::Smooth).unwrap();
            let f = random_field(64, seed);
            let lo = besov_norm(&f, BesovParams::new(s, Integrability::Two, Summability::One), &bank).unwrap();
            let hi = besov_norm(&f, BesovParams::new(s + ds, Integrability::Two, Summability::One), &bank).unwrap();
            // every q >= 0 block of a full random field is nonzero; the q = -1 weight 2^{-s} falls with s
            let low_block = block(-1, &f, &bank).unwrap().l2_norm();
            prop_assert!(hi + low_block * (2f64.powf(-s) - 2f64.powf(-s - ds)) >= lo * (1.0 - 1e-12));
            let r1 = lo;
            let rinf = besov_norm(&f, BesovParams::new(s, Integrability::Two, Summability::Infinity), &bank).unwrap();
            prop_assert!(r1 >= rinf);
        }

        #[test]
        fn embedding_chain(seed in any::<u64>()) {
            let bank = DyadicFilterBank::build(64, FilterKind::Smooth).unwrap();
            let f = random_field(64, seed);
            let norms: Vec<f64> = [Summability::One, Summability::Two, Summability::Infinity]
                .into_iter()
                .map(|r| besov_norm(&f, BesovParams::homogeneous(0.0, Integrability::Infinity, r), &bank).unwrap())
                .collect();
            prop_assert!(norms[0] >= norms[1] && norms[1] >= norms[2]);
        }
    }
}
