//! Fourier representation of real periodic fields on the unit torus.
//!
//! Fields live on the grid `x_j = j / N`, `j = 0..N`, with `N` even. The
//! spectral form stores `N` complex coefficients in FFT order: index `i`
//! holds wavenumber `i` for `i < N/2` and `i - N` otherwise, so the Nyquist
//! slot carries wavenumber `-N/2`. Coefficients are normalized as the Fourier
//! integral `c(n) = ∫ f(x) e^{-2πinx} dx`, i.e. the forward DFT divided by `N`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, PlanPair>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plans(n: usize) -> PlanPair {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry(n)
            .or_insert_with(|| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n)))
            .clone()
    })
}

fn check_modes(n_modes: usize) -> Result<()> {
    if n_modes == 0 || !n_modes.is_multiple_of(2) {
        return Err(Error::InvalidField(format!(
            "grid size must be a positive even integer, got {n_modes}"
        )));
    }
    Ok(())
}

/// Signed wavenumber stored at FFT index `index` on an `n_modes` grid.
#[inline]
pub fn wavenumber(index: usize, n_modes: usize) -> i64 {
    if index < n_modes / 2 {
        index as i64
    } else {
        index as i64 - n_modes as i64
    }
}

/// FFT index holding wavenumber `k`, if it is represented.
#[inline]
pub fn index_of(k: i64, n_modes: usize) -> Option<usize> {
    let half = (n_modes / 2) as i64;
    if k >= -half && k < half {
        Some(k.rem_euclid(n_modes as i64) as usize)
    } else {
        None
    }
}

/// Largest wavenumber kept by the 2/3 rule: the biggest `K` with `3K < N`.
#[inline]
pub fn dealias_cutoff(n_modes: usize) -> i64 {
    ((n_modes - 1) / 3) as i64
}

/// Real samples of a periodic field at `x_j = j / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    values: Vec<f64>,
}

impl GridField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_modes(values.len())?;
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite grid value {} at index {j}",
                values[j]
            )));
        }
        Ok(GridField { values })
    }

    /// Samples `f` on the grid.
    pub fn from_fn(n_modes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_modes(n_modes)?;
        let values = (0..n_modes).map(|j| f(j as f64 / n_modes as f64)).collect();
        GridField::new(values)
    }

    pub fn zeros(n_modes: usize) -> Result<Self> {
        check_modes(n_modes)?;
        Ok(GridField {
            values: vec![0.0; n_modes],
        })
    }

    pub fn n_modes(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Quadrature mean `(1/N) Σ f(x_j)`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Complex Fourier coefficients of a real periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(n_modes: usize) -> Result<Self> {
        check_modes(n_modes)?;
        Ok(SpectralField {
            coeffs: vec![Complex64::new(0.0, 0.0); n_modes],
        })
    }

    /// Wraps coefficients given in FFT order. The input is projected onto
    /// Hermitian-symmetric spectra so the field is real.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        check_modes(coeffs.len())?;
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidField("non-finite coefficient".into()));
        }
        let mut field = SpectralField { coeffs };
        field.symmetrize();
        Ok(field)
    }

    /// Builds a field from `(wavenumber, coefficient)` pairs; the conjugate
    /// partner of each entry is filled in automatically.
    pub fn from_modes(n_modes: usize, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut field = SpectralField::zeros(n_modes)?;
        for &(k, c) in modes {
            let half = (n_modes / 2) as i64;
            if k.abs() > half {
                return Err(Error::config(format!(
                    "wavenumber {k} exceeds the Nyquist limit {half}"
                )));
            }
            if k == 0 {
                field.coeffs[0] += Complex64::new(c.re, 0.0);
            } else if k.abs() == half {
                let i = half as usize;
                field.coeffs[i] += Complex64::new(c.re, 0.0);
            } else {
                let i = index_of(k, n_modes).expect("checked range");
                let j = index_of(-k, n_modes).expect("checked range");
                field.coeffs[i] += c;
                field.coeffs[j] += c.conj();
            }
        }
        Ok(field)
    }

    pub fn constant(n_modes: usize, value: f64) -> Result<Self> {
        let mut field = SpectralField::zeros(n_modes)?;
        field.coeffs[0] = Complex64::new(value, 0.0);
        Ok(field)
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficients in FFT order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of wavenumber `k`; zero when `k` is not represented.
    pub fn coeff(&self, k: i64) -> Complex64 {
        index_of(k, self.n_modes()).map(|i| self.coeffs[i]).unwrap_or_default()
    }

    /// Iterates `(wavenumber, coefficient)` in FFT order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.n_modes();
        self.coeffs.iter().enumerate().map(move |(i, c)| (wavenumber(i, n), *c))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn symmetrize(&mut self) {
        let n = self.n_modes();
        self.coeffs[0].im = 0.0;
        self.coeffs[n / 2].im = 0.0;
        for i in 1..n / 2 {
            let a = self.coeffs[i];
            let b = self.coeffs[n - i].conj();
            let avg = (a + b) * 0.5;
            self.coeffs[i] = avg;
            self.coeffs[n - i] = avg.conj();
        }
    }

    /// Largest deviation from `c(-n) = conj(c(n))`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n_modes();
        let mut worst = self.coeffs[0].im.abs().max(self.coeffs[n / 2].im.abs());
        for i in 1..n / 2 {
            worst = worst.max((self.coeffs[i] - self.coeffs[n - i].conj()).norm());
        }
        worst
    }

    fn ensure_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.n_modes() != other.n_modes() {
            return Err(Error::Shape {
                left: self.n_modes(),
                right: other.n_modes(),
            });
        }
        Ok(())
    }

    /// Applies a real-or-complex Fourier multiplier `m(k)`.
    pub fn map_multiplier(&self, m: impl Fn(i64) -> Complex64) -> SpectralField {
        let n = self.n_modes();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(wavenumber(i, n)))
            .collect();
        SpectralField { coeffs }
    }

    /// Applies a real multiplier depending only on `|k|`.
    pub fn map_radial(&self, w: impl Fn(u64) -> f64) -> SpectralField {
        let n = self.n_modes();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * w(wavenumber(i, n).unsigned_abs()))
            .collect();
        SpectralField { coeffs }
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        SpectralField {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Result<SpectralField> {
        self.ensure_same_grid(other)?;
        Ok(SpectralField {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y * a).collect(),
        })
    }

    /// `∫ |f|^2` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// Grid maximum of `|f|`.
    pub fn linf_norm(&self) -> f64 {
        to_grid(self).max_abs()
    }

    /// Largest coefficient-wise distance.
    pub fn max_coeff_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// Shifts the field: returns `g(x) = f(x - shift)`.
    pub fn translate(&self, shift: f64) -> SpectralField {
        let n = self.n_modes();
        let mut out = self.map_multiplier(|k| Complex64::from_polar(1.0, -TWO_PI * k as f64 * shift));
        // the Nyquist mode is a real cosine; a phase would make it complex
        let nyq = n / 2;
        out.coeffs[nyq] = Complex64::new(self.coeffs[nyq].re * (-TWO_PI * (n as f64 / 2.0) * shift).cos(), 0.0);
        out
    }

    /// Zeroes every wavenumber outside the 2/3-rule band.
    pub fn truncate_dealias(&self) -> SpectralField {
        let cutoff = dealias_cutoff(self.n_modes());
        self.map_multiplier(|k| {
            if k.abs() <= cutoff {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs).expect("grid mismatch in field addition")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs).expect("grid mismatch in field subtraction")
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

/// Forward transform with the `1/N` quadrature weight.
pub fn to_spectral(f: &GridField) -> Result<SpectralField> {
    let n = f.n_modes();
    check_modes(n)?;
    if f.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidField("non-finite grid value".into()));
    }
    let (fwd, _) = plans(n);
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let inv_n = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= inv_n);
    let mut out = SpectralField { coeffs: buf };
    out.symmetrize();
    Ok(out)
}

/// Inverse transform; the real part of the synthesis.
pub fn to_grid(f: &SpectralField) -> GridField {
    let n = f.n_modes();
    let (_, inv) = plans(n);
    let mut buf = f.coeffs.clone();
    inv.process(&mut buf);
    GridField {
        values: buf.into_iter().map(|c| c.re).collect(),
    }
}

/// `∂_x`: multiplies `c(n)` by `i 2π n`; the Nyquist mode is zeroed.
pub fn derivative(f: &SpectralField) -> SpectralField {
    let half = (f.n_modes() / 2) as i64;
    f.map_multiplier(|k| {
        if k == -half {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, TWO_PI * k as f64)
        }
    })
}

/// `∂_x^{-1}`: divides by `i 2π n` for `n ≠ 0` and annihilates the mean.
/// The Nyquist mode is dropped so that `derivative` inverts it exactly.
pub fn antiderivative_zero_mean(f: &SpectralField) -> SpectralField {
    let half = (f.n_modes() / 2) as i64;
    f.map_multiplier(|k| {
        if k == 0 || k == -half {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0 / (TWO_PI * k as f64))
        }
    })
}

#[inline]
fn helmholtz_symbol(k: i64) -> f64 {
    let w = TWO_PI * k as f64;
    1.0 + w * w
}

/// `(1 - ∂_x^2)^{-1}`.
pub fn helmholtz_inverse(f: &SpectralField) -> SpectralField {
    f.map_multiplier(|k| Complex64::new(1.0 / helmholtz_symbol(k), 0.0))
}

/// `(1 - ∂_x^2)`.
pub fn helmholtz(f: &SpectralField) -> SpectralField {
    f.map_multiplier(|k| Complex64::new(helmholtz_symbol(k), 0.0))
}

/// `∫ f dx`.
pub fn mean(f: &SpectralField) -> f64 {
    f.coeffs[0].re
}

/// Pointwise product on the grid. With `dealias` both inputs and the output
/// are truncated to the 2/3-rule band, which makes the result exact for
/// inputs supported in `|n| < N/3`.
pub fn product(f: &SpectralField, g: &SpectralField, dealias: bool) -> Result<SpectralField> {
    f.ensure_same_grid(g)?;
    let (fg, gg) = if dealias {
        (to_grid(&f.truncate_dealias()), to_grid(&g.truncate_dealias()))
    } else {
        (to_grid(f), to_grid(g))
    };
    let values = fg.values.iter().zip(&gg.values).map(|(a, b)| a * b).collect();
    let prod = to_spectral(&GridField { values })?;
    Ok(if dealias { prod.truncate_dealias() } else { prod })
}

/// Dealiased pointwise product (2/3 rule).
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    product(f, g, true)
}
