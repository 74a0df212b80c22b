use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, adaptive_simpson_half_line};

/// Absolute tolerance for schedule quadrature.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// A time-dependent coefficient such as `α(t)` or `γ(t)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude · e^{-2 · rate · t}`.
    ExpDecay {
        amplitude: f64,
        rate: f64,
    },
    /// Piecewise-linear through `(t, value)` pairs, constant outside.
    Table {
        points: Vec<(f64, f64)>,
    },
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Schedule::Zero => Ok(()),
            Schedule::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config("constant schedule value must be finite"))
                }
            }
            Schedule::ExpDecay { amplitude, rate } => {
                if !amplitude.is_finite() {
                    Err(Error::config("exp_decay amplitude must be finite"))
                } else if !(rate.is_finite() && *rate > 0.0) {
                    Err(Error::config("exp_decay rate must be positive"))
                } else {
                    Ok(())
                }
            }
            Schedule::Table { points } => {
                if points.is_empty() {
                    return Err(Error::config("table schedule needs at least one point"));
                }
                if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err(Error::config("table schedule entries must be finite"));
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::config("table schedule times must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Schedule::Zero => 0.0,
            Schedule::Constant { value } => *value,
            Schedule::ExpDecay { amplitude, rate } => amplitude * (-2.0 * rate * t).exp(),
            Schedule::Table { points } => table_value(points, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Schedule::Zero => true,
            Schedule::Constant { value } => *value == 0.0,
            Schedule::ExpDecay { amplitude, .. } => *amplitude == 0.0,
            Schedule::Table { points } => points.iter().all(|&(_, v)| v == 0.0),
        }
    }

    /// `∫_{t0}^{t1} |value(t)| dt` for `t0 ≤ t1`.
    pub fn integral_abs(&self, t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return 0.0;
        }
        match self {
            Schedule::Zero => 0.0,
            Schedule::Constant { value } => value.abs() * (t1 - t0),
            Schedule::ExpDecay { .. } => adaptive_simpson(&|t| self.value(t).abs(), t0, t1, QUADRATURE_TOL),
            Schedule::Table { points } => table_integral_abs(points, t0, t1),
        }
    }

    /// `∫_0^∞ |value(t)| dt`, `+∞` when the schedule is not integrable.
    pub fn integral_abs_to_infinity(&self) -> f64 {
        match self {
            Schedule::Zero => 0.0,
            Schedule::Constant { value } => {
                if *value == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Schedule::ExpDecay { amplitude, .. } => {
                if *amplitude == 0.0 {
                    0.0
                } else {
                    adaptive_simpson_half_line(&|t| self.value(t).abs(), QUADRATURE_TOL)
                }
            }
            Schedule::Table { points } => {
                let last = points.last().expect("validated table").1;
                if last != 0.0 {
                    f64::INFINITY
                } else {
                    let end = points.last().unwrap().0.max(0.0);
                    self.integral_abs(0.0, end)
                }
            }
        }
    }
}

fn table_value(points: &[(f64, f64)], t: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|&(ti, _)| ti <= t);
    let (t0, v0) = points[i - 1];
    let (t1, v1) = points[i];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// Exact integral of `|ℓ|` for a linear `ℓ` with end values `a`, `b` over a
/// span of width `h`.
fn linear_abs_integral(a: f64, b: f64, h: f64) -> f64 {
    if a * b >= 0.0 {
        0.5 * h * (a.abs() + b.abs())
    } else {
        // split at the root
        0.5 * h * (a * a + b * b) / (a.abs() + b.abs())
    }
}

fn table_integral_abs(points: &[(f64, f64)], t0: f64, t1: f64) -> f64 {
    // breakpoints inside (t0, t1) plus the ends
    let mut knots = vec![t0];
    knots.extend(points.iter().map(|&(t, _)| t).filter(|&t| t > t0 && t < t1));
    knots.push(t1);
    knots
        .windows(2)
        .map(|w| linear_abs_integral(table_value(points, w[0]), table_value(points, w[1]), w[1] - w[0]))
        .sum()
}

/// The coefficient pair `(α, γ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub alpha: Schedule,
    #[serde(default)]
    pub gamma: Schedule,
}

impl Coefficients {
    pub fn new(alpha: Schedule, gamma: Schedule) -> Self {
        Coefficients { alpha, gamma }
    }

    /// `α ≡ 1`, `γ ≡ 0`.
    pub fn unit_alpha() -> Self {
        Coefficients::new(Schedule::Constant { value: 1.0 }, Schedule::Zero)
    }

    pub fn zero() -> Self {
        Coefficients::new(Schedule::Zero, Schedule::Zero)
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        self.gamma.validate()
    }

    pub fn at(&self, t: f64) -> (f64, f64) {
        (self.alpha.value(t), self.gamma.value(t))
    }

    /// `|α(t)| + |γ(t)|`.
    pub fn weight(&self, t: f64) -> f64 {
        self.alpha.value(t).abs() + self.gamma.value(t).abs()
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.is_zero() && self.gamma.is_zero()
    }

    /// `A(s, t) = ∫_s^t (|α| + |γ|)`.
    pub fn integral(&self, s: f64, t: f64) -> f64 {
        self.alpha.integral_abs(s, t) + self.gamma.integral_abs(s, t)
    }

    /// `A(0, ∞)`.
    pub fn integral_to_infinity(&self) -> f64 {
        self.alpha.integral_abs_to_infinity() + self.gamma.integral_abs_to_infinity()
    }
}
