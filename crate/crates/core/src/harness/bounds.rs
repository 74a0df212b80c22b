use std::f64::consts::{E, LN_2, SQRT_2};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lp::{besov_norm, BesovParams, DyadicFilterBank, Integrability, Summability, CRITICAL};
use crate::model::{Coefficients, DampedForm, State};

/// Universal constant `C` shared by every bound, with optional per-bound
/// overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default)]
    pub c_lifespan: Option<f64>,
    #[serde(default)]
    pub c_critical: Option<f64>,
    #[serde(default)]
    pub c_noncritical: Option<f64>,
    #[serde(default)]
    pub c_lambda: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl Default for Constants {
    fn default() -> Self {
        Constants::shared(1.0)
    }
}

impl Constants {
    pub fn shared(c: f64) -> Self {
        Constants {
            c,
            c_lifespan: None,
            c_critical: None,
            c_noncritical: None,
            c_lambda: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            Some(self.c),
            self.c_lifespan,
            self.c_critical,
            self.c_noncritical,
            self.c_lambda,
        ];
        if all.iter().flatten().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::config("every constant C must be finite and positive"));
        }
        Ok(())
    }

    pub fn lifespan(&self) -> f64 {
        self.c_lifespan.unwrap_or(self.c)
    }

    pub fn critical(&self) -> f64 {
        self.c_critical.unwrap_or(self.c)
    }

    pub fn noncritical(&self) -> f64 {
        self.c_noncritical.unwrap_or(self.c)
    }

    pub fn lambda(&self) -> f64 {
        self.c_lambda.unwrap_or(self.c)
    }
}

/// `ℏ(x) = (x + 8C³x³A) exp(4C³x²A)`.
pub fn hbar(x: f64, a: f64, c: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let c3 = c * c * c;
    (x + 8.0 * c3 * x * x * x * a) * (4.0 * c3 * x * x * a).exp()
}

/// Bisection for the root of an increasing `g` on `[lo, hi]` with `g(lo) ≤ 0 < g(hi)`.
fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `sup{t ≥ 0 : A(0, t) ≤ threshold}`, `+∞` when `A(0, ∞) ≤ threshold`.
pub fn time_to_reach(coeffs: &Coefficients, threshold: f64) -> f64 {
    if threshold.is_infinite() || coeffs.integral_to_infinity() <= threshold {
        return f64::INFINITY;
    }
    let mut hi = 1.0;
    while coeffs.integral(0.0, hi) <= threshold {
        hi *= 2.0;
    }
    bisect(0.0, hi, |t| coeffs.integral(0.0, t) - threshold)
}

/// Largest admissible coefficient integral `a*` in the lifespan condition,
/// the root of `a · 12C³ ℏ(F₀; a)² = ln 2`.
pub fn lifespan_integral_threshold(f0: f64, c: f64) -> f64 {
    if f0 == 0.0 {
        return f64::INFINITY;
    }
    let g = |a: f64| a * 12.0 * c.powi(3) * hbar(f0, a, c).powi(2) - LN_2;
    let mut hi = LN_2 / (12.0 * c.powi(3) * f0 * f0);
    // g(hi) ≥ 0 since ℏ ≥ F₀; widen defensively anyway
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    bisect(0.0, hi, g)
}

/// Local lifespan `T`: the largest `T` with
/// `A(0,T) ≤ ln 2 / (12 C³ ℏ(F₀)²)`, where `ℏ` is evaluated with `A(0,T)`.
pub fn lifespan_condition(f0: f64, coeffs: &Coefficients, c: f64) -> f64 {
    time_to_reach(coeffs, lifespan_integral_threshold(f0, c))
}

/// Sufficient bound on `A(0, ∞)` for a global solution: `ln 2 / (24 C³ F₀²)`.
pub fn global_sufficient_condition(f0: f64, c: f64) -> f64 {
    if f0 == 0.0 {
        f64::INFINITY
    } else {
        LN_2 / (24.0 * c.powi(3) * f0 * f0)
    }
}

/// `2C ℏ(F₀)`.
pub fn uniform_bound(f0: f64, a: f64, c: f64) -> f64 {
    2.0 * c * hbar(f0, a, c)
}

/// `sup{t : A(0,t) ≤ 1 / (C (‖m₀‖ + ‖n₀‖)²)}` with critical-space norms.
pub fn blowup_lower_bound_critical(norm_m: f64, norm_n: f64, coeffs: &Coefficients, c: f64) -> f64 {
    let s = norm_m + norm_n;
    let threshold = if s == 0.0 { f64::INFINITY } else { 1.0 / (c * s * s) };
    time_to_reach(coeffs, threshold)
}

/// `sup{t : A(0,t) ≤ 1 / (C (√2 e + ‖m₀‖ + ‖n₀‖)⁶)}` with norms in
/// `B^{1/2+ε}_{2,r}`.
pub fn blowup_lower_bound_noncritical(
    norm_m: f64,
    norm_n: f64,
    epsilon: f64,
    coeffs: &Coefficients,
    c: f64,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    let s = SQRT_2 * E + norm_m + norm_n;
    Ok(time_to_reach(coeffs, 1.0 / (c * s.powi(6))))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::config(format!("epsilon = {epsilon} must lie in (0, 1/2)")));
    }
    Ok(())
}

/// Minimal `λ` with `λ ≥ (6C³/ln 2)(x + 4C³x³/λ)² e^{4C³x²/λ}`.
pub fn lambda_threshold(x: f64, c: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let c3 = c.powi(3);
    let rhs = |l: f64| 6.0 * c3 / LN_2 * (x + 4.0 * c3 * x.powi(3) / l).powi(2) * (4.0 * c3 * x * x / l).exp();
    // λ - rhs(λ) is increasing; rhs(λ) > 6C³x²/ln2 bounds the root from below
    let lo = 6.0 * c3 * x * x / LN_2;
    let mut hi = 2.0 * lo;
    while hi - rhs(hi) <= 0.0 {
        hi *= 2.0;
    }
    let g = |l: f64| l - rhs(l);
    // return the upper end so the returned value satisfies the inequality
    let root = bisect(lo, hi, g);
    let mut up = root;
    while g(up) < 0.0 {
        up = f64::from_bits(up.to_bits() + 1);
    }
    up
}

fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn ser_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_f64(x, s),
        None => s.serialize_none(),
    }
}

/// Every closed-form bound for one initial state and schedule. Infinite
/// values serialize as the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub f0: f64,
    pub norm_m: f64,
    pub norm_n: f64,
    pub constants: Constants,
    pub epsilon: f64,
    /// `A(0, ∞)`.
    #[serde(serialize_with = "ser_f64")]
    pub a_total: f64,
    /// `ℏ(F₀)` with the coefficient integral at the lifespan.
    #[serde(serialize_with = "ser_f64")]
    pub hbar_at_f0: f64,
    /// Largest admissible `A(0, T)` in the lifespan condition.
    #[serde(serialize_with = "ser_f64")]
    pub k_threshold: f64,
    #[serde(serialize_with = "ser_f64")]
    pub t_local: f64,
    #[serde(serialize_with = "ser_f64")]
    pub global_threshold: f64,
    pub global_condition_satisfied: bool,
    #[serde(serialize_with = "ser_f64")]
    pub uniform_bound: f64,
    #[serde(serialize_with = "ser_f64")]
    pub t_star_lower_critical: f64,
    #[serde(serialize_with = "ser_f64")]
    pub t_prime_lower_noncritical: f64,
    #[serde(serialize_with = "ser_opt_f64")]
    pub lambda_threshold: Option<f64>,
}

/// Inputs of [`bounds_report`] beyond the state and schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsParams {
    pub constants: Constants,
    pub epsilon: f64,
    pub r: Summability,
    /// Damped reduction being analyzed, if any; enables the `λ` threshold.
    pub damped: Option<DampedForm>,
}

impl Default for BoundsParams {
    fn default() -> Self {
        BoundsParams {
            constants: Constants::default(),
            epsilon: 0.25,
            r: Summability::Two,
            damped: None,
        }
    }
}

pub fn bounds_report(
    initial: &State,
    coeffs: &Coefficients,
    bank: &DyadicFilterBank,
    params: &BoundsParams,
) -> Result<BoundsReport> {
    params.constants.validate()?;
    check_epsilon(params.epsilon)?;
    coeffs.validate()?;
    let norm_m = besov_norm(&initial.m, CRITICAL, bank)?;
    let norm_n = besov_norm(&initial.n, CRITICAL, bank)?;
    let f0 = norm_m + norm_n;
    let fine = BesovParams::new(0.5 + params.epsilon, Integrability::Two, params.r);
    let fine_m = besov_norm(&initial.m, fine, bank)?;
    let fine_n = besov_norm(&initial.n, fine, bank)?;

    let k = &params.constants;
    let a_total = coeffs.integral_to_infinity();
    let k_threshold = lifespan_integral_threshold(f0, k.lifespan());
    let a_at_lifespan = a_total.min(k_threshold);
    let global_threshold = global_sufficient_condition(f0, k.lifespan());
    let lambda = params.damped.map(|form| {
        let x = match form {
            DampedForm::Forq => norm_m,
            DampedForm::Sqq => norm_m + norm_n,
        };
        lambda_threshold(x, k.lambda())
    });
    Ok(BoundsReport {
        f0,
        norm_m,
        norm_n,
        constants: *k,
        epsilon: params.epsilon,
        a_total,
        hbar_at_f0: hbar(f0, a_at_lifespan, k.lifespan()),
        k_threshold,
        t_local: time_to_reach(coeffs, k_threshold),
        global_threshold,
        global_condition_satisfied: a_total <= global_threshold,
        uniform_bound: uniform_bound(f0, a_at_lifespan, k.lifespan()),
        t_star_lower_critical: blowup_lower_bound_critical(norm_m, norm_n, coeffs, k.critical()),
        t_prime_lower_noncritical: blowup_lower_bound_noncritical(
            fine_m,
            fine_n,
            params.epsilon,
            coeffs,
            k.noncritical(),
        )?,
        lambda_threshold: lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Schedule;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn hbar_examples() {
        assert_eq!(hbar(1.0, 0.0, 1.0), 1.0);
        assert_eq!(hbar(0.0, 3.0, 2.0), 0.0);
        assert!(rel(hbar(1.0, 1.0, 1.0), 9.0 * 4f64.exp()) < 1e-15);
        assert_eq!(uniform_bound(1.0, 0.0, 1.0), 2.0);
        assert_eq!(uniform_bound(0.0, 1.0, 1.0), 0.0);
        assert!(rel(uniform_bound(1.0, 1.0, 1.0), 18.0 * 4f64.exp()) < 1e-15);
    }

    #[test]
    fn global_threshold_examples() {
        assert!(rel(global_sufficient_condition(1.0, 1.0), LN_2 / 24.0) < 1e-15);
        assert!(rel(global_sufficient_condition(2.0, 1.0), LN_2 / 96.0) < 1e-15);
        assert_eq!(global_sufficient_condition(0.0, 1.0), f64::INFINITY);
        // ExpDecay: A(0,∞) = amplitude / (2λ), so the condition reads λ ≥ 12 C³ F₀² amplitude / ln 2
        let f0 = 1.3;
        let amp = 0.4;
        let lam_min = 12.0 * f0 * f0 * amp / LN_2;
        for (lam, ok) in [(lam_min * 1.01, true), (lam_min * 0.99, false)] {
            let c = Coefficients::new(
                Schedule::ExpDecay {
                    amplitude: amp,
                    rate: lam,
                },
                Schedule::Zero,
            );
            assert_eq!(c.integral_to_infinity() <= global_sufficient_condition(f0, 1.0), ok);
        }
    }

    #[test]
    fn lifespan_examples() {
        assert_eq!(lifespan_condition(1.0, &Coefficients::zero(), 1.0), f64::INFINITY);
        assert_eq!(lifespan_condition(0.0, &Coefficients::unit_alpha(), 1.0), f64::INFINITY);
        // α ≡ 1 gives A(0,T) = T; check the defining relation directly
        let t = lifespan_condition(1.0, &Coefficients::unit_alpha(), 1.0);
        assert!(rel(t * 12.0 * hbar(1.0, t, 1.0).powi(2), LN_2) < 1e-12);
        assert!(t > 0.0 && t < LN_2 / 12.0);
    }

    #[test]
    fn critical_lower_bound_examples() {
        assert!(
            rel(
                blowup_lower_bound_critical(1.0, 1.0, &Coefficients::unit_alpha(), 1.0),
                0.25
            ) < 1e-14
        );
        assert_eq!(
            blowup_lower_bound_critical(1.0, 1.0, &Coefficients::zero(), 1.0),
            f64::INFINITY
        );
        let decay = Coefficients::new(
            Schedule::ExpDecay {
                amplitude: 1.0,
                rate: 4.0,
            },
            Schedule::Zero,
        );
        assert_eq!(blowup_lower_bound_critical(1.0, 1.0, &decay, 1.0), f64::INFINITY);
    }

    #[test]
    fn noncritical_lower_bound_examples() {
        let zero = blowup_lower_bound_noncritical(0.0, 0.0, 0.25, &Coefficients::unit_alpha(), 1.0).unwrap();
        assert!(rel(zero, 1.0 / (8.0 * 6f64.exp())) < 1e-13);
        assert_eq!(
            blowup_lower_bound_noncritical(1.0, 1.0, 0.25, &Coefficients::zero(), 1.0).unwrap(),
            f64::INFINITY
        );
        let some = blowup_lower_bound_noncritical(0.3, 0.1, 0.25, &Coefficients::unit_alpha(), 1.0).unwrap();
        assert!(some < zero);
        for bad in [0.0, 0.5, -1.0] {
            assert!(blowup_lower_bound_noncritical(0.0, 0.0, bad, &Coefficients::unit_alpha(), 1.0).is_err());
        }
    }

    #[test]
    fn lambda_threshold_examples() {
        assert_eq!(lambda_threshold(0.0, 1.0), 0.0);
        let l = lambda_threshold(1.0, 1.0);
        assert!(l > 16.0 && l < 17.0, "{l}");
        // oracle: the two sides agree at the returned root
        let rhs = 6.0 / LN_2 * (1.0 + 4.0 / l).powi(2) * (4.0 / l).exp();
        assert!(rel(l, rhs) < 1e-12);
        assert!(l >= rhs);
    }

    #[test]
    fn inf_serializes_as_string() {
        let bank = DyadicFilterBank::build(32, crate::lp::FilterKind::Smooth).unwrap();
        let z = State::zeros(32).unwrap();
        let r = bounds_report(&z, &Coefficients::unit_alpha(), &bank, &BoundsParams::default()).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["t_local"], "inf");
        assert_eq!(json["t_star_lower_critical"], "inf");
        assert_eq!(json["uniform_bound"], 0.0);
        assert!(json["lambda_threshold"].is_null());
    }

    proptest! {
        #[test]
        fn hbar_is_monotone(x1 in 0.0..3.0f64, dx in 1e-3..1.0f64, a in 0.0..0.5f64, da in 1e-3..0.5f64) {
            prop_assert!(hbar(x1, a, 1.0) < hbar(x1 + dx, a, 1.0));
            prop_assert!(hbar(x1 + dx, a, 1.0) < hbar(x1 + dx, a + da, 1.0));
            prop_assert!(hbar(x1, a, 1.0) >= x1);
        }

        #[test]
        fn lower_bounds_shrink_with_c_and_norms(c in 0.2..3.0f64, dc in 0.0..1.0f64, x in 0.0..2.0f64, dx in 0.0..1.0f64) {
            let sched = Coefficients::new(Schedule::Constant { value: 0.7 }, Schedule::Table { points: vec![(0.0, 0.0), (1.0, 1.0)] });
            prop_assert!(blowup_lower_bound_critical(x + dx, 0.5, &sched, c) <= blowup_lower_bound_critical(x, 0.5, &sched, c));
            prop_assert!(blowup_lower_bound_critical(x, 0.5, &sched, c + dc) <= blowup_lower_bound_critical(x, 0.5, &sched, c));
            let n1 = blowup_lower_bound_noncritical(x, 0.5, 0.2, &sched, c).unwrap();
            prop_assert!(blowup_lower_bound_noncritical(x + dx, 0.5, 0.2, &sched, c).unwrap() <= n1);
            prop_assert!(blowup_lower_bound_noncritical(x, 0.5, 0.2, &sched, c + dc).unwrap() <= n1);
            prop_assert!(lifespan_condition(x + dx + 0.1, &sched, c) <= lifespan_condition(x + 0.1, &sched, c));
            // pointwise-larger schedule
            let bigger = Coefficients::new(Schedule::Constant { value: 0.9 }, Schedule::Table { points: vec![(0.0, 0.0), (1.0, 1.0)] });
            prop_assert!(blowup_lower_bound_critical(x + 0.1, 0.5, &bigger, c) <= blowup_lower_bound_critical(x + 0.1, 0.5, &sched, c));
        }

        #[test]
        fn global_condition_implies_infinite_lifespan(f0 in 0.05..3.0f64, c in 0.3..2.0f64, frac in 0.0..1.0f64) {
            let budget = global_sufficient_condition(f0, c) * frac;
            // ExpDecay with A(0,∞) = budget
            let rate = 1.0;
            let sched = Coefficients::new(Schedule::ExpDecay { amplitude: 2.0 * rate * budget, rate }, Schedule::Zero);
            prop_assume!(budget > 0.0);
            prop_assert_eq!(lifespan_condition(f0, &sched, c), f64::INFINITY);
        }
    }
}
