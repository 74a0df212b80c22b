use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{BoundsParams, Constants};
use crate::integrate::{Dynamics, IntegratorConfig, MonitorConfig};
use crate::lp::{parse_exponent, FilterKind, Summability};
use crate::model::{initial_state, Coefficients, DampedForm, InitialSpec, Schedule, State, TransportForm};

/// Environment variable holding the root for relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "CHSYS_OUTPUT_ROOT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub dt_max: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "one")]
    pub series_every: usize,
    /// 0 keeps only the initial and final snapshots.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default = "yes")]
    pub dealias: bool,
}

fn default_cfl() -> f64 {
    0.4
}

fn default_dt_min() -> f64 {
    1e-9
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelForm {
    #[default]
    Nonlocal,
    DampedForq,
    DampedSqq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub form: ModelForm,
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Discretization of the transport term for the nonlocal system.
    #[serde(default)]
    pub transport: TransportForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSection {
    #[serde(default = "unit")]
    pub alpha: Schedule,
    #[serde(default)]
    pub gamma: Schedule,
}

fn unit() -> Schedule {
    Schedule::Constant { value: 1.0 }
}

impl Default for CoefficientsSection {
    fn default() -> Self {
        CoefficientsSection {
            alpha: unit(),
            gamma: Schedule::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub m: InitialSpec,
    pub n: InitialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LpSection {
    #[serde(default)]
    pub filter: FilterKind,
}

/// A Besov exponent written as a number or as `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Number(f64),
    Text(String),
}

impl Exponent {
    pub fn value(&self) -> Result<f64> {
        match self {
            Exponent::Number(v) => Ok(*v),
            Exponent::Text(t) => parse_exponent(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessSection {
    #[serde(default = "unit_c", rename = "constant_C", alias = "constant_c")]
    pub constant_c: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_r")]
    pub r: Exponent,
    #[serde(default)]
    pub c_lifespan: Option<f64>,
    #[serde(default)]
    pub c_critical: Option<f64>,
    #[serde(default)]
    pub c_noncritical: Option<f64>,
    #[serde(default)]
    pub c_lambda: Option<f64>,
}

fn unit_c() -> f64 {
    1.0
}

fn default_epsilon() -> f64 {
    0.25
}

fn default_r() -> Exponent {
    Exponent::Number(2.0)
}

impl Default for HarnessSection {
    fn default() -> Self {
        HarnessSection {
            constant_c: unit_c(),
            epsilon: default_epsilon(),
            r: default_r(),
            c_lifespan: None,
            c_critical: None,
            c_noncritical: None,
            c_lambda: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Relative paths resolve against `$CHSYS_OUTPUT_ROOT`, else the working directory.
    #[serde(default)]
    pub directory: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub time: TimeSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub coefficients: CoefficientsSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub lp: LpSection,
    #[serde(default)]
    pub harness: HarnessSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub monitor: MonitorConfig,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            form: ModelForm::Nonlocal,
            lambda: None,
            transport: TransportForm::Divergence,
        }
    }
}

/// Parses and validates a TOML run configuration. Every error message
/// starts with the dotted path of the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::config(e.to_string()))?;
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::config(format!("{path}: {}", inner.message()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn positive(errors: &mut Vec<String>, path: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        errors.push(format!("{path}: must be finite and positive, got {v}"));
    }
}

impl RunConfig {
    /// Checks every semantic constraint and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        let n = self.grid.n_modes;
        if n < 32 || !n.is_multiple_of(2) {
            errors.push(format!("grid.n_modes: must be even and at least 32, got {n}"));
        }
        let t = &self.time;
        positive(&mut errors, "time.t_end", t.t_end);
        positive(&mut errors, "time.dt_max", t.dt_max);
        positive(&mut errors, "time.dt_min", t.dt_min);
        if !(t.cfl > 0.0 && t.cfl <= 1.0) {
            errors.push(format!("time.cfl: must lie in (0, 1], got {}", t.cfl));
        }
        if t.dt_min >= t.dt_max {
            errors.push("time.dt_min: must be smaller than time.dt_max".into());
        }
        if t.series_every == 0 {
            errors.push("time.series_every: must be at least 1".into());
        }
        match (self.model.form, self.model.lambda) {
            (ModelForm::Nonlocal, _) => {}
            (_, None) => errors.push("model.lambda: required for damped models".into()),
            (_, Some(l)) if !(l.is_finite() && l >= 0.0) => {
                errors.push(format!("model.lambda: must be finite and nonnegative, got {l}"))
            }
            _ => {}
        }
        for (path, s) in [
            ("coefficients.alpha", &self.coefficients.alpha),
            ("coefficients.gamma", &self.coefficients.gamma),
        ] {
            if let Err(e) = s.validate() {
                errors.push(format!("{path}: {e}"));
            }
        }
        if n >= 2 {
            for (path, spec) in [("initial.m", &self.initial.m), ("initial.n", &self.initial.n)] {
                if let Err(e) = spec.validate(n) {
                    errors.push(format!("{path}: {e}"));
                }
            }
        }
        let h = &self.harness;
        positive(&mut errors, "harness.constant_C", h.constant_c);
        for (path, c) in [
            ("harness.c_lifespan", h.c_lifespan),
            ("harness.c_critical", h.c_critical),
            ("harness.c_noncritical", h.c_noncritical),
            ("harness.c_lambda", h.c_lambda),
        ] {
            if let Some(c) = c {
                positive(&mut errors, path, c);
            }
        }
        if !(h.epsilon > 0.0 && h.epsilon < 0.5) {
            errors.push(format!("harness.epsilon: must lie in (0, 1/2), got {}", h.epsilon));
        }
        if let Err(e) = h.r.value().and_then(Summability::from_f64) {
            errors.push(format!("harness.r: {e}"));
        }
        let mon = &self.monitor;
        positive(&mut errors, "monitor.linf_threshold", mon.linf_threshold);
        positive(&mut errors, "monitor.tail_ratio_threshold", mon.tail_ratio_threshold);
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::config(errors.join("; ")))
        }
    }

    pub fn initial_state(&self) -> Result<State> {
        initial_state(&self.initial.m, &self.initial.n, self.grid.n_modes)
    }

    pub fn coefficients(&self) -> Coefficients {
        Coefficients::new(self.coefficients.alpha.clone(), self.coefficients.gamma.clone())
    }

    pub fn damped_form(&self) -> Option<DampedForm> {
        match self.model.form {
            ModelForm::Nonlocal => None,
            ModelForm::DampedForq => Some(DampedForm::Forq),
            ModelForm::DampedSqq => Some(DampedForm::Sqq),
        }
    }

    pub fn dynamics(&self) -> Dynamics {
        match self.damped_form() {
            None => Dynamics::Nonlocal {
                coeffs: self.coefficients(),
                form: self.model.transport,
                frame_velocity: 0.0,
            },
            Some(form) => Dynamics::Damped {
                lambda: self.model.lambda.unwrap_or(0.0),
                form,
            },
        }
    }

    /// The nonlocal schedule whose bounds apply: the configured one, or
    /// `α = e^{-2λt}`, `γ = 0` for damped models.
    pub fn bounds_coefficients(&self) -> Coefficients {
        match self.damped_form() {
            None => self.coefficients(),
            Some(_) => crate::harness::equivalent_coefficients(self.model.lambda.unwrap_or(0.0)),
        }
    }

    pub fn integrator(&self) -> IntegratorConfig {
        let t = &self.time;
        IntegratorConfig {
            t_end: t.t_end,
            cfl: t.cfl,
            dt_max: t.dt_max,
            dt_min: t.dt_min,
            dealias: t.dealias,
            series_every: t.series_every,
            snapshot_every: t.snapshot_every,
            filter: self.lp.filter,
            monitor: self.monitor,
        }
    }

    pub fn bounds_params(&self) -> Result<BoundsParams> {
        let h = &self.harness;
        Ok(BoundsParams {
            constants: Constants {
                c: h.constant_c,
                c_lifespan: h.c_lifespan,
                c_critical: h.c_critical,
                c_noncritical: h.c_noncritical,
                c_lambda: h.c_lambda,
            },
            epsilon: h.epsilon,
            r: Summability::from_f64(h.r.value()?)?,
            damped: self.damped_form(),
        })
    }

    /// Output directory with relative paths resolved against `root`.
    pub fn output_dir_in(&self, root: Option<&Path>) -> PathBuf {
        let dir = self
            .output
            .directory
            .clone()
            .unwrap_or_else(|| PathBuf::from("chsys-run"));
        match root {
            Some(root) if dir.is_relative() => root.join(dir),
            _ => dir,
        }
    }

    /// Output directory resolved against `$CHSYS_OUTPUT_ROOT`.
    pub fn output_dir(&self) -> PathBuf {
        let root = std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from);
        self.output_dir_in(root.as_deref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[grid]
n_modes = 64

[time]
t_end = 0.5
dt_max = 0.01

[initial.m]
kind = "cosine"
wavenumber = 1
amplitude = 0.5

[initial.n]
kind = "fourier_modes"
"#;

    fn err(text: &str) -> String {
        parse_config(text).unwrap_err().to_string()
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.time.cfl, 0.4);
        assert_eq!(c.time.dt_min, 1e-9);
        assert!(c.time.dealias);
        assert_eq!(c.time.series_every, 1);
        assert_eq!(c.model.form, ModelForm::Nonlocal);
        assert_eq!(c.coefficients.alpha, Schedule::Constant { value: 1.0 });
        assert_eq!(c.coefficients.gamma, Schedule::Zero);
        assert_eq!(c.lp.filter, FilterKind::Smooth);
        assert_eq!(c.harness.constant_c, 1.0);
        assert_eq!(c.harness.epsilon, 0.25);
        assert_eq!(c.monitor, MonitorConfig::default());
    }

    #[test]
    fn small_grid_names_the_path() {
        let e = err(&MINIMAL.replace("n_modes = 64", "n_modes = 30"));
        assert!(e.contains("grid.n_modes"), "{e}");
        let e = err(&MINIMAL.replace("n_modes = 64", "n_modes = 33"));
        assert!(e.contains("grid.n_modes"), "{e}");
    }

    #[test]
    fn damped_without_lambda_names_the_path() {
        let e = err(&format!("{MINIMAL}\n[model]\nform = \"damped_forq\"\n"));
        assert!(e.contains("model.lambda"), "{e}");
        let ok = parse_config(&format!("{MINIMAL}\n[model]\nform = \"damped_sqq\"\nlambda = 1.0\n")).unwrap();
        assert_eq!(ok.damped_form(), Some(DampedForm::Sqq));
    }

    #[test]
    fn unknown_and_mistyped_keys_name_the_path() {
        let e = err(&MINIMAL.replace("dt_max = 0.01", "dt_max = 0.01\ncolour = 1"));
        assert!(e.contains("time") && e.contains("colour"), "{e}");
        let e = err(&MINIMAL.replace("t_end = 0.5", "t_end = \"soon\""));
        assert!(e.contains("time.t_end"), "{e}");
        let e = err(&MINIMAL.replace("[time]\nt_end = 0.5\n", "[time]\n"));
        assert!(e.contains("t_end"), "{e}");
        let e = err(&MINIMAL.replace("amplitude = 0.5", "amplitude = 0.5\nwidth = 2"));
        assert!(e.contains("initial.m"), "{e}");
    }

    #[test]
    fn reports_several_errors_at_once() {
        let text = MINIMAL
            .replace("n_modes = 64", "n_modes = 16")
            .replace("dt_max = 0.01", "dt_max = -1.0");
        let e = err(&text);
        assert!(e.contains("grid.n_modes") && e.contains("time.dt_max"), "{e}");
    }

    #[test]
    fn harness_exponent_and_overrides() {
        let text = format!("{MINIMAL}\n[harness]\nconstant_C = 2.0\nr = \"inf\"\nc_critical = 0.5\n");
        let c = parse_config(&text).unwrap();
        let p = c.bounds_params().unwrap();
        assert_eq!(p.r, Summability::Infinity);
        assert_eq!(p.constants.critical(), 0.5);
        assert_eq!(p.constants.lifespan(), 2.0);
        let e = err(&format!("{MINIMAL}\n[harness]\nepsilon = 0.7\n"));
        assert!(e.contains("harness.epsilon"), "{e}");
        let e = err(&format!("{MINIMAL}\n[harness]\nr = 3\n"));
        assert!(e.contains("harness.r"), "{e}");
    }

    #[test]
    fn output_directory_resolution() {
        let mut c = parse_config(MINIMAL).unwrap();
        c.output.directory = Some(PathBuf::from("a/b"));
        assert_eq!(
            c.output_dir_in(Some(Path::new("/root/x"))),
            PathBuf::from("/root/x/a/b")
        );
        c.output.directory = Some(PathBuf::from("/abs"));
        assert_eq!(c.output_dir_in(Some(Path::new("/root/x"))), PathBuf::from("/abs"));
    }

    #[test]
    fn round_trips_through_toml() {
        let c = parse_config(MINIMAL).unwrap();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
    }
}
