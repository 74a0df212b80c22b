//! Command-line front end of the `chsys` simulator.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use chsys::harness::{bounds_report, continuity_probe, damping_equivalence, ContinuityConfig};
use chsys::integrate::{friedrichs_iterate, RunStatus};
use chsys::io::{load_config, read_snapshot, simulate, write_json_atomic, RunConfig};
use chsys::lp::probes::{random_corpus, run_probe, Probe};
use chsys::lp::{besov_norm, BesovParams, DyadicFilterBank, FilterKind};
use chsys::model::DampedForm;
use chsys::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "chsys",
    version,
    about = "Pseudospectral solver and analysis harness for the two-component cubic Camassa-Holm system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a configuration and write series, snapshots and manifest.
    Simulate {
        config: PathBuf,
        /// Overrides output.directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the Friedrichs iteration on a configuration.
    Iterate {
        config: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Besov norms of a snapshot.
    Analyze {
        snapshot: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long)]
        p: String,
        #[arg(long)]
        r: String,
        #[arg(long)]
        homogeneous: bool,
    },
    /// Closed-form bounds for a configuration.
    Bounds { config: PathBuf },
    /// Compare the damped reduction with the rescaled nonlocal system.
    Equivalence {
        config: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
    /// Empirical constants of the inequality probes on a random corpus.
    ProbeInequalities {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        n_modes: usize,
        #[arg(long, value_enum, default_value = "smooth")]
        filter: FilterArg,
    },
    /// Distance between solutions started from perturbed data.
    Continuity {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        deltas: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FilterArg {
    Smooth,
    Sharp,
}

impl From<FilterArg> for FilterKind {
    fn from(f: FilterArg) -> Self {
        match f {
            FilterArg::Smooth => FilterKind::Smooth,
            FilterArg::Sharp => FilterKind::Sharp,
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::NonFinite { .. } => EXIT_RUNTIME,
        _ => EXIT_VALIDATION,
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> std::io::Result<()> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    )
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_to(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`dispatch`] with explicit output streams.
pub fn dispatch_to<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_VALIDATION
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn execute(command: Command, out: &mut dyn Write) -> chsys::Result<i32> {
    match command {
        Command::Simulate { config, output } => {
            let cfg = load_config(&config)?;
            let dir = output.unwrap_or_else(|| cfg.output_dir());
            let (result, manifest) = simulate(&cfg, &dir)?;
            writeln!(out, "output: {}", dir.display()).map_err(io_err)?;
            writeln!(out, "steps: {}", manifest.steps).map_err(io_err)?;
            writeln!(out, "final_time: {:.16e}", result.final_time).map_err(io_err)?;
            let code = match &result.status {
                RunStatus::Completed => {
                    writeln!(out, "status: completed").map_err(io_err)?;
                    EXIT_OK
                }
                RunStatus::BlowupDetected { t_star, reason } => {
                    writeln!(out, "status: blowup_detected ({reason:?}) at T* = {t_star:.16e}").map_err(io_err)?;
                    EXIT_BLOWUP
                }
                RunStatus::Aborted { t, message } => {
                    writeln!(out, "status: aborted at t = {t:.16e}: {message}").map_err(io_err)?;
                    EXIT_RUNTIME
                }
            };
            Ok(code)
        }
        Command::Iterate { config, k } => {
            let cfg = load_config(&config)?;
            nonlocal_only(&cfg, "iterate")?;
            let report = friedrichs_iterate(&cfg.initial_state()?, k, &cfg.coefficients(), &cfg.integrator())?;
            writeln!(out, "k,d_sup,f_sup").map_err(io_err)?;
            for r in &report.iterates {
                writeln!(out, "{},{:.16e},{:.16e}", r.k, r.d_sup, r.f_sup).map_err(io_err)?;
            }
            if let Some(k) = report.halted_at {
                writeln!(out, "halted_at: {k}").map_err(io_err)?;
            }
            writeln!(out, "consistency: {:.16e}", report.consistency).map_err(io_err)?;
            let dir = cfg.output_dir();
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            write_json_atomic(&report.iterates, &dir.join("friedrichs.json"))?;
            Ok(if report.halted_at.is_some() {
                EXIT_RUNTIME
            } else {
                EXIT_OK
            })
        }
        Command::Analyze {
            snapshot,
            s,
            p,
            r,
            homogeneous,
        } => {
            let snap = read_snapshot(&snapshot)?;
            let params = BesovParams::from_exponents(
                s,
                chsys::lp::parse_exponent(&p)?,
                chsys::lp::parse_exponent(&r)?,
                homogeneous,
            )?;
            analyze(&snap, params, &snapshot, out)
        }
        Command::Bounds { config } => {
            let cfg = load_config(&config)?;
            let bank = DyadicFilterBank::build(cfg.grid.n_modes, cfg.lp.filter)?;
            let report = bounds_report(
                &cfg.initial_state()?,
                &cfg.bounds_coefficients(),
                &bank,
                &cfg.bounds_params()?,
            )?;
            print_json(out, &report).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Equivalence { config, lambda } => {
            let cfg = load_config(&config)?;
            let initial = cfg.initial_state()?;
            let form = cfg.damped_form().unwrap_or(if initial.m == initial.n {
                DampedForm::Forq
            } else {
                DampedForm::Sqq
            });
            let report = damping_equivalence(&initial, lambda, form, &cfg.integrator())?;
            writeln!(out, "form: {:?}", report.form).map_err(io_err)?;
            writeln!(out, "lambda: {}", report.lambda).map_err(io_err)?;
            writeln!(out, "steps: {}", report.steps).map_err(io_err)?;
            writeln!(out, "max_discrepancy: {:.6e}", report.max_discrepancy).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::ProbeInequalities {
            trials,
            seed,
            n_modes,
            filter,
        } => {
            let bank = DyadicFilterBank::build(n_modes, filter.into())?;
            let corpus = random_corpus(trials, seed, n_modes)?;
            writeln!(out, "probe,c_emp").map_err(io_err)?;
            let mut finite = true;
            for probe in Probe::standard_suite() {
                let report = run_probe(probe, &corpus, &bank)?;
                finite &= report.is_finite();
                writeln!(out, "{},{:.16e}", report.probe.name(), report.c_emp).map_err(io_err)?;
            }
            Ok(if finite { EXIT_OK } else { EXIT_RUNTIME })
        }
        Command::Continuity { config, deltas } => {
            let cfg = load_config(&config)?;
            let report = continuity_probe(
                &cfg.initial_state()?,
                &cfg.dynamics(),
                &cfg.integrator(),
                &ContinuityConfig::new(deltas),
            )?;
            writeln!(out, "delta,distance_weak,distance_strong,flagged").map_err(io_err)?;
            for e in &report.entries {
                writeln!(
                    out,
                    "{:e},{:.16e},{:.16e},{}",
                    e.delta, e.distance_weak, e.distance_strong, e.flagged
                )
                .map_err(io_err)?;
            }
            let fmt = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.6}"));
            writeln!(out, "slope_weak: {}", fmt(report.slope_weak)).map_err(io_err)?;
            writeln!(out, "slope_strong: {}", fmt(report.slope_strong)).map_err(io_err)?;
            Ok(EXIT_OK)
        }
    }
}

fn nonlocal_only(cfg: &RunConfig, what: &str) -> chsys::Result<()> {
    if cfg.damped_form().is_some() {
        return Err(Error::Config(format!("model.form: {what} needs the nonlocal model")));
    }
    Ok(())
}

fn analyze(
    snap: &chsys::integrate::Snapshot,
    params: BesovParams,
    path: &Path,
    out: &mut dyn Write,
) -> chsys::Result<i32> {
    let bank = DyadicFilterBank::build(snap.state.n_modes(), FilterKind::Smooth)?;
    let norm_m = besov_norm(&snap.state.m, params, &bank)?;
    let norm_n = besov_norm(&snap.state.n, params, &bank)?;
    writeln!(out, "snapshot: {}", path.display()).map_err(io_err)?;
    writeln!(out, "t: {:.16e}", snap.t).map_err(io_err)?;
    writeln!(out, "norm_m: {norm_m:.16e}").map_err(io_err)?;
    writeln!(out, "norm_n: {norm_n:.16e}").map_err(io_err)?;
    Ok(EXIT_OK)
}
