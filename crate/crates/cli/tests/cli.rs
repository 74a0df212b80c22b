use std::path::{Path, PathBuf};

use chsys_cli::{dispatch_to, EXIT_BLOWUP, EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn chsys(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("chsys").chain(args.iter().copied());
    let code = dispatch_to(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    let text = format!(
        "{body}\n[output]\ndirectory = {:?}\n",
        dir.join("out").display().to_string()
    );
    std::fs::write(&path, text).unwrap();
    path
}

const ZERO: &str = r#"
[grid]
n_modes = 32

[time]
t_end = 0.1
dt_max = 0.01

[initial.m]
kind = "fourier_modes"

[initial.n]
kind = "fourier_modes"
"#;

const STANDARD: &str = r#"
[grid]
n_modes = 256

[time]
t_end = 1.0
dt_max = 0.01

[initial.m]
kind = "poisson_kernel"
amplitude = 1.0
radius = 0.7

[initial.n]
kind = "poisson_kernel"
amplitude = 1.0
radius = 0.7
center = 0.3
"#;

const BLOWUP: &str = r#"
[grid]
n_modes = 64

[time]
t_end = 1.0
dt_max = 0.01

[initial.m]
kind = "poisson_kernel"
amplitude = 2.0
radius = 0.7

[initial.n]
kind = "poisson_kernel"
amplitude = 2.0
radius = 0.7
center = 0.3
"#;

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn bounds_on_zero_data_hit_the_trivial_cases() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.toml", ZERO);
    let o = chsys(&["bounds", p(&cfg)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let report: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(report["f0"], 0.0);
    assert_eq!(report["t_local"], "inf");
    assert_eq!(report["global_threshold"], "inf");
    assert_eq!(report["global_condition_satisfied"], true);
    assert_eq!(report["t_star_lower_critical"], "inf");
    assert_eq!(report["uniform_bound"], 0.0);
    assert_eq!(report["hbar_at_f0"], 0.0);
    // the noncritical bound keeps the √2 e offset
    let t = report["t_prime_lower_noncritical"].as_f64().unwrap();
    assert!((t - 0.1f64.min(1.0 / (8.0 * 6f64.exp()))).abs() < 1e-15);
}

#[test]
fn simulate_on_zero_data_writes_an_all_zero_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.toml", ZERO);
    let out = dir.path().join("run");
    let o = chsys(&["simulate", p(&cfg), "--output", p(&out)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let series = chsys::io::read_series(&out.join("series.csv")).unwrap();
    assert_eq!(series.len(), 11);
    for row in &series.rows {
        let a = row.to_array();
        // every column except t and dt vanishes
        assert!(
            a.iter().enumerate().all(|(i, v)| i == 0 || i == 12 || *v == 0.0),
            "{a:?}"
        );
    }
    assert!(out.join("manifest.json").exists());
    assert!(out.join("snapshot_000000.json").exists());
    assert!(out.join("snapshot_000010.json").exists());
    assert!(out.join("snapshot_000010.txt").exists());
}

#[test]
fn blowup_exits_with_three_and_still_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "blowup.toml", BLOWUP);
    let out = dir.path().join("run");
    let o = chsys(&["simulate", p(&cfg), "--output", p(&out)]);
    assert_eq!(o.code, EXIT_BLOWUP, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.contains("blowup_detected"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"]["status"], "blowup_detected");
    let t_star = manifest["t_star_numerical"].as_f64().unwrap();
    assert!(t_star > 0.1 && t_star < 1.0, "{t_star}");
    let snapshots = manifest["snapshots"].as_array().unwrap();
    assert!(snapshots.len() >= 2);
    for s in snapshots {
        assert!(out.join(s.as_str().unwrap()).exists());
    }
    // the series ends at the step that tripped the monitor
    let series = chsys::io::read_series(&out.join("series.csv")).unwrap();
    assert!(series.last().unwrap().tail_ratio > 1e-3);
}

#[test]
fn identical_configs_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{}\n[coefficients]\ngamma = {{ kind = \"constant\", value = 0.1 }}\n",
        ZERO.replace(
            "kind = \"fourier_modes\"\n\n[initial.n]",
            "kind = \"random_band_limited\"\nmax_mode = 5\namplitude = 0.4\nrng_seed = 3\n\n[initial.n]"
        )
    );
    let cfg = write_config(dir.path(), "det.toml", &body);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(chsys(&["simulate", p(&cfg), "--output", p(&a)]).code, EXIT_OK);
    assert_eq!(chsys(&["simulate", p(&cfg), "--output", p(&b)]).code, EXIT_OK);
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read(&a, "series.csv"), read(&b, "series.csv"));
    assert_eq!(read(&a, "snapshot_000010.json"), read(&b, "snapshot_000010.json"));
    let strip = |d: &Path| {
        let mut v: serde_json::Value = serde_json::from_slice(&read(d, "manifest.json")).unwrap();
        let obj = v.as_object_mut().unwrap();
        obj.remove("started_at");
        obj.remove("finished_at");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn equivalence_on_the_standard_case() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "std.toml", STANDARD);
    let o = chsys(&["equivalence", p(&cfg), "--lambda", "1"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let line = o.stdout.lines().find(|l| l.starts_with("max_discrepancy:")).unwrap();
    let value: f64 = line.split(':').nth(1).unwrap().trim().parse().unwrap();
    assert!(value < 1e-6, "{value}");
    assert!(o.stdout.contains("Sqq"));
}

#[test]
fn invalid_configs_exit_with_one_and_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &ZERO.replace("n_modes = 32", "n_modes = 30"));
    let o = chsys(&["simulate", p(&cfg)]);
    assert_eq!(o.code, EXIT_VALIDATION);
    assert!(o.stderr.contains("grid.n_modes"), "{}", o.stderr);

    let cfg = write_config(
        dir.path(),
        "damped.toml",
        &format!("{ZERO}\n[model]\nform = \"damped_forq\"\n"),
    );
    let o = chsys(&["bounds", p(&cfg)]);
    assert_eq!(o.code, EXIT_VALIDATION);
    assert!(o.stderr.contains("model.lambda"), "{}", o.stderr);

    let o = chsys(&["bounds", p(&dir.path().join("missing.toml"))]);
    assert_eq!(o.code, EXIT_RUNTIME);
    assert!(o.stderr.contains("missing.toml"));
}

#[test]
fn malformed_invocations_print_usage() {
    let o = chsys(&["iterate"]);
    assert_eq!(o.code, EXIT_VALIDATION);
    assert!(o.stderr.contains("Usage"), "{}", o.stderr);
    let o = chsys(&["frobnicate"]);
    assert_eq!(o.code, EXIT_VALIDATION);
    let o = chsys(&["--help"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("probe-inequalities"));
}

#[test]
fn analyze_reads_a_written_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cos.toml",
        &ZERO.replacen(
            "kind = \"fourier_modes\"",
            "kind = \"cosine\"\nwavenumber = 1\namplitude = 1.0",
            1,
        ),
    );
    let out = dir.path().join("run");
    assert_eq!(chsys(&["simulate", p(&cfg), "--output", p(&out)]).code, EXIT_OK);
    let snap = out.join("snapshot_000000.json");
    let o = chsys(&["analyze", p(&snap), "--s", "0.5", "--p", "2", "--r", "1"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let norm = |key: &str| -> f64 {
        o.stdout
            .lines()
            .find(|l| l.starts_with(key))
            .unwrap()
            .split(':')
            .nth(1)
            .unwrap()
            .trim()
            .parse()
            .unwrap()
    };
    // mode 1 is shared by the blocks q = -1 and q = 0 of the smooth bank
    let bank = chsys::lp::DyadicFilterBank::build(32, chsys::lp::FilterKind::Smooth).unwrap();
    let (low, high) = (bank.weight(-1, 1), bank.weight(0, 1));
    let expected = (0.5f64.sqrt() * low + high) * 0.5f64.sqrt();
    assert!(
        (norm("norm_m") - expected).abs() < 1e-12,
        "{} vs {expected}",
        norm("norm_m")
    );
    assert_eq!(norm("norm_n"), 0.0);
    let o = chsys(&[
        "analyze",
        p(&snap),
        "--s",
        "-0.5",
        "--p",
        "inf",
        "--r",
        "inf",
        "--homogeneous",
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let o = chsys(&["analyze", p(&snap), "--s", "0", "--p", "3", "--r", "1"]);
    assert_eq!(o.code, EXIT_VALIDATION);
}

#[test]
fn probe_inequalities_report_every_probe() {
    let o = chsys(&["probe-inequalities", "--trials", "20", "--seed", "5"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    for name in ["moser", "endpoint", "log_interp", "real_interp", "commutator"] {
        assert!(o.stdout.lines().any(|l| l.starts_with(name)), "{name}: {}", o.stdout);
    }
}

#[test]
fn continuity_and_iterate_run_on_small_cases() {
    let dir = tempfile::tempdir().unwrap();
    let body = STANDARD
        .replace("n_modes = 256", "n_modes = 64")
        .replace("t_end = 1.0", "t_end = 0.2");
    let cfg = write_config(dir.path(), "small.toml", &body);
    let o = chsys(&["continuity", p(&cfg), "--deltas", "1e-2,1e-3,1e-4"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.stdout.lines().filter(|l| l.ends_with("false")).count(), 3);
    let slope: f64 = o.stdout.lines().find(|l| l.starts_with("slope_weak")).unwrap()[11..]
        .trim()
        .parse()
        .unwrap();
    assert!((slope - 1.0).abs() < 0.1, "{slope}");

    let o = chsys(&["iterate", p(&cfg), "--k", "6"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.stdout.lines().filter(|l| l.contains(',')).count(), 7);
    assert!(dir.path().join("out").join("friedrichs.json").exists());
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            chsys::io::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 3);
}
