use chsys::io::{parse_config, read_series, read_snapshot, simulate, MANIFEST_FILE, SERIES_FILE};

const CONFIG: &str = r#"
[grid]
n_modes = 64

[time]
t_end = 0.2
dt_max = 0.01
series_every = 3
snapshot_every = 7

[coefficients]
alpha = { kind = "exp_decay", amplitude = 1.0, rate = 1.0 }
gamma = { kind = "constant", value = 0.2 }

[initial.m]
kind = "gaussian_bump"
center = 0.4
width = 0.08
amplitude = 0.5

[initial.n]
kind = "random_band_limited"
max_mode = 6
amplitude = 0.4
rng_seed = 21
"#;

#[test]
fn run_directory_holds_series_snapshots_and_manifest() {
    let cfg = parse_config(CONFIG).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (result, manifest) = simulate(&cfg, dir.path()).unwrap();
    assert_eq!(read_series(&dir.path().join(SERIES_FILE)).unwrap(), result.series);
    // records every third step plus the final one
    let steps = result.steps.len();
    assert_eq!(result.series.len(), 1 + steps / 3 + usize::from(steps % 3 != 0));
    let first = read_snapshot(&dir.path().join(&manifest.snapshots[0])).unwrap();
    let last = read_snapshot(&dir.path().join(manifest.snapshots.last().unwrap())).unwrap();
    assert_eq!(first.t, 0.0);
    assert_eq!(last.state, result.final_state);
    assert_eq!(last.t, result.final_time);
    assert_eq!(manifest.steps, steps);
    let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["config"]["grid"]["n_modes"], 64);
    assert_eq!(json["status"]["status"], "completed");
    assert!(json["bounds"]["t_star_lower_critical"].is_number());
    assert!(!dir.path().join("manifest.json.tmp").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = parse_config(CONFIG).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    simulate(&cfg, a.path()).unwrap();
    simulate(&cfg, b.path()).unwrap();
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        if name == MANIFEST_FILE {
            continue;
        }
        assert_eq!(
            std::fs::read(a.path().join(&name)).unwrap(),
            std::fs::read(b.path().join(&name)).unwrap(),
            "{name:?}"
        );
    }
}
