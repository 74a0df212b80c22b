use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::Snapshot;
use crate::model::State;
use crate::spectral::{to_grid, SpectralField};

/// On-disk snapshot: spectral coefficients in FFT order as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotFile {
    pub step: usize,
    pub t: f64,
    pub shift: f64,
    pub n_modes: usize,
    pub m: Vec<[f64; 2]>,
    pub n: Vec<[f64; 2]>,
}

fn pairs(f: &SpectralField) -> Vec<[f64; 2]> {
    f.coeffs().iter().map(|c| [c.re, c.im]).collect()
}

fn field(pairs: &[[f64; 2]]) -> Result<SpectralField> {
    SpectralField::from_coeffs(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
}

impl SnapshotFile {
    pub fn from_snapshot(s: &Snapshot) -> Self {
        SnapshotFile {
            step: s.step,
            t: s.t,
            shift: s.shift,
            n_modes: s.state.n_modes(),
            m: pairs(&s.state.m),
            n: pairs(&s.state.n),
        }
    }

    pub fn to_snapshot(&self) -> Result<Snapshot> {
        if self.m.len() != self.n_modes || self.n.len() != self.n_modes {
            return Err(Error::Shape {
                left: self.m.len().max(self.n.len()),
                right: self.n_modes,
            });
        }
        Ok(Snapshot {
            step: self.step,
            t: self.t,
            shift: self.shift,
            state: State::new(field(&self.m)?, field(&self.n)?)?,
        })
    }
}

/// Grid rendering: one `x m n` line per grid point.
pub fn grid_text(s: &Snapshot) -> String {
    let m = to_grid(&s.state.m);
    let n = to_grid(&s.state.n);
    let mut out = format!("# t = {:.16e}\n# x m n\n", s.t);
    for (j, (a, b)) in m.values().iter().zip(n.values()).enumerate() {
        writeln!(out, "{:.16e} {a:.16e} {b:.16e}", m.x(j)).expect("writing to a String");
    }
    out
}

/// Writes `snapshot_<step>.json` and `snapshot_<step>.txt` into `dir` and
/// returns the JSON path.
pub fn write_snapshot(s: &Snapshot, dir: &Path) -> Result<PathBuf> {
    let json_path = dir.join(format!("snapshot_{:06}.json", s.step));
    let text_path = dir.join(format!("snapshot_{:06}.txt", s.step));
    let json = serde_json::to_string(&SnapshotFile::from_snapshot(s)).expect("snapshot serializes");
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    std::fs::write(&text_path, grid_text(s)).map_err(|e| Error::io(&text_path, e))?;
    Ok(json_path)
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: SnapshotFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    file.to_snapshot()
}
