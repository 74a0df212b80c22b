use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::integrate::{SeriesRow, TimeSeries, SERIES_HEADER};

/// Renders a series as CSV with 17 significant digits per value.
pub fn format_series(ts: &TimeSeries) -> String {
    let mut out = SERIES_HEADER.join(",");
    out.push('\n');
    for row in &ts.rows {
        for (i, v) in row.to_array().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn parse_series(text: &str, path: &Path) -> Result<TimeSeries> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
    if header.split(',').ne(SERIES_HEADER.iter().copied()) {
        return Err(parse_err(1, format!("unexpected header `{header}`")));
    }
    let mut ts = TimeSeries::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != SERIES_HEADER.len() {
            return Err(parse_err(
                i + 2,
                format!("expected {} columns, found {}", SERIES_HEADER.len(), fields.len()),
            ));
        }
        let mut values = [0.0; 16];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field
                .parse()
                .map_err(|_| parse_err(i + 2, format!("not a number: `{field}`")))?;
        }
        ts.rows.push(SeriesRow::from_array(values));
    }
    Ok(ts)
}

pub fn write_series(ts: &TimeSeries, path: &Path) -> Result<()> {
    std::fs::write(path, format_series(ts)).map_err(|e| Error::io(path, e))
}

pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series(&text, path)
}
