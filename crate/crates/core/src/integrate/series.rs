use serde::{Deserialize, Serialize};

/// Column names of the series file, in order.
pub const SERIES_HEADER: [&str; 16] = [
    "t",
    "mass_m",
    "mass_n",
    "psi_bar",
    "B12_21_m",
    "B12_21_n",
    "hB0_inf1_m",
    "hB0_inf1_n",
    "hB0_inf2_m",
    "hB0_inf2_n",
    "Linf_m",
    "Linf_n",
    "dt",
    "tail_ratio",
    "blowup_integral_thm15",
    "blowup_integral_thm17",
];

/// One diagnostics record.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub mass_m: f64,
    pub mass_n: f64,
    pub psi_bar: f64,
    /// `‖m‖_{B^{1/2}_{2,1}}`.
    pub b12_21_m: f64,
    pub b12_21_n: f64,
    /// `‖m‖_{Ḃ^0_{∞,1}}`.
    pub hb0_inf1_m: f64,
    pub hb0_inf1_n: f64,
    /// `‖m‖_{Ḃ^0_{∞,2}}`.
    pub hb0_inf2_m: f64,
    pub hb0_inf2_n: f64,
    pub linf_m: f64,
    pub linf_n: f64,
    /// Step that produced this record; 0 for the initial record.
    pub dt: f64,
    pub tail_ratio: f64,
    /// `∫_0^t (|α|+|γ|)(‖m‖²_{Ḃ^0_{∞,1}} + ‖n‖²_{Ḃ^0_{∞,1}})`.
    pub blowup_integral_critical: f64,
    /// Same with `Ḃ^0_{∞,2}`.
    pub blowup_integral_noncritical: f64,
}

impl SeriesRow {
    pub fn to_array(&self) -> [f64; 16] {
        [
            self.t,
            self.mass_m,
            self.mass_n,
            self.psi_bar,
            self.b12_21_m,
            self.b12_21_n,
            self.hb0_inf1_m,
            self.hb0_inf1_n,
            self.hb0_inf2_m,
            self.hb0_inf2_n,
            self.linf_m,
            self.linf_n,
            self.dt,
            self.tail_ratio,
            self.blowup_integral_critical,
            self.blowup_integral_noncritical,
        ]
    }

    pub fn from_array(a: [f64; 16]) -> Self {
        SeriesRow {
            t: a[0],
            mass_m: a[1],
            mass_n: a[2],
            psi_bar: a[3],
            b12_21_m: a[4],
            b12_21_n: a[5],
            hb0_inf1_m: a[6],
            hb0_inf1_n: a[7],
            hb0_inf2_m: a[8],
            hb0_inf2_n: a[9],
            linf_m: a[10],
            linf_n: a[11],
            dt: a[12],
            tail_ratio: a[13],
            blowup_integral_critical: a[14],
            blowup_integral_noncritical: a[15],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub rows: Vec<SeriesRow>,
}

impl TimeSeries {
    pub fn new() -> Self {
        TimeSeries::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&SeriesRow> {
        self.rows.last()
    }

    /// Appends a row; rows must have strictly increasing `t`.
    pub fn push(&mut self, row: SeriesRow) {
        debug_assert!(self.rows.last().is_none_or(|r| r.t < row.t));
        self.rows.push(row);
    }

    pub fn column(&self, f: impl Fn(&SeriesRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}
