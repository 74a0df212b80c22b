//! Run configuration, series files, snapshots and run manifests.

mod config;
mod manifest;
mod series;
mod snapshot;

pub use config::{
    load_config, parse_config, CoefficientsSection, Exponent, GridSection, HarnessSection, InitialSection, LpSection,
    ModelForm, ModelSection, OutputSection, RunConfig, TimeSection, OUTPUT_ROOT_VAR,
};
pub use manifest::{simulate, write_json_atomic, RunManifest, MANIFEST_FILE, SERIES_FILE};
pub use series::{format_series, parse_series, read_series, write_series};
pub use snapshot::{grid_text, read_snapshot, write_snapshot, SnapshotFile};
