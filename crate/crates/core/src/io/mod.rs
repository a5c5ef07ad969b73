//! File formats: the binary trace format plus the CSV/JSON exchange tables.
//!
//! All outputs are deterministic: fixed column order, no timestamps, and
//! shortest-round-trip float formatting, so reruns with identical inputs are
//! byte-identical.

mod tables;
mod trace;

pub use tables::{
    read_areas_csv, write_areas_csv, write_histogram_csv, write_measured_tuning_csv,
    write_theory_tuning_csv, write_truth_csv, CalibrationFile, CalibrationPeakRow,
    LineEstimateFile,
};
pub use trace::{read_trace_file, write_trace_file, TRACE_FORMAT_VERSION, TRACE_MAGIC};
