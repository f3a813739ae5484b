//! Time-series data model, CSV ingestion, synthetic data and minute
//! alignment.

mod align;
pub(crate) mod csv;
mod manifest;
mod synth;

use thiserror::Error;

use crate::features::FeatureVector;

pub use align::{align_minutes, label_phases, phase_of, MinuteAligner};
pub use csv::{
    parse_accel_csv, parse_hr_csv, write_accel_csv, write_hr_csv, AccelCsvWriter, AccelReader,
    ACCEL_HEADER, HR_HEADER,
};
pub use manifest::{load_manifest_records, Manifest};
pub use synth::{
    synth_stream, synth_write, ActivityRegime, SynthConfig, SynthMinute, SynthStream,
};

/// Lowest accepted heart rate.
pub const MIN_BPM: f64 = 20.0;
/// Highest accepted heart rate.
pub const MAX_BPM: f64 = 250.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected header `{expected}`, found `{found}`")]
    Header {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: not strictly increasing ({prev} then {current})")]
    Ordering { line: usize, prev: u64, current: u64 },
    #[error("line {line}: bpm {bpm} outside [20, 250]")]
    Range { line: usize, bpm: f64 },
    #[error("accelerometer and heart-rate series share no usable minute")]
    EmptyAlignment,
    #[error("invalid synth config: {0}")]
    Config(String),
    #[error("manifest: {0}")]
    Manifest(String),
}

/// One tri-axial reading, in g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelSample {
    pub t_ms: u64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// One per-minute heart-rate reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrSample {
    pub minute_index: u64,
    pub bpm: f64,
}

/// Time-aligned features and (optionally) the measured heart rate of one
/// minute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinuteRecord {
    pub minute_index: u64,
    pub features: FeatureVector,
    pub bpm: Option<f64>,
    pub phase: u32,
}

pub(crate) fn check_bpm(bpm: f64, line: usize) -> Result<(), IngestError> {
    if bpm_in_range(bpm) {
        Ok(())
    } else {
        Err(IngestError::Range { line, bpm })
    }
}

/// Physiological guard applied to every heart-rate value.
pub fn bpm_in_range(bpm: f64) -> bool {
    (MIN_BPM..=MAX_BPM).contains(&bpm)
}
