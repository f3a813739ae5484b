use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::align::{label_phases, MinuteAligner};
use super::csv::{parse_hr_csv, AccelReader};
use super::synth::SynthConfig;
use super::{IngestError, MinuteRecord};

/// Describes a generated dataset; file names are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub config: SynthConfig,
    pub accel_file: String,
    pub hr_file: String,
    /// First minute of every phase, ascending.
    pub phase_boundaries: Vec<u64>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let m: Manifest =
            serde_json::from_str(text).map_err(|e| IngestError::Manifest(e.to_string()))?;
        m.config.validate()?;
        if !m.phase_boundaries.windows(2).all(|w| w[0] < w[1]) {
            return Err(IngestError::Manifest(
                "phase_boundaries must be strictly increasing".into(),
            ));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn sibling(manifest: &Path, file: &str) -> PathBuf {
    manifest
        .parent()
        .map_or_else(|| PathBuf::from(file), |d| d.join(file))
}

/// Reads a manifest and its CSVs, returning phase-labelled minute records.
/// The acceleration file is streamed, never held in memory.
pub fn load_manifest_records(path: &Path) -> Result<(Manifest, Vec<MinuteRecord>), IngestError> {
    let manifest = Manifest::load(path)?;
    let hr = parse_hr_csv(BufReader::new(File::open(sibling(path, &manifest.hr_file))?))?;
    let accel = AccelReader::new(BufReader::with_capacity(
        1 << 20,
        File::open(sibling(path, &manifest.accel_file))?,
    ))?;
    let mut aligner = MinuteAligner::new(&hr, manifest.config.sample_rate_hz);
    let mut records = Vec::new();
    for s in accel {
        records.extend(aligner.push(s?));
    }
    records.extend(aligner.finish());
    if records.is_empty() {
        return Err(IngestError::EmptyAlignment);
    }
    label_phases(&mut records, &manifest.phase_boundaries);
    Ok((manifest, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_key_names() {
        let m = Manifest {
            config: SynthConfig::default(),
            accel_file: "a.csv".into(),
            hr_file: "h.csv".into(),
            phase_boundaries: vec![0, 1000],
        };
        let text = m.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["config", "accel_file", "hr_file", "phase_boundaries"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(Manifest::from_json(&text).unwrap(), m);
    }

    #[test]
    fn rejects_bad_manifests() {
        assert!(Manifest::from_json("{}").is_err());
        let m = Manifest {
            config: SynthConfig::default(),
            accel_file: "a.csv".into(),
            hr_file: "h.csv".into(),
            phase_boundaries: vec![5, 5],
        };
        assert!(Manifest::from_json(&m.to_json()).is_err());
    }
}
