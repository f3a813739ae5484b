//! Per-axis statistical and spectral features.
//!
//! Features are computed over non-overlapping one-second windows and then
//! averaged over a minute. Each axis contributes 13 values, giving a 39-wide
//! [`FeatureVector`] laid out as all `x_*` fields, then `y_*`, then `z_*`.

mod export;
mod minute;
mod spectral;
mod stats;

use std::fmt;

use thiserror::Error;

pub use export::{parse_feature_csv, write_feature_csv, FEATURE_CSV_PREFIX};
pub use minute::{minute_aggregate, minute_features, MinuteAccumulator, MIN_VALID_SECONDS};
pub use spectral::{spectral_energy, spectral_entropy, Spectrum};
pub use stats::{axis_stats, percentile, zero_crossings, AxisStats};

/// Number of features per axis.
pub const PER_AXIS: usize = 13;
/// Total feature count.
pub const N_FEATURES: usize = 3 * PER_AXIS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("window holds {len} samples, need at least 2")]
    WindowTooShort { len: usize },
    #[error("window sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("axis windows differ in length (x={x}, y={y}, z={z})")]
    ShapeMismatch { x: usize, y: usize, z: usize },
    #[error("insufficient data: {got} one-second vectors, need at least {min}")]
    InsufficientData { got: usize, min: usize },
    #[error("too many one-second vectors for a minute: {got}")]
    TooManySeconds { got: usize },
}

/// Acceleration axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn offset(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => PER_AXIS,
            Axis::Z => 2 * PER_AXIS,
        }
    }
}

/// One per-axis feature, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stat {
    Min,
    Max,
    Std,
    Median,
    Mean,
    P25,
    P75,
    Iqr,
    Skew,
    Kurt,
    Zc,
    SpecEnergy,
    SpecEntropy,
}

impl Stat {
    pub const ALL: [Stat; PER_AXIS] = [
        Stat::Min,
        Stat::Max,
        Stat::Std,
        Stat::Median,
        Stat::Mean,
        Stat::P25,
        Stat::P75,
        Stat::Iqr,
        Stat::Skew,
        Stat::Kurt,
        Stat::Zc,
        Stat::SpecEnergy,
        Stat::SpecEntropy,
    ];
}

/// Column names, `<axis>_<feature>`, in storage order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "x_min",
    "x_max",
    "x_std",
    "x_median",
    "x_mean",
    "x_p25",
    "x_p75",
    "x_iqr",
    "x_skew",
    "x_kurt",
    "x_zc",
    "x_spec_energy",
    "x_spec_entropy",
    "y_min",
    "y_max",
    "y_std",
    "y_median",
    "y_mean",
    "y_p25",
    "y_p75",
    "y_iqr",
    "y_skew",
    "y_kurt",
    "y_zc",
    "y_spec_energy",
    "y_spec_entropy",
    "z_min",
    "z_max",
    "z_std",
    "z_median",
    "z_mean",
    "z_p25",
    "z_p75",
    "z_iqr",
    "z_skew",
    "z_kurt",
    "z_zc",
    "z_spec_energy",
    "z_spec_entropy",
];

/// The 39 named features of one window or one minute.
#[derive(Clone, Copy, PartialEq)]
pub struct FeatureVector([f64; N_FEATURES]);

impl FeatureVector {
    pub const fn from_array(values: [f64; N_FEATURES]) -> Self {
        Self(values)
    }

    pub fn zeros() -> Self {
        Self([0.0; N_FEATURES])
    }

    pub fn index_of(axis: Axis, stat: Stat) -> usize {
        axis.offset() + stat as usize
    }

    pub fn get(&self, axis: Axis, stat: Stat) -> f64 {
        self.0[Self::index_of(axis, stat)]
    }

    pub fn set(&mut self, axis: Axis, stat: Stat, value: f64) {
        self.0[Self::index_of(axis, stat)] = value;
    }

    pub fn as_array(&self) -> &[f64; N_FEATURES] {
        &self.0
    }

    pub fn as_mut_array(&mut self) -> &mut [f64; N_FEATURES] {
        &mut self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    fn set_axis(&mut self, axis: Axis, s: &AxisStats) {
        let o = axis.offset();
        self.0[o..o + PER_AXIS].copy_from_slice(&s.to_array());
    }

    /// Field-wise arithmetic mean of a non-empty slice.
    pub fn mean_of(vectors: &[FeatureVector]) -> Option<FeatureVector> {
        if vectors.is_empty() {
            return None;
        }
        let mut acc = [0.0; N_FEATURES];
        for v in vectors {
            for (a, x) in acc.iter_mut().zip(v.0.iter()) {
                *a += x;
            }
        }
        let n = vectors.len() as f64;
        for a in acc.iter_mut() {
            *a /= n;
        }
        Some(FeatureVector(acc))
    }
}

impl std::ops::Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (name, v) in FEATURE_NAMES.iter().zip(self.0.iter()) {
            m.entry(name, v);
        }
        m.finish()
    }
}

/// One axis of a one-second window.
#[derive(Debug, Clone, Copy)]
pub struct AxisWindow<'a> {
    samples: &'a [f64],
}

impl<'a> AxisWindow<'a> {
    pub fn new(samples: &'a [f64]) -> Result<Self, FeatureError> {
        if samples.len() < 2 {
            return Err(FeatureError::WindowTooShort { len: samples.len() });
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite { index });
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &'a [f64] {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Reusable feature extractor; holds the FFT planner and scratch buffers so
/// the hot loop over millions of windows does not reallocate.
pub struct FeatureExtractor {
    spectrum: Spectrum,
    scratch: Vec<f64>,
}

impl Default for FeatureExtractor {
    fn default() -> Self {
        Self::new()
    }
}

impl FeatureExtractor {
    pub fn new() -> Self {
        Self {
            spectrum: Spectrum::new(),
            scratch: Vec::new(),
        }
    }

    pub fn axis(&mut self, w: AxisWindow<'_>) -> AxisStats {
        axis_stats(w, &mut self.scratch, &mut self.spectrum)
    }

    pub fn window_features(
        &mut self,
        x: AxisWindow<'_>,
        y: AxisWindow<'_>,
        z: AxisWindow<'_>,
    ) -> Result<FeatureVector, FeatureError> {
        if x.len() != y.len() || x.len() != z.len() {
            return Err(FeatureError::ShapeMismatch {
                x: x.len(),
                y: y.len(),
                z: z.len(),
            });
        }
        let mut fv = FeatureVector::zeros();
        for (axis, w) in Axis::ALL.into_iter().zip([x, y, z]) {
            let s = self.axis(w);
            fv.set_axis(axis, &s);
        }
        Ok(fv)
    }
}

/// All 39 features of a three-axis window.
pub fn window_features(
    x: AxisWindow<'_>,
    y: AxisWindow<'_>,
    z: AxisWindow<'_>,
) -> Result<FeatureVector, FeatureError> {
    FeatureExtractor::new().window_features(x, y, z)
}
