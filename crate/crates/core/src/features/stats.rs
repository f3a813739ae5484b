use super::spectral::Spectrum;
use super::{AxisWindow, PER_AXIS};

/// Second central moment below which skewness and kurtosis are reported as 0.
const MOMENT_GUARD: f64 = 1e-12;

/// The 13 features of a single axis window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisStats {
    pub min: f64,
    pub max: f64,
    pub std: f64,
    pub median: f64,
    pub mean: f64,
    pub p25: f64,
    pub p75: f64,
    pub iqr: f64,
    pub skew: f64,
    pub kurt: f64,
    pub zc: f64,
    pub spec_energy: f64,
    pub spec_entropy: f64,
}

impl AxisStats {
    pub fn to_array(&self) -> [f64; PER_AXIS] {
        [
            self.min,
            self.max,
            self.std,
            self.median,
            self.mean,
            self.p25,
            self.p75,
            self.iqr,
            self.skew,
            self.kurt,
            self.zc,
            self.spec_energy,
            self.spec_entropy,
        ]
    }
}

/// Linear-interpolation percentile of an ascending slice, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Sign changes of the mean-centred window. Exact zeros are skipped: a
/// crossing is counted against the most recent non-zero sample.
pub fn zero_crossings(w: AxisWindow<'_>) -> u32 {
    let s = w.samples();
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let mut last = 0i8;
    let mut count = 0;
    for v in s {
        let c = v - mean;
        let sign = if c > 0.0 {
            1
        } else if c < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last != 0 && sign != last {
                count += 1;
            }
            last = sign;
        }
    }
    count
}

/// All per-axis features. `scratch` is reused for the sorted copy.
pub fn axis_stats(w: AxisWindow<'_>, scratch: &mut Vec<f64>, spectrum: &mut Spectrum) -> AxisStats {
    let s = w.samples();
    let n = s.len() as f64;

    scratch.clear();
    scratch.extend_from_slice(s);
    scratch.sort_by(f64::total_cmp);

    let mean = s.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in s {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skew, kurt) = if m2 < MOMENT_GUARD {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };

    let p25 = percentile(scratch, 0.25);
    let p75 = percentile(scratch, 0.75);
    spectrum.compute(s);

    AxisStats {
        min: scratch[0],
        max: scratch[scratch.len() - 1],
        std: m2.sqrt(),
        median: percentile(scratch, 0.5),
        mean,
        p25,
        p75,
        iqr: p75 - p25,
        skew,
        kurt,
        zc: f64::from(zero_crossings(w)),
        spec_energy: spectrum.energy(),
        spec_entropy: spectrum.entropy(),
    }
}
