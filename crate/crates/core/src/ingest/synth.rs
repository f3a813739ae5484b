//! Synthetic drifting accelerometer / heart-rate recordings.
//!
//! One activity schedule (a sequence of rest / walk / exercise bouts) is
//! drawn for a phase and replayed in every phase, so phases share the same
//! acceleration distribution and differ only in how heart rate responds to
//! it. Heart rate follows an exponential moving average of the per-second
//! activity intensity (30 s time constant), scaled by a phase-dependent gain
//! and offset, plus Gaussian noise.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::csv::{write_hr_csv, AccelCsvWriter};
use super::manifest::Manifest;
use super::{AccelSample, HrSample, IngestError};

const HR_TIME_CONSTANT_S: f64 = 30.0;
const BASE_BPM: f64 = 62.0;
const GAIN_BPM: f64 = 55.0;
/// Relative gain increase per phase per bpm of drift.
const GAIN_DRIFT: f64 = 0.01;
const HR_FLOOR: f64 = 30.0;
const HR_CEIL: f64 = 220.0;
/// Output resolution of generated acceleration (1 mg).
const ACCEL_RESOLUTION: f64 = 1000.0;

const STREAM_SCHEDULE: u64 = 1;
const STREAM_ACCEL: u64 = 2;
const STREAM_HR: u64 = 3;

/// One kind of activity bout: its length in seconds and the acceleration
/// amplitude (g) drawn uniformly from the given ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityRegime {
    pub min_secs: u32,
    pub max_secs: u32,
    pub min_intensity: f64,
    pub max_intensity: f64,
}

impl ActivityRegime {
    pub fn new(secs: (u32, u32), intensity: (f64, f64)) -> Self {
        Self {
            min_secs: secs.0,
            max_secs: secs.1,
            min_intensity: intensity.0,
            max_intensity: intensity.1,
        }
    }

    /// Rest, walking and exercise bouts.
    pub fn defaults() -> Vec<ActivityRegime> {
        vec![
            ActivityRegime::new((120, 900), (0.02, 0.1)),
            ActivityRegime::new((120, 900), (0.25, 0.5)),
            ActivityRegime::new((60, 600), (0.6, 1.0)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_minutes_per_phase: u64,
    pub n_phases: u32,
    pub sample_rate_hz: u32,
    pub seed: u64,
    /// Per-phase heart-rate offset (bpm) of the acceleration to heart-rate
    /// mapping.
    pub drift_strength: f64,
    pub noise_bpm_std: f64,
    /// Gaussian sensor noise on every acceleration sample (g).
    #[serde(default = "default_accel_noise")]
    pub accel_noise_g: f64,
    pub activity_regimes: Vec<ActivityRegime>,
}

fn default_accel_noise() -> f64 {
    0.02
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_minutes_per_phase: 1000,
            n_phases: 2,
            sample_rate_hz: 50,
            seed: 42,
            drift_strength: 15.0,
            noise_bpm_std: 3.0,
            accel_noise_g: default_accel_noise(),
            activity_regimes: ActivityRegime::defaults(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        let bad = |m: &str| Err(IngestError::Config(m.to_string()));
        if self.n_minutes_per_phase < 1 {
            return bad("n_minutes_per_phase must be >= 1");
        }
        if self.n_phases < 1 {
            return bad("n_phases must be >= 1");
        }
        if !(2..=1000).contains(&self.sample_rate_hz) {
            return bad("sample_rate_hz must be in [2, 1000]");
        }
        for (name, v) in [
            ("drift_strength", self.drift_strength),
            ("noise_bpm_std", self.noise_bpm_std),
            ("accel_noise_g", self.accel_noise_g),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(IngestError::Config(format!("{name} must be finite and >= 0")));
            }
        }
        if self.activity_regimes.is_empty() {
            return bad("activity_regimes must not be empty");
        }
        for r in &self.activity_regimes {
            if r.min_secs < 1 || r.min_secs > r.max_secs {
                return bad("regime duration range must satisfy 1 <= min <= max");
            }
            if !(r.min_intensity.is_finite() && r.max_intensity.is_finite())
                || r.min_intensity < 0.0
                || r.min_intensity > r.max_intensity
            {
                return bad("regime intensity range must satisfy 0 <= min <= max");
            }
        }
        Ok(())
    }

    pub fn total_minutes(&self) -> u64 {
        self.n_minutes_per_phase * u64::from(self.n_phases)
    }

    /// First minute of every phase.
    pub fn phase_boundaries(&self) -> Vec<u64> {
        (0..u64::from(self.n_phases))
            .map(|p| p * self.n_minutes_per_phase)
            .collect()
    }

    fn base_bpm(&self, phase: u32) -> f64 {
        BASE_BPM + self.drift_strength * f64::from(phase)
    }

    fn gain(&self, phase: u32) -> f64 {
        GAIN_BPM * (1.0 + GAIN_DRIFT * self.drift_strength * f64::from(phase))
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn quantize(v: f64) -> f64 {
    (v * ACCEL_RESOLUTION).round() / ACCEL_RESOLUTION
}

/// One generated minute.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthMinute {
    pub minute_index: u64,
    pub phase: u32,
    pub samples: Vec<AccelSample>,
    pub hr: HrSample,
}

/// Minute-by-minute generator; memory stays bounded for long recordings.
pub struct SynthStream {
    cfg: SynthConfig,
    intensity: Vec<f64>,
    freq: Vec<f64>,
    accel_rng: ChaCha8Rng,
    hr_rng: ChaCha8Rng,
    accel_noise: Option<Normal<f64>>,
    hr_noise: Option<Normal<f64>>,
    ema: f64,
    alpha: f64,
    minute: u64,
}

impl SynthStream {
    pub fn new(cfg: &SynthConfig) -> Result<Self, IngestError> {
        cfg.validate()?;
        let phase_secs = (cfg.n_minutes_per_phase * 60) as usize;
        let mut sched = rng(cfg.seed, STREAM_SCHEDULE);
        let mut intensity = Vec::with_capacity(phase_secs);
        let mut freq = Vec::with_capacity(phase_secs);
        while intensity.len() < phase_secs {
            let r = &cfg.activity_regimes[sched.random_range(0..cfg.activity_regimes.len())];
            let secs = sched.random_range(r.min_secs..=r.max_secs) as usize;
            let level = if r.max_intensity > r.min_intensity {
                sched.random_range(r.min_intensity..=r.max_intensity)
            } else {
                r.min_intensity
            };
            // livelier activity, faster dominant cadence
            let f = 0.8 + 1.6 * level.min(1.5);
            let n = secs.min(phase_secs - intensity.len());
            intensity.extend(std::iter::repeat_n(level, n));
            freq.extend(std::iter::repeat_n(f, n));
        }
        let normal = |sd: f64| (sd > 0.0).then(|| Normal::new(0.0, sd).expect("validated"));
        Ok(Self {
            ema: intensity[0],
            alpha: 1.0 - (-1.0 / HR_TIME_CONSTANT_S).exp(),
            intensity,
            freq,
            accel_rng: rng(cfg.seed, STREAM_ACCEL),
            hr_rng: rng(cfg.seed, STREAM_HR),
            accel_noise: normal(cfg.accel_noise_g),
            hr_noise: normal(cfg.noise_bpm_std),
            cfg: cfg.clone(),
            minute: 0,
        })
    }

    fn noise(dist: &Option<Normal<f64>>, rng: &mut ChaCha8Rng) -> f64 {
        dist.as_ref().map_or(0.0, |d| d.sample(rng))
    }
}

impl Iterator for SynthStream {
    type Item = SynthMinute;

    fn next(&mut self) -> Option<SynthMinute> {
        if self.minute >= self.cfg.total_minutes() {
            return None;
        }
        let m = self.minute;
        self.minute += 1;
        let phase = (m / self.cfg.n_minutes_per_phase) as u32;
        let local_minute = m % self.cfg.n_minutes_per_phase;
        let rate = u64::from(self.cfg.sample_rate_hz);

        let mut samples = Vec::with_capacity((60 * rate) as usize);
        let mut ema_sum = 0.0;
        for sec in 0..60u64 {
            let idx = (local_minute * 60 + sec) as usize;
            let amp = self.intensity[idx];
            let f = self.freq[idx];
            self.ema += (amp - self.ema) * self.alpha;
            ema_sum += self.ema;
            for k in 0..rate {
                let i = (m * 60 + sec) * rate + k;
                let t_ms = i * 1000 / rate;
                let t = t_ms as f64 / 1000.0;
                let w = TAU * f * t;
                let mut n = || Self::noise(&self.accel_noise, &mut self.accel_rng);
                samples.push(AccelSample {
                    t_ms,
                    x: quantize(amp * w.sin() + n()),
                    y: quantize(0.6 * amp * (w + 1.1).sin() + n()),
                    z: quantize(1.0 + 0.8 * amp * (w + 2.3).sin() + n()),
                });
            }
        }
        let level = ema_sum / 60.0;
        let bpm = self.cfg.base_bpm(phase)
            + self.cfg.gain(phase) * level
            + Self::noise(&self.hr_noise, &mut self.hr_rng);
        Some(SynthMinute {
            minute_index: m,
            phase,
            samples,
            hr: HrSample {
                minute_index: m,
                bpm: bpm.clamp(HR_FLOOR, HR_CEIL),
            },
        })
    }
}

/// Whole recording in memory.
pub fn synth_stream(cfg: &SynthConfig) -> Result<(Vec<AccelSample>, Vec<HrSample>), IngestError> {
    let mut accel = Vec::new();
    let mut hr = Vec::new();
    for minute in SynthStream::new(cfg)? {
        accel.extend_from_slice(&minute.samples);
        hr.push(minute.hr);
    }
    Ok((accel, hr))
}

/// Streams a recording to `dir` as `accel.csv`, `hr.csv` and
/// `manifest.json`; returns the manifest.
pub fn synth_write(cfg: &SynthConfig, dir: &Path) -> Result<Manifest, IngestError> {
    std::fs::create_dir_all(dir)?;
    let manifest = Manifest {
        config: cfg.clone(),
        accel_file: "accel.csv".into(),
        hr_file: "hr.csv".into(),
        phase_boundaries: cfg.phase_boundaries(),
    };
    let mut accel = AccelCsvWriter::new(BufWriter::with_capacity(
        1 << 20,
        File::create(dir.join(&manifest.accel_file))?,
    ))?;
    let mut hr = Vec::new();
    for minute in SynthStream::new(cfg)? {
        for s in &minute.samples {
            accel.write(s)?;
        }
        hr.push(minute.hr);
    }
    accel.finish()?;
    write_hr_csv(BufWriter::new(File::create(dir.join(&manifest.hr_file))?), &hr)?;
    let mut f = BufWriter::new(File::create(dir.join("manifest.json"))?);
    f.write_all(manifest.to_json().as_bytes())?;
    f.flush()?;
    Ok(manifest)
}
