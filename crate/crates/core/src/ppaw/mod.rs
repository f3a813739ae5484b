//! Online heart-rate prediction with uncertainty-triggered label queries.
//!
//! Every minute the ensemble predicts heart rate from acceleration features.
//! When the spread of its members is an outlier relative to the last `N`
//! spreads, the heart-rate sensor is read, the labelled pair joins a buffer of
//! the `N` most recent labels and the learners are refit on it. Learners that
//! erred by more than `T` bpm, and learners older than `TTL` predictions, are
//! retrained and their age reset.
//!
//! Trees cannot absorb a single example, so "teaching" refits every learner
//! on its own bootstrap resample of the label buffer without resetting its
//! age; retraining does the same and resets the age. Resampling keeps the
//! members distinct: identical members would report zero spread forever and
//! the loop would stop querying.

mod outlier;
mod trace;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::ingest::{bpm_in_range, MinuteRecord};
use crate::regress::{fit_ensemble, Ensemble, LabeledSet, RegressError, TreeParams};

pub use outlier::{is_outlier, VarianceHistory};
pub use trace::{parse_trace_csv, write_trace_csv, TRACE_HEADER};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("sensor: {0}")]
pub struct SensorError(pub String);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PpawError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("initialisation needs exactly {expected} labelled minutes, got {got}")]
    Init { expected: usize, got: usize },
    #[error("stream of {len} minutes is too short, need more than {need}")]
    StreamTooShort { len: usize, need: usize },
    #[error("minute {0} has no heart-rate label")]
    MissingLabel(u64),
    #[error("minute {0} has non-finite features")]
    InvalidMinute(u64),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Fit(#[from] RegressError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpawConfig {
    /// Learners in the ensemble.
    #[serde(rename = "L")]
    pub n_learners: usize,
    /// Size of the variance history and of the label buffer.
    #[serde(rename = "N")]
    pub history: usize,
    /// Outlier multiplier on the history's standard deviation.
    #[serde(rename = "O")]
    pub uncertainty: f64,
    /// Per-learner error (bpm) that forces a retrain.
    #[serde(rename = "T")]
    pub error_threshold: f64,
    /// Predictions a learner may make before it is retrained.
    #[serde(rename = "TTL")]
    pub ttl: u64,
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for PpawConfig {
    fn default() -> Self {
        Self {
            n_learners: 10,
            history: 5,
            uncertainty: 3.0,
            error_threshold: 10.0,
            ttl: 10,
            tree: TreeParams::default(),
            seed: 42,
        }
    }
}

impl PpawConfig {
    pub fn validate(&self) -> Result<(), PpawError> {
        let bad = |m: &str| Err(PpawError::Config(m.to_string()));
        if self.n_learners < 1 {
            return bad("L must be >= 1");
        }
        if self.history < 2 {
            return bad("N must be >= 2");
        }
        if !(self.uncertainty.is_finite() && self.uncertainty > 0.0) {
            return bad("O must be finite and > 0");
        }
        if !(self.error_threshold.is_finite() && self.error_threshold > 0.0) {
            return bad("T must be finite and > 0");
        }
        if self.ttl < 1 {
            return bad("TTL must be >= 1");
        }
        self.tree.validate().map_err(|e| PpawError::Config(e.to_string()))
    }
}

/// What happened in one minute.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub minute_index: u64,
    /// Prediction made before any query or refit in this minute. During the
    /// initial `N` minutes it is the measured heart rate.
    pub predicted_bpm: f64,
    pub variance: f64,
    pub queried: bool,
    pub true_bpm: Option<f64>,
    pub retrained_on_error: u32,
    pub retrained_on_ttl: u32,
}

impl StepOutcome {
    fn warmup(minute_index: u64, bpm: f64) -> Self {
        Self {
            minute_index,
            predicted_bpm: bpm,
            variance: 0.0,
            queried: true,
            true_bpm: Some(bpm),
            retrained_on_error: 0,
            retrained_on_ttl: 0,
        }
    }
}

/// Runtime state after initialisation.
#[derive(Debug, Clone)]
pub struct PpawState {
    cfg: PpawConfig,
    ensemble: Ensemble,
    var_history: VarianceHistory,
    labeled: VecDeque<(FeatureVector, f64)>,
    minutes_seen: u64,
}

const SALT_TEACH: u64 = 1;
const SALT_ERROR: u64 = 2;
const SALT_TTL: u64 = 3;

/// Fits the ensemble on the first `N` labelled minutes.
pub fn ppaw_init(cfg: &PpawConfig, first_n: &[(FeatureVector, f64)]) -> Result<PpawState, PpawError> {
    cfg.validate()?;
    if first_n.len() != cfg.history {
        return Err(PpawError::Init {
            expected: cfg.history,
            got: first_n.len(),
        });
    }
    let data = LabeledSet::from_pairs(first_n.iter().copied())?;
    let ensemble = fit_ensemble(&data, cfg.n_learners, &cfg.tree, cfg.seed)?;
    Ok(PpawState {
        cfg: cfg.clone(),
        ensemble,
        var_history: VarianceHistory::new(cfg.history),
        labeled: first_n.iter().copied().collect(),
        minutes_seen: 0,
    })
}

impl PpawState {
    pub fn config(&self) -> &PpawConfig {
        &self.cfg
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn var_history(&self) -> &VarianceHistory {
        &self.var_history
    }

    pub fn labeled_buffer(&self) -> impl Iterator<Item = &(FeatureVector, f64)> {
        self.labeled.iter()
    }

    /// Minutes processed by [`PpawState::step`] since initialisation.
    pub fn minutes_seen(&self) -> u64 {
        self.minutes_seen
    }

    fn buffer_set(&self) -> Result<LabeledSet, PpawError> {
        Ok(LabeledSet::from_pairs(self.labeled.iter().copied())?)
    }

    fn salt(&self, purpose: u64) -> u64 {
        self.minutes_seen * 4 + purpose
    }

    /// One minute of the online loop. `query` reads the heart-rate sensor and
    /// is only called when the prediction spread is an outlier. On a sensor
    /// failure the state is left as it was, apart from the variance history.
    pub fn step<Q>(&mut self, minute: &MinuteRecord, query: Q) -> Result<StepOutcome, PpawError>
    where
        Q: FnOnce(&MinuteRecord) -> Result<f64, SensorError>,
    {
        if !minute.features.is_finite() {
            return Err(PpawError::InvalidMinute(minute.minute_index));
        }
        let ages_before = self.ensemble.ages().to_vec();
        let pred = self.ensemble.predict(&minute.features);
        let mut out = StepOutcome {
            minute_index: minute.minute_index,
            predicted_bpm: pred.mean,
            variance: pred.variance,
            queried: false,
            true_bpm: None,
            retrained_on_error: 0,
            retrained_on_ttl: 0,
        };

        if is_outlier(&mut self.var_history, pred.variance, self.cfg.uncertainty) {
            let truth = match query(minute) {
                Ok(b) if bpm_in_range(b) => b,
                Ok(b) => {
                    self.ensemble.set_ages(&ages_before);
                    return Err(SensorError(format!("reading {b} bpm outside [20, 250]")).into());
                }
                Err(e) => {
                    self.ensemble.set_ages(&ages_before);
                    return Err(e.into());
                }
            };
            out.queried = true;
            out.true_bpm = Some(truth);
            if self.labeled.len() == self.cfg.history {
                self.labeled.pop_front();
            }
            self.labeled.push_back((minute.features, truth));
            let buffer = self.buffer_set()?;
            for i in 0..self.ensemble.len() {
                self.ensemble
                    .refit_learner_resampled(i, &buffer, self.salt(SALT_TEACH), false)?;
            }
            for (i, p) in pred.per_learner.iter().enumerate() {
                if (p - truth).abs() > self.cfg.error_threshold {
                    self.ensemble
                        .refit_learner_resampled(i, &buffer, self.salt(SALT_ERROR), true)?;
                    out.retrained_on_error += 1;
                }
            }
        }

        let stale: Vec<usize> = (0..self.ensemble.len())
            .filter(|&i| self.ensemble.ages()[i] >= self.cfg.ttl)
            .collect();
        if !stale.is_empty() {
            let buffer = self.buffer_set()?;
            for i in stale {
                self.ensemble
                    .refit_learner_resampled(i, &buffer, self.salt(SALT_TTL), true)?;
                out.retrained_on_ttl += 1;
            }
        }
        self.minutes_seen += 1;
        Ok(out)
    }
}

/// Drives the loop from the very first minute: the first `N` minutes are
/// always measured and used for initialisation, later minutes go through
/// [`PpawState::step`].
#[derive(Debug, Clone)]
pub struct PpawSession {
    cfg: PpawConfig,
    warmup: Vec<(FeatureVector, f64)>,
    state: Option<PpawState>,
}

impl PpawSession {
    pub fn new(cfg: &PpawConfig) -> Result<Self, PpawError> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            warmup: Vec::with_capacity(cfg.history),
            state: None,
        })
    }

    pub fn state(&self) -> Option<&PpawState> {
        self.state.as_ref()
    }

    pub fn is_warming_up(&self) -> bool {
        self.state.is_none()
    }

    pub fn process<Q>(&mut self, minute: &MinuteRecord, query: Q) -> Result<StepOutcome, PpawError>
    where
        Q: FnOnce(&MinuteRecord) -> Result<f64, SensorError>,
    {
        if let Some(state) = &mut self.state {
            return state.step(minute, query);
        }
        if !minute.features.is_finite() {
            return Err(PpawError::InvalidMinute(minute.minute_index));
        }
        let bpm = query(minute)?;
        if !bpm_in_range(bpm) {
            return Err(SensorError(format!("reading {bpm} bpm outside [20, 250]")).into());
        }
        self.warmup.push((minute.features, bpm));
        if self.warmup.len() == self.cfg.history {
            self.state = Some(ppaw_init(&self.cfg, &self.warmup)?);
        }
        Ok(StepOutcome::warmup(minute.minute_index, bpm))
    }
}

/// Replays a fully labelled stream; the label is only "read" when the loop
/// asks for it. Returns one outcome per minute, the first `N` being the
/// initialisation minutes.
pub fn ppaw_run(cfg: &PpawConfig, stream: &[MinuteRecord]) -> Result<Vec<StepOutcome>, PpawError> {
    cfg.validate()?;
    if stream.len() <= cfg.history {
        return Err(PpawError::StreamTooShort {
            len: stream.len(),
            need: cfg.history,
        });
    }
    if let Some(r) = stream.iter().find(|r| r.bpm.is_none()) {
        return Err(PpawError::MissingLabel(r.minute_index));
    }
    let mut session = PpawSession::new(cfg)?;
    stream
        .iter()
        .map(|r| session.process(r, |m| Ok(m.bpm.expect("checked above"))))
        .collect()
}
