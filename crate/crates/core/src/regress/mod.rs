//! Learners: CART regression trees, a bagged tree ensemble that reports the
//! spread of its members, and the mean-only baseline.

mod dummy;
mod ensemble;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::ingest::MinuteRecord;

pub use dummy::{dummy_fit, dummy_predict, MeanPredictor};
pub use ensemble::{bootstrap_indices, fit_ensemble, learner_rng, mix_seed, Ensemble, Prediction};
pub use tree::{fit_tree, fit_tree_on, predict_tree, Node, RegressionTree, Split};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressError {
    #[error("cannot fit on empty data")]
    EmptyData,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("learner index {index} out of range for ensemble of {len}")]
    LearnerIndex { index: usize, len: usize },
    #[error("training row {0} is not finite")]
    NonFinite(usize),
    #[error("minute {0} has no heart-rate label")]
    Unlabeled(u64),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// One training example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledRow {
    pub features: FeatureVector,
    pub bpm: f64,
}

/// Training data: feature vectors with their measured heart rate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledSet {
    rows: Vec<LabeledRow>,
}

impl LabeledSet {
    pub fn new(rows: Vec<LabeledRow>) -> Result<Self, RegressError> {
        if let Some(i) = rows
            .iter()
            .position(|r| !(r.bpm.is_finite() && r.features.is_finite()))
        {
            return Err(RegressError::NonFinite(i));
        }
        Ok(Self { rows })
    }

    pub fn from_pairs<I: IntoIterator<Item = (FeatureVector, f64)>>(pairs: I) -> Result<Self, RegressError> {
        Self::new(
            pairs
                .into_iter()
                .map(|(features, bpm)| LabeledRow { features, bpm })
                .collect(),
        )
    }

    /// Uses every record's measured heart rate; unlabeled records are errors.
    pub fn from_records(records: &[MinuteRecord]) -> Result<Self, RegressError> {
        let rows = records
            .iter()
            .map(|r| {
                r.bpm
                    .map(|bpm| LabeledRow { features: r.features, bpm })
                    .ok_or(RegressError::Unlabeled(r.minute_index))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rows)
    }

    pub fn rows(&self) -> &[LabeledRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn mean_bpm(&self) -> Option<f64> {
        (!self.rows.is_empty())
            .then(|| self.rows.iter().map(|r| r.bpm).sum::<f64>() / self.rows.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Candidate thresholds examined per feature; `None` examines every
    /// midpoint between consecutive distinct values.
    pub n_candidate_splits: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 8,
            min_samples_leaf: 1,
            n_candidate_splits: None,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<(), RegressError> {
        if self.max_depth < 1 {
            return Err(RegressError::InvalidParams("max_depth must be >= 1".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(RegressError::InvalidParams("min_samples_leaf must be >= 1".into()));
        }
        if self.n_candidate_splits == Some(0) {
            return Err(RegressError::InvalidParams("n_candidate_splits must be >= 1".into()));
        }
        Ok(())
    }
}
