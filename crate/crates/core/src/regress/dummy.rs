use super::{LabeledSet, RegressError};
use crate::features::FeatureVector;

/// Predicts the training-set mean heart rate for every input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanPredictor {
    pub mean: f64,
}

impl MeanPredictor {
    pub fn predict(&self, _x: &FeatureVector) -> f64 {
        self.mean
    }
}

pub fn dummy_fit(data: &LabeledSet) -> Result<MeanPredictor, RegressError> {
    data.mean_bpm()
        .map(|mean| MeanPredictor { mean })
        .ok_or(RegressError::EmptyData)
}

pub fn dummy_predict(model: &MeanPredictor, x: &FeatureVector) -> f64 {
    model.predict(x)
}
