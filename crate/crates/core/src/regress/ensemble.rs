use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_on, RegressionTree};
use super::{LabeledSet, RegressError, TreeParams};
use crate::features::FeatureVector;

/// Below this many rows learners train on the full data instead of a
/// bootstrap resample.
const MIN_BOOTSTRAP_ROWS: usize = 4;

/// Per-learner random stream: ChaCha8 seeded by `seed`, stream `stream`.
pub fn learner_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// SplitMix64 finaliser over `seed ^ salt`-style combinations.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` indices drawn uniformly with replacement from `0..n`.
pub fn bootstrap_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Ensemble output for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    /// Population variance of `per_learner`.
    pub variance: f64,
    pub per_learner: Vec<f64>,
}

impl Prediction {
    pub fn from_learners(per_learner: Vec<f64>) -> Self {
        let (lo, hi) = per_learner
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
        if lo == hi {
            return Self {
                mean: lo,
                variance: 0.0,
                per_learner,
            };
        }
        let n = per_learner.len() as f64;
        let mean = (per_learner.iter().sum::<f64>() / n).clamp(lo, hi);
        let variance = per_learner.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            variance,
            per_learner,
        }
    }
}

/// `L` regression trees plus, per tree, the number of predictions made since
/// it was last (re)trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleRepr", into = "EnsembleRepr")]
pub struct Ensemble {
    learners: Vec<RegressionTree>,
    ages: Vec<u64>,
    params: TreeParams,
    rng_seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleRepr {
    params: TreeParams,
    rng_seed: u64,
    ages: Vec<u64>,
    learners: Vec<RegressionTree>,
}

impl From<Ensemble> for EnsembleRepr {
    fn from(e: Ensemble) -> Self {
        Self {
            params: e.params,
            rng_seed: e.rng_seed,
            ages: e.ages,
            learners: e.learners,
        }
    }
}

impl TryFrom<EnsembleRepr> for Ensemble {
    type Error = RegressError;

    fn try_from(r: EnsembleRepr) -> Result<Self, RegressError> {
        r.params.validate()?;
        if r.learners.is_empty() || r.learners.len() != r.ages.len() {
            return Err(RegressError::InvalidModel(
                "learners and ages must be non-empty and of equal length".into(),
            ));
        }
        Ok(Self {
            learners: r.learners,
            ages: r.ages,
            params: r.params,
            rng_seed: r.rng_seed,
        })
    }
}

/// Bagged ensemble: learner `i` is fit on a bootstrap resample drawn from
/// stream `i` of `seed` (full data below 4 rows).
pub fn fit_ensemble(
    data: &LabeledSet,
    n_learners: usize,
    params: &TreeParams,
    seed: u64,
) -> Result<Ensemble, RegressError> {
    params.validate()?;
    if n_learners < 1 {
        return Err(RegressError::InvalidParams("ensemble needs at least one learner".into()));
    }
    if data.is_empty() {
        return Err(RegressError::EmptyData);
    }
    let learners = (0..n_learners)
        .map(|i| {
            let mut rng = learner_rng(seed, i as u64);
            let idx = if data.len() >= MIN_BOOTSTRAP_ROWS {
                bootstrap_indices(&mut rng, data.len())
            } else {
                (0..data.len()).collect()
            };
            fit_tree_on(data, &idx, params, rng.next_u64())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ensemble {
        ages: vec![0; n_learners],
        learners,
        params: *params,
        rng_seed: seed,
    })
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.learners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.learners.is_empty()
    }

    pub fn learners(&self) -> &[RegressionTree] {
        &self.learners
    }

    pub fn ages(&self) -> &[u64] {
        &self.ages
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// Predicts and ages every learner by one.
    pub fn predict(&mut self, x: &FeatureVector) -> Prediction {
        for a in &mut self.ages {
            *a += 1;
        }
        self.peek(x)
    }

    /// Predicts without touching learner ages.
    pub fn peek(&self, x: &FeatureVector) -> Prediction {
        Prediction::from_learners(self.learners.iter().map(|t| t.predict(x)).collect())
    }

    pub(crate) fn set_ages(&mut self, ages: &[u64]) {
        self.ages.copy_from_slice(ages);
    }

    fn check_index(&self, i: usize) -> Result<(), RegressError> {
        if i >= self.learners.len() {
            return Err(RegressError::LearnerIndex {
                index: i,
                len: self.learners.len(),
            });
        }
        Ok(())
    }

    /// Replaces learner `i` with a tree fit on all of `recent`; age resets.
    pub fn retrain_learner(&mut self, i: usize, recent: &LabeledSet, seed_salt: u64) -> Result<(), RegressError> {
        self.check_index(i)?;
        if recent.is_empty() {
            return Err(RegressError::EmptyData);
        }
        let idx: Vec<usize> = (0..recent.len()).collect();
        let seed = mix_seed(self.rng_seed, seed_salt);
        self.learners[i] = fit_tree_on(recent, &idx, &self.params, seed)?;
        self.ages[i] = 0;
        Ok(())
    }

    /// Replaces learner `i` with a tree fit on a bootstrap resample of
    /// `recent` (stream `i` of `mix_seed(rng_seed, seed_salt)`). Returns the
    /// resample used.
    pub fn refit_learner_resampled(
        &mut self,
        i: usize,
        recent: &LabeledSet,
        seed_salt: u64,
        reset_age: bool,
    ) -> Result<Vec<usize>, RegressError> {
        self.check_index(i)?;
        if recent.is_empty() {
            return Err(RegressError::EmptyData);
        }
        let mut rng = learner_rng(mix_seed(self.rng_seed, seed_salt), i as u64);
        let idx = bootstrap_indices(&mut rng, recent.len());
        self.learners[i] = fit_tree_on(recent, &idx, &self.params, rng.next_u64())?;
        if reset_age {
            self.ages[i] = 0;
        }
        Ok(idx)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ensemble serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RegressError> {
        serde_json::from_str(text).map_err(|e| RegressError::InvalidModel(e.to_string()))
    }
}
