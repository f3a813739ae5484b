use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::metrics::{mae, mse};
use super::report::{BaselineMetrics, RunReport};
use super::EvalError;
use crate::ingest::MinuteRecord;
use crate::ppaw::{ppaw_run, PpawConfig, StepOutcome};
use crate::regress::{dummy_fit, fit_ensemble, LabeledSet, TreeParams};

/// Offline experiments refuse smaller datasets.
pub const MIN_OFFLINE_RECORDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineConfig {
    pub n_learners: usize,
    pub tree: TreeParams,
    pub train_frac: f64,
    pub seed: u64,
}

impl Default for OfflineConfig {
    fn default() -> Self {
        Self {
            n_learners: 10,
            tree: TreeParams::default(),
            train_frac: 0.6,
            seed: 42,
        }
    }
}

fn labels(records: &[MinuteRecord]) -> Result<Vec<f64>, EvalError> {
    records
        .iter()
        .map(|r| {
            r.bpm.ok_or_else(|| {
                EvalError::Experiment(format!("minute {} has no heart-rate label", r.minute_index))
            })
        })
        .collect()
}

fn require_len(records: &[MinuteRecord], what: &str) -> Result<(), EvalError> {
    if records.len() < MIN_OFFLINE_RECORDS {
        return Err(EvalError::Experiment(format!(
            "{what} has {} records, need at least {MIN_OFFLINE_RECORDS}",
            records.len()
        )));
    }
    Ok(())
}

/// Seeded uniform shuffle split into (train, test) index lists.
pub fn same_phase_split(n: usize, train_frac: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = ((n as f64 * train_frac).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let test = idx.split_off(k);
    (idx, test)
}

/// Fits forest and mean baseline on `train`, scores both on `test`.
fn fit_and_score(
    train: &[MinuteRecord],
    test: &[MinuteRecord],
    cfg: &OfflineConfig,
    config: Value,
) -> Result<RunReport, EvalError> {
    let data = LabeledSet::from_records(train)?;
    let truth = labels(test)?;
    let forest = fit_ensemble(&data, cfg.n_learners, &cfg.tree, cfg.seed)?;
    let pred: Vec<f64> = test.iter().map(|r| forest.peek(&r.features).mean).collect();
    let dummy = dummy_fit(&data)?;
    let base: Vec<f64> = test.iter().map(|r| dummy.predict(&r.features)).collect();
    let n = (train.len() + test.len()) as u64;
    Ok(RunReport {
        mae: mae(&pred, &truth)?,
        mse: mse(&pred, &truth)?,
        mae_unqueried: None,
        query_fraction: 1.0,
        n_minutes: n,
        n_queried: n,
        config,
        baseline: Some(BaselineMetrics {
            mae: mae(&base, &truth)?,
            mse: mse(&base, &truth)?,
        }),
        trace_path: None,
    })
}

/// i.i.d. treatment of one phase: shuffle, train on `train_frac`, test on
/// the rest.
pub fn run_offline_same_phase(records: &[MinuteRecord], cfg: &OfflineConfig) -> Result<RunReport, EvalError> {
    require_len(records, "phase")?;
    if !(cfg.train_frac > 0.0 && cfg.train_frac < 1.0) {
        return Err(EvalError::Experiment("train_frac must lie in (0, 1)".into()));
    }
    let phases: BTreeSet<u32> = records.iter().map(|r| r.phase).collect();
    if phases.len() != 1 {
        return Err(EvalError::Experiment(format!(
            "same-phase split needs records from one phase, found {phases:?}"
        )));
    }
    let (tr, te) = same_phase_split(records.len(), cfg.train_frac, cfg.seed);
    let train: Vec<MinuteRecord> = tr.iter().map(|&i| records[i]).collect();
    let test: Vec<MinuteRecord> = te.iter().map(|&i| records[i]).collect();
    let config = json!({
        "experiment": "offline_same_phase",
        "phase": phases.first(),
        "offline": cfg,
    });
    fit_and_score(&train, &test, cfg, config)
}

/// Train on every record of one phase, test on every record of another.
pub fn run_offline_cross_phase(
    train: &[MinuteRecord],
    test: &[MinuteRecord],
    cfg: &OfflineConfig,
) -> Result<RunReport, EvalError> {
    require_len(train, "training phase")?;
    require_len(test, "test phase")?;
    let a: BTreeSet<u32> = train.iter().map(|r| r.phase).collect();
    let b: BTreeSet<u32> = test.iter().map(|r| r.phase).collect();
    if !a.is_disjoint(&b) {
        return Err(EvalError::Experiment(format!(
            "train phases {a:?} and test phases {b:?} overlap"
        )));
    }
    let config = json!({
        "experiment": "offline_cross_phase",
        "train_phases": a,
        "test_phases": b,
        "offline": cfg,
    });
    fit_and_score(train, test, cfg, config)
}

/// Online run over the whole stream. Errors are measured on every minute
/// after the initialisation minutes using the prediction made before any
/// query; `mae_unqueried` only counts minutes that were not measured.
pub fn run_ppaw_experiment(
    records: &[MinuteRecord],
    cfg: &PpawConfig,
) -> Result<(RunReport, Vec<StepOutcome>), EvalError> {
    let trace = ppaw_run(cfg, records)?;
    let truth = labels(records)?;
    let scored = &trace[cfg.history..];
    let pred: Vec<f64> = scored.iter().map(|o| o.predicted_bpm).collect();
    let t = &truth[cfg.history..];
    let (up, ut): (Vec<f64>, Vec<f64>) = scored
        .iter()
        .zip(t)
        .filter(|(o, _)| !o.queried)
        .map(|(o, &t)| (o.predicted_bpm, t))
        .unzip();
    let n_queried = trace.iter().filter(|o| o.queried).count() as u64;
    let n = trace.len() as u64;
    let mut config = serde_json::to_value(cfg).expect("config serializes");
    config["experiment"] = json!("ppaw");
    let report = RunReport {
        mae: mae(&pred, t)?,
        mse: mse(&pred, t)?,
        mae_unqueried: if up.is_empty() { None } else { Some(mae(&up, &ut)?) },
        query_fraction: n_queried as f64 / n as f64,
        n_minutes: n,
        n_queried,
        config,
        baseline: None,
        trace_path: None,
    };
    Ok((report, trace))
}

/// One online run per `O`, same stream and seed; runs execute in parallel.
pub fn sweep_o(records: &[MinuteRecord], base: &PpawConfig, o_values: &[f64]) -> Result<Vec<RunReport>, EvalError> {
    if o_values.is_empty() {
        return Err(EvalError::Experiment("no O values given".into()));
    }
    o_values
        .par_iter()
        .map(|&o| {
            let cfg = PpawConfig {
                uncertainty: o,
                ..base.clone()
            };
            run_ppaw_experiment(records, &cfg).map(|(r, _)| r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Axis, FeatureVector, Stat};

    fn rec(m: u64, x: f64, bpm: f64, phase: u32) -> MinuteRecord {
        let mut f = FeatureVector::zeros();
        f.set(Axis::X, Stat::Mean, x);
        MinuteRecord {
            minute_index: m,
            features: f,
            bpm: Some(bpm),
            phase,
        }
    }

    #[test]
    fn split_is_partition() {
        for n in [2usize, 10, 37, 100] {
            let (tr, te) = same_phase_split(n, 0.6, 9);
            let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
            assert!(!tr.is_empty() && !te.is_empty());
        }
        assert_eq!(same_phase_split(100, 0.6, 1).0.len(), 60);
    }

    #[test]
    fn offline_preconditions() {
        let few: Vec<_> = (0..9).map(|m| rec(m, m as f64, 70.0, 0)).collect();
        assert!(run_offline_same_phase(&few, &OfflineConfig::default()).is_err());
        let mixed: Vec<_> = (0..20).map(|m| rec(m, m as f64, 70.0, (m % 2) as u32)).collect();
        assert!(run_offline_same_phase(&mixed, &OfflineConfig::default()).is_err());
        let same: Vec<_> = (0..20).map(|m| rec(m, m as f64, 70.0, 0)).collect();
        assert!(run_offline_cross_phase(&same, &same, &OfflineConfig::default()).is_err());
        let bad = OfflineConfig { train_frac: 1.0, ..Default::default() };
        assert!(run_offline_same_phase(&same, &bad).is_err());
    }

    #[test]
    fn ppaw_report_accounting() {
        let recs: Vec<_> = (0..40)
            .map(|m| rec(m, (m % 5) as f64, 60.0 + 4.0 * (m % 5) as f64, 0))
            .collect();
        let cfg = PpawConfig { n_learners: 4, ..Default::default() };
        let (r, trace) = run_ppaw_experiment(&recs, &cfg).unwrap();
        assert_eq!(r.n_minutes, 40);
        assert_eq!(trace.iter().filter(|o| o.queried).count() as u64, r.n_queried);
        assert_eq!(r.query_fraction, r.n_queried as f64 / 40.0);
        assert_eq!(r.config["O"], json!(3.0));
        assert_eq!(r.config["N"], json!(5));
        assert_eq!(r.config["TTL"], json!(10));
    }

    #[test]
    fn single_value_sweep_matches_direct_run() {
        let recs: Vec<_> = (0..30)
            .map(|m| rec(m, ((m * 7) % 11) as f64, 60.0 + ((m * 5) % 13) as f64, 0))
            .collect();
        let cfg = PpawConfig { n_learners: 3, ..Default::default() };
        let sweep = sweep_o(&recs, &cfg, &[2.0]).unwrap();
        let direct = run_ppaw_experiment(&recs, &PpawConfig { uncertainty: 2.0, ..cfg.clone() })
            .unwrap()
            .0;
        assert_eq!(sweep, vec![direct]);
        assert!(sweep_o(&recs, &cfg, &[]).is_err());
    }
}
