//! Metrics, run reports and the offline / online experiment runners.

mod experiments;
mod metrics;
mod report;

use thiserror::Error;

use crate::ppaw::PpawError;
use crate::regress::RegressError;

pub use experiments::{
    run_offline_cross_phase, run_offline_same_phase, run_ppaw_experiment, same_phase_split, sweep_o,
    OfflineConfig, MIN_OFFLINE_RECORDS,
};
pub use metrics::{mae, mse};
pub use report::{write_plot_csv, write_sweep_csv, BaselineMetrics, RunReport, PLOT_HEADER, SWEEP_HEADER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("metric: {0}")]
    Metric(String),
    #[error("experiment: {0}")]
    Experiment(String),
    #[error(transparent)]
    Ppaw(#[from] PpawError),
    #[error(transparent)]
    Regress(#[from] RegressError),
}
