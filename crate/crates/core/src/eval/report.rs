use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ingest::MinuteRecord;
use crate::ppaw::StepOutcome;

pub const SWEEP_HEADER: &str = "O,mae,mse,query_fraction";
pub const PLOT_HEADER: &str = "minute_index,true_bpm,predicted_bpm";

/// Errors of the mean-only baseline on the same split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineMetrics {
    pub mae: f64,
    pub mse: f64,
}

/// Outcome of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mae: f64,
    pub mse: f64,
    /// Error over minutes that were not measured; `null` when every minute
    /// was.
    pub mae_unqueried: Option<f64>,
    pub query_fraction: f64,
    pub n_minutes: u64,
    pub n_queried: u64,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// One row per report: `O,mae,mse,query_fraction`.
pub fn write_sweep_csv<W: Write>(mut w: W, o_values: &[f64], reports: &[RunReport]) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for (o, r) in o_values.iter().zip(reports) {
        writeln!(w, "{o},{},{},{}", r.mae, r.mse, r.query_fraction)?;
    }
    w.flush()
}

/// Predicted against measured heart rate per minute. Truth comes from
/// `records` when given, otherwise from the trace (queried minutes only; the
/// field is empty for the rest).
pub fn write_plot_csv<W: Write>(
    mut w: W,
    trace: &[StepOutcome],
    records: Option<&[MinuteRecord]>,
) -> std::io::Result<()> {
    let truth: HashMap<u64, f64> = records
        .unwrap_or_default()
        .iter()
        .filter_map(|r| r.bpm.map(|b| (r.minute_index, b)))
        .collect();
    writeln!(w, "{PLOT_HEADER}")?;
    for o in trace {
        write!(w, "{},", o.minute_index)?;
        if let Some(t) = truth.get(&o.minute_index).copied().or(o.true_bpm) {
            write!(w, "{t}")?;
        }
        writeln!(w, ",{}", o.predicted_bpm)?;
    }
    w.flush()
}
