use super::{AxisWindow, FeatureError, FeatureExtractor, FeatureVector};
use crate::ingest::AccelSample;

/// A minute needs this many valid one-second windows to be kept.
pub const MIN_VALID_SECONDS: usize = 30;

const MS_PER_SECOND: u64 = 1000;
const MS_PER_MINUTE: u64 = 60_000;

/// Field-wise mean of the per-second vectors of one minute.
pub fn minute_aggregate(seconds: &[FeatureVector]) -> Result<FeatureVector, FeatureError> {
    if seconds.len() < MIN_VALID_SECONDS {
        return Err(FeatureError::InsufficientData {
            got: seconds.len(),
            min: MIN_VALID_SECONDS,
        });
    }
    if seconds.len() > 60 {
        return Err(FeatureError::TooManySeconds { got: seconds.len() });
    }
    Ok(FeatureVector::mean_of(seconds).expect("non-empty"))
}

/// Features of one minute of samples.
///
/// `samples` must be sorted and all fall inside the minute. They are cut into
/// one-second windows aligned to multiples of 1000 ms; a window is valid when
/// it holds at least `sample_rate_hz / 2` (and at least 2) samples. Returns
/// `None` when fewer than [`MIN_VALID_SECONDS`] windows are valid.
pub fn minute_features(
    samples: &[AccelSample],
    sample_rate_hz: u32,
    ex: &mut FeatureExtractor,
) -> Option<FeatureVector> {
    let mut seconds = Vec::with_capacity(60);
    let (mut xs, mut ys, mut zs) = (Vec::new(), Vec::new(), Vec::new());
    let mut rest = samples;
    while let Some(first) = rest.first() {
        let sec = first.t_ms / MS_PER_SECOND;
        let end = rest
            .iter()
            .position(|s| s.t_ms / MS_PER_SECOND != sec)
            .unwrap_or(rest.len());
        let (window, tail) = rest.split_at(end);
        rest = tail;
        if window.len() < 2 || (window.len() as u64) * 2 < u64::from(sample_rate_hz) {
            continue;
        }
        xs.clear();
        ys.clear();
        zs.clear();
        for s in window {
            xs.push(s.x);
            ys.push(s.y);
            zs.push(s.z);
        }
        let (Ok(x), Ok(y), Ok(z)) = (AxisWindow::new(&xs), AxisWindow::new(&ys), AxisWindow::new(&zs))
        else {
            continue;
        };
        seconds.push(ex.window_features(x, y, z).expect("equal lengths"));
    }
    if seconds.len() < MIN_VALID_SECONDS {
        return None;
    }
    minute_aggregate(&seconds).ok()
}

/// Groups a time-ordered sample stream into whole minutes.
#[derive(Debug, Default)]
pub struct MinuteAccumulator {
    minute: Option<u64>,
    samples: Vec<AccelSample>,
}

impl MinuteAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a sample; returns the previous minute once a sample from a later
    /// minute arrives.
    pub fn push(&mut self, s: AccelSample) -> Option<(u64, Vec<AccelSample>)> {
        let m = s.t_ms / MS_PER_MINUTE;
        let done = match self.minute {
            Some(cur) if cur != m => self.take(),
            _ => None,
        };
        self.minute = Some(m);
        self.samples.push(s);
        done
    }

    /// Flushes the minute in progress.
    pub fn finish(&mut self) -> Option<(u64, Vec<AccelSample>)> {
        self.take()
    }

    pub fn current_minute(&self) -> Option<u64> {
        self.minute
    }

    fn take(&mut self) -> Option<(u64, Vec<AccelSample>)> {
        let m = self.minute.take()?;
        Some((m, std::mem::take(&mut self.samples)))
    }
}
