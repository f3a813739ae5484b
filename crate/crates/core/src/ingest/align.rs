use super::{AccelSample, HrSample, IngestError, MinuteRecord};
use crate::features::{minute_features, FeatureExtractor, MinuteAccumulator};

/// Streaming minute aligner: feed samples in time order, collect records for
/// every minute that has both a heart-rate reading and enough valid
/// one-second windows. Minute `m` covers `[m*60000, (m+1)*60000)` ms.
pub struct MinuteAligner<'a> {
    hr: &'a [HrSample],
    next_hr: usize,
    sample_rate_hz: u32,
    acc: MinuteAccumulator,
    extractor: FeatureExtractor,
}

impl<'a> MinuteAligner<'a> {
    pub fn new(hr: &'a [HrSample], sample_rate_hz: u32) -> Self {
        Self {
            hr,
            next_hr: 0,
            sample_rate_hz,
            acc: MinuteAccumulator::new(),
            extractor: FeatureExtractor::new(),
        }
    }

    pub fn push(&mut self, s: AccelSample) -> Option<MinuteRecord> {
        let (m, samples) = self.acc.push(s)?;
        self.close(m, &samples)
    }

    pub fn finish(&mut self) -> Option<MinuteRecord> {
        let (m, samples) = self.acc.finish()?;
        self.close(m, &samples)
    }

    fn close(&mut self, minute: u64, samples: &[AccelSample]) -> Option<MinuteRecord> {
        while self.next_hr < self.hr.len() && self.hr[self.next_hr].minute_index < minute {
            self.next_hr += 1;
        }
        let hr = self.hr.get(self.next_hr).filter(|h| h.minute_index == minute)?;
        let features = minute_features(samples, self.sample_rate_hz, &mut self.extractor)?;
        Some(MinuteRecord {
            minute_index: minute,
            features,
            bpm: Some(hr.bpm),
            phase: 0,
        })
    }
}

/// Pairs each heart-rate minute with features of the same minute's
/// acceleration. Minutes without enough acceleration are dropped.
pub fn align_minutes(
    accel: &[AccelSample],
    hr: &[HrSample],
    sample_rate_hz: u32,
) -> Result<Vec<MinuteRecord>, IngestError> {
    let mut aligner = MinuteAligner::new(hr, sample_rate_hz);
    let mut out: Vec<MinuteRecord> = accel.iter().filter_map(|&s| aligner.push(s)).collect();
    out.extend(aligner.finish());
    if out.is_empty() {
        return Err(IngestError::EmptyAlignment);
    }
    Ok(out)
}

/// Phase of `minute` given the first minute of every phase.
pub fn phase_of(minute: u64, boundaries: &[u64]) -> u32 {
    boundaries
        .iter()
        .filter(|&&b| b <= minute)
        .count()
        .saturating_sub(1) as u32
}

pub fn label_phases(records: &mut [MinuteRecord], boundaries: &[u64]) {
    for r in records {
        r.phase = phase_of(r.minute_index, boundaries);
    }
}
