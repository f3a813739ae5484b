use std::io::{BufReader, BufWriter, Write};
use std::sync::{Mutex, OnceLock};
use std::time::Duration;

use super::{read_message, Duplex, EnergyLedger, EnergyModel, Message, ProtocolError};
use crate::ingest::{AccelSample, HrSample, IngestError};

#[derive(Debug, Clone, PartialEq)]
pub struct WearableConfig {
    pub patient_id: String,
    pub sample_rate_hz: u32,
    pub energy: EnergyModel,
    /// Replay speed relative to wall-clock time (`1.0` = real time). `None`
    /// streams as fast as the link allows.
    pub pace: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedPrediction {
    pub minute_index: u64,
    pub bpm: f64,
    pub variance: f64,
    pub queried: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WearableOutcome {
    pub ledger: EnergyLedger,
    pub predictions: Vec<ReceivedPrediction>,
}

/// Streams `samples` to a gateway and answers its heart-rate queries from
/// `hr` (sorted by minute) until the gateway says BYE.
pub fn wearable_replay<S, I>(
    stream: S,
    samples: I,
    hr: &[HrSample],
    cfg: &WearableConfig,
) -> Result<WearableOutcome, ProtocolError>
where
    S: Duplex,
    I: IntoIterator<Item = Result<AccelSample, IngestError>>,
    I::IntoIter: Send,
{
    cfg.energy.validate().map_err(ProtocolError::Input)?;
    if let Some(p) = cfg.pace {
        if !(p.is_finite() && p > 0.0) {
            return Err(ProtocolError::Input("pace must be finite and > 0".into()));
        }
    }
    let reader = BufReader::with_capacity(1 << 16, stream.try_clone()?);
    let ctl = stream.try_clone()?;
    let writer = Mutex::new(BufWriter::with_capacity(1 << 16, stream));
    let samples = samples.into_iter();

    // whichever side fails first shuts the socket down, which makes the
    // other side fail too; report the first error, not the echo
    let first = OnceLock::new();
    let fail = |e: ProtocolError| {
        let _ = first.set(e.clone());
        let _ = ctl.shutdown();
        e
    };

    std::thread::scope(|s| {
        let sender = s.spawn(|| send_all(&writer, samples, cfg).map_err(fail));
        let answered = answer_queries(reader, &writer, hr).map_err(fail);
        let sent = sender.join().expect("sender thread panicked");
        if let Some(e) = first.get() {
            return Err(e.clone());
        }
        let minutes = sent?;
        let (queries, predictions) = answered?;
        Ok(WearableOutcome {
            ledger: EnergyLedger::new(&cfg.energy, minutes, queries),
            predictions,
        })
    })
}

fn write_locked<W: Write>(w: &Mutex<W>, bytes: &[u8]) -> Result<(), ProtocolError> {
    let mut w = w.lock().expect("writer lock poisoned");
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

/// Sends HELLO, every sample and BYE; returns the number of distinct minutes
/// streamed. Samples are flushed a minute at a time (a second at a time when
/// paced).
fn send_all<W: Write>(
    w: &Mutex<W>,
    samples: impl Iterator<Item = Result<AccelSample, IngestError>>,
    cfg: &WearableConfig,
) -> Result<u64, ProtocolError> {
    let hello = Message::Hello {
        patient_id: cfg.patient_id.clone(),
        sample_rate_hz: cfg.sample_rate_hz,
    };
    write_locked(w, hello.encode()?.as_bytes())?;

    let chunk_ms = if cfg.pace.is_some() { 1_000 } else { 60_000 };
    let mut batch = String::with_capacity(1 << 16);
    let mut chunk = None;
    let mut minute = None;
    let mut minutes = 0;
    let mut prev_t: Option<u64> = None;
    for s in samples {
        let s = s.map_err(|e| ProtocolError::Input(e.to_string()))?;
        if let Some(prev) = prev_t.filter(|&p| s.t_ms <= p) {
            return Err(ProtocolError::Ordering { prev, current: s.t_ms });
        }
        if let (Some(p), Some(prev)) = (cfg.pace, prev_t) {
            std::thread::sleep(Duration::from_secs_f64((s.t_ms - prev) as f64 / 1000.0 / p));
        }
        prev_t = Some(s.t_ms);
        if chunk != Some(s.t_ms / chunk_ms) {
            if !batch.is_empty() {
                write_locked(w, batch.as_bytes())?;
                batch.clear();
            }
            chunk = Some(s.t_ms / chunk_ms);
        }
        if minute != Some(s.t_ms / 60_000) {
            minute = Some(s.t_ms / 60_000);
            minutes += 1;
        }
        batch.push_str(
            &Message::Acc {
                t_ms: s.t_ms,
                x: s.x,
                y: s.y,
                z: s.z,
            }
            .encode()?,
        );
    }
    batch.push_str(&Message::Bye.encode()?);
    write_locked(w, batch.as_bytes())?;
    Ok(minutes)
}

fn answer_queries<R: std::io::BufRead, W: Write>(
    mut r: R,
    w: &Mutex<W>,
    hr: &[HrSample],
) -> Result<(u64, Vec<ReceivedPrediction>), ProtocolError> {
    let mut buf = Vec::with_capacity(128);
    let mut queries = 0;
    let mut preds = Vec::new();
    loop {
        match read_message(&mut r, &mut buf)? {
            None => return Err(ProtocolError::Closed),
            Some(Message::Hrq { minute_index }) => {
                let i = hr
                    .binary_search_by_key(&minute_index, |h| h.minute_index)
                    .map_err(|_| ProtocolError::NoReading(minute_index))?;
                queries += 1;
                let reply = Message::Hrr {
                    minute_index,
                    bpm: hr[i].bpm,
                };
                write_locked(w, reply.encode()?.as_bytes())?;
            }
            Some(Message::Pred { minute_index, bpm, variance, queried }) => preds.push(ReceivedPrediction {
                minute_index,
                bpm,
                variance,
                queried,
            }),
            Some(Message::Bye) => return Ok((queries, preds)),
            Some(other) => {
                return Err(ProtocolError::Unexpected {
                    expected: "HRQ, PRED or BYE",
                    got: other.type_tag(),
                })
            }
        }
    }
}
