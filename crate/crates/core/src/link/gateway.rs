use std::collections::VecDeque;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::time::Duration;

use serde::Serialize;
use serde_json::json;

use super::transcript::{transcript_line, Direction};
use super::{read_message, EnergyLedger, EnergyModel, Message, ProtocolError};
use crate::eval::{mae, mse};
use crate::features::{minute_features, FeatureExtractor, MinuteAccumulator};
use crate::ingest::{AccelSample, MinuteRecord};
use crate::ppaw::{PpawConfig, PpawError, PpawSession, SensorError, StepOutcome};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GatewayConfig {
    pub ppaw: PpawConfig,
    pub energy: EnergyModel,
}

/// End-of-session report. The gateway only sees heart rate for minutes it
/// queried, so its error figures cover queried minutes after
/// initialisation, scored with the prediction made before the query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSummary {
    pub patient_id: Option<String>,
    pub completed: bool,
    pub error: Option<String>,
    pub n_minutes: u64,
    pub n_queried: u64,
    pub query_fraction: f64,
    pub mae_queried: Option<f64>,
    pub mse_queried: Option<f64>,
    pub energy: EnergyLedger,
    pub config: serde_json::Value,
}

impl SessionSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatewayOutcome {
    pub summary: SessionSummary,
    pub trace: Vec<StepOutcome>,
    /// Why the session ended early; the summary and trace are then partial.
    pub error: Option<ProtocolError>,
}

struct Io<'t, R, W> {
    reader: R,
    writer: W,
    buf: Vec<u8>,
    /// Messages read while waiting for an HRR, not yet processed.
    pending: VecDeque<Message>,
    transcript: Option<&'t mut dyn Write>,
}

impl<R: BufRead, W: Write> Io<'_, R, W> {
    fn log(&mut self, dir: Direction, line: &str) -> Result<(), ProtocolError> {
        if let Some(t) = self.transcript.as_mut() {
            t.write_all(transcript_line(dir, line).as_bytes())?;
        }
        Ok(())
    }

    fn read(&mut self) -> Result<Message, ProtocolError> {
        read_message(&mut self.reader, &mut self.buf)?.ok_or(ProtocolError::Closed)
    }

    /// Next message to process, logged as it is taken.
    fn next(&mut self) -> Result<Message, ProtocolError> {
        let msg = match self.pending.pop_front() {
            Some(m) => m,
            None => self.read()?,
        };
        self.log(Direction::Inbound, &msg.encode()?)?;
        Ok(msg)
    }

    fn send(&mut self, msg: &Message) -> Result<(), ProtocolError> {
        let line = msg.encode()?;
        self.writer.write_all(line.as_bytes())?;
        self.writer.flush()?;
        self.log(Direction::Outbound, &line)
    }

    fn query(&mut self, minute: u64) -> Result<f64, ProtocolError> {
        self.send(&Message::Hrq { minute_index: minute })?;
        loop {
            match self.read()? {
                Message::Hrr { minute_index, bpm } => {
                    let msg = Message::Hrr { minute_index, bpm };
                    self.log(Direction::Inbound, &msg.encode()?)?;
                    if minute_index != minute {
                        return Err(ProtocolError::MinuteMismatch {
                            expected: minute,
                            got: minute_index,
                        });
                    }
                    return Ok(bpm);
                }
                m @ (Message::Acc { .. } | Message::Bye) => self.pending.push_back(m),
                other => {
                    return Err(ProtocolError::Unexpected {
                        expected: "HRR",
                        got: other.type_tag(),
                    })
                }
            }
        }
    }
}

struct Gateway<'t, R, W> {
    io: Io<'t, R, W>,
    session: PpawSession,
    extractor: FeatureExtractor,
    acc: MinuteAccumulator,
    sample_rate_hz: u32,
    patient_id: Option<String>,
    last_t: Option<u64>,
    minutes_sensed: u64,
    queries: u64,
    trace: Vec<StepOutcome>,
}

impl<R: BufRead, W: Write> Gateway<'_, R, W> {
    fn run(&mut self) -> Result<(), ProtocolError> {
        match self.io.next()? {
            Message::Hello { patient_id, sample_rate_hz } => {
                if !(2..=1000).contains(&sample_rate_hz) {
                    return Err(ProtocolError::Hello(format!(
                        "sample_rate_hz {sample_rate_hz} outside [2, 1000]"
                    )));
                }
                self.patient_id = Some(patient_id);
                self.sample_rate_hz = sample_rate_hz;
            }
            other => {
                return Err(ProtocolError::Unexpected {
                    expected: "HELLO",
                    got: other.type_tag(),
                })
            }
        }
        loop {
            match self.io.next()? {
                Message::Acc { t_ms, x, y, z } => {
                    if let Some(prev) = self.last_t.filter(|&p| t_ms <= p) {
                        return Err(ProtocolError::Ordering { prev, current: t_ms });
                    }
                    self.last_t = Some(t_ms);
                    if self.acc.current_minute() != Some(t_ms / 60_000) {
                        self.minutes_sensed += 1;
                    }
                    if let Some((m, samples)) = self.acc.push(AccelSample { t_ms, x, y, z }) {
                        self.close_minute(m, &samples)?;
                    }
                }
                Message::Bye => {
                    if let Some((m, samples)) = self.acc.finish() {
                        self.close_minute(m, &samples)?;
                    }
                    return self.io.send(&Message::Bye);
                }
                other => {
                    return Err(ProtocolError::Unexpected {
                        expected: "ACC or BYE",
                        got: other.type_tag(),
                    })
                }
            }
        }
    }

    fn close_minute(&mut self, minute: u64, samples: &[AccelSample]) -> Result<(), ProtocolError> {
        let Some(features) = minute_features(samples, self.sample_rate_hz, &mut self.extractor) else {
            return Ok(());
        };
        let record = MinuteRecord {
            minute_index: minute,
            features,
            bpm: None,
            phase: 0,
        };
        let io = &mut self.io;
        let queries = &mut self.queries;
        let mut link_err = None;
        let res = self.session.process(&record, |r| {
            *queries += 1;
            io.query(r.minute_index).map_err(|e| {
                let s = SensorError(e.to_string());
                link_err = Some(e);
                s
            })
        });
        let out = match res {
            Ok(o) => o,
            Err(PpawError::Sensor(s)) => {
                return Err(link_err.unwrap_or(ProtocolError::InvalidField {
                    msg_type: "HRR",
                    detail: s.0,
                }))
            }
            Err(e) => return Err(ProtocolError::Model(e.to_string())),
        };
        self.io.send(&Message::Pred {
            minute_index: minute,
            bpm: out.predicted_bpm,
            variance: out.variance,
            queried: out.queried,
        })?;
        self.trace.push(out);
        Ok(())
    }
}

fn summarize(
    cfg: &GatewayConfig,
    patient_id: Option<String>,
    trace: Vec<StepOutcome>,
    minutes_sensed: u64,
    queries: u64,
    error: Option<ProtocolError>,
) -> GatewayOutcome {
    let n = trace.len() as u64;
    let n_queried = trace.iter().filter(|o| o.queried).count() as u64;
    let (p, t): (Vec<f64>, Vec<f64>) = trace
        .iter()
        .skip(cfg.ppaw.history)
        .filter_map(|o| o.true_bpm.map(|t| (o.predicted_bpm, t)))
        .unzip();
    let mut config = serde_json::to_value(&cfg.ppaw).expect("config serializes");
    config["experiment"] = json!("gateway");
    config["energy_model"] = serde_json::to_value(cfg.energy).expect("model serializes");
    GatewayOutcome {
        summary: SessionSummary {
            patient_id,
            completed: error.is_none(),
            error: error.as_ref().map(|e| e.to_string()),
            n_minutes: n,
            n_queried,
            query_fraction: if n > 0 { n_queried as f64 / n as f64 } else { 0.0 },
            mae_queried: mae(&p, &t).ok(),
            mse_queried: mse(&p, &t).ok(),
            energy: EnergyLedger::new(&cfg.energy, minutes_sensed, queries),
            config,
        },
        trace,
        error,
    }
}

/// Runs one gateway session over an already connected stream. Always returns
/// an outcome; on failure it holds whatever was processed before the error.
pub fn gateway_session<R: BufRead, W: Write>(
    reader: R,
    writer: W,
    cfg: &GatewayConfig,
    transcript: Option<&mut dyn Write>,
) -> GatewayOutcome {
    let checked = cfg
        .ppaw
        .validate()
        .map_err(|e| ProtocolError::Model(e.to_string()))
        .and_then(|()| cfg.energy.validate().map_err(ProtocolError::Model));
    if let Err(e) = checked {
        return summarize(cfg, None, Vec::new(), 0, 0, Some(e));
    }
    let mut g = Gateway {
        io: Io {
            reader,
            writer,
            buf: Vec::with_capacity(128),
            pending: VecDeque::new(),
            transcript,
        },
        session: PpawSession::new(&cfg.ppaw).expect("config validated"),
        extractor: FeatureExtractor::new(),
        acc: MinuteAccumulator::new(),
        sample_rate_hz: 0,
        patient_id: None,
        last_t: None,
        minutes_sensed: 0,
        queries: 0,
        trace: Vec::new(),
    };
    let err = g.run().err();
    if let Some(t) = g.io.transcript.as_mut() {
        let _ = t.flush();
    }
    summarize(cfg, g.patient_id, g.trace, g.minutes_sensed, g.queries, err)
}

/// Accepts one connection and serves it. `timeout` bounds every read.
pub fn gateway_accept(
    listener: &TcpListener,
    cfg: &GatewayConfig,
    timeout: Option<Duration>,
    transcript: Option<&mut dyn Write>,
) -> Result<GatewayOutcome, ProtocolError> {
    let (stream, _) = listener.accept()?;
    stream.set_read_timeout(timeout)?;
    stream.set_nodelay(true)?;
    let reader = BufReader::with_capacity(1 << 16, stream.try_clone()?);
    let writer = BufWriter::new(stream);
    Ok(gateway_session(reader, writer, cfg, transcript))
}

/// Serves `sessions` connections concurrently, one thread each, and returns
/// their outcomes in accept order.
pub fn gateway_serve(
    listener: &TcpListener,
    cfg: &GatewayConfig,
    timeout: Option<Duration>,
    sessions: usize,
) -> Result<Vec<GatewayOutcome>, ProtocolError> {
    std::thread::scope(|s| {
        let mut handles = Vec::with_capacity(sessions);
        for _ in 0..sessions {
            let (stream, _) = listener.accept()?;
            stream.set_read_timeout(timeout)?;
            stream.set_nodelay(true)?;
            let reader = BufReader::with_capacity(1 << 16, stream.try_clone()?);
            handles.push(s.spawn(move || gateway_session(reader, BufWriter::new(stream), cfg, None)));
        }
        Ok(handles
            .into_iter()
            .map(|h| h.join().expect("gateway session panicked"))
            .collect())
    })
}
