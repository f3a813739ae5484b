//! Wearable/gateway split over a byte stream.
//!
//! The wearable streams raw acceleration and answers heart-rate queries; the
//! gateway extracts features, runs the online loop and sends a prediction
//! for every minute. Messages are single-line JSON objects.

mod energy;
mod gateway;
mod message;
mod transcript;
mod wearable;

use std::io::{self, BufRead, Read};
use std::net::{Shutdown, TcpStream};
use std::os::unix::net::UnixStream;

use thiserror::Error;

pub use energy::{EnergyLedger, EnergyModel};
pub use gateway::{gateway_accept, gateway_serve, gateway_session, GatewayConfig, GatewayOutcome, SessionSummary};
pub use message::Message;
pub use transcript::{parse_transcript, transcript_line, Direction, TranscriptError};
pub use wearable::{wearable_replay, ReceivedPrediction, WearableConfig, WearableOutcome};

/// Longest accepted line, newline included.
pub const MAX_LINE_BYTES: usize = 64 * 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("malformed message: trailing data after JSON object")]
    TrailingGarbage,
    #[error("message has no `type`")]
    MissingType,
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("{msg_type}: missing field `{field}`")]
    MissingField { msg_type: &'static str, field: &'static str },
    #[error("{msg_type}: unknown field `{field}`")]
    UnknownField { msg_type: &'static str, field: String },
    #[error("{msg_type}: {detail}")]
    InvalidField { msg_type: &'static str, detail: String },
    #[error("{msg_type}: field `{field}` is not finite")]
    NonFinite { msg_type: &'static str, field: &'static str },
    #[error("line longer than {0} bytes")]
    LineTooLong(usize),
    #[error("expected {expected}, got {got}")]
    Unexpected { expected: &'static str, got: &'static str },
    #[error("HRR for minute {got}, expected minute {expected}")]
    MinuteMismatch { expected: u64, got: u64 },
    #[error("samples out of order: {prev} ms then {current} ms")]
    Ordering { prev: u64, current: u64 },
    #[error("invalid HELLO: {0}")]
    Hello(String),
    #[error("no heart-rate reading for minute {0}")]
    NoReading(u64),
    #[error("peer timed out")]
    Timeout,
    #[error("connection closed before BYE")]
    Closed,
    #[error("i/o: {0}")]
    Io(String),
    #[error("input: {0}")]
    Input(String),
    #[error("model: {0}")]
    Model(String),
}

impl From<io::Error> for ProtocolError {
    fn from(e: io::Error) -> Self {
        match e.kind() {
            io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => ProtocolError::Timeout,
            _ => ProtocolError::Io(e.to_string()),
        }
    }
}

/// A connected, bidirectional stream that can be split between threads.
pub trait Duplex: Read + io::Write + Send + Sync + Sized {
    fn try_clone(&self) -> io::Result<Self>;
    fn shutdown(&self) -> io::Result<()>;
}

impl Duplex for TcpStream {
    fn try_clone(&self) -> io::Result<Self> {
        TcpStream::try_clone(self)
    }
    fn shutdown(&self) -> io::Result<()> {
        TcpStream::shutdown(self, Shutdown::Both)
    }
}

impl Duplex for UnixStream {
    fn try_clone(&self) -> io::Result<Self> {
        UnixStream::try_clone(self)
    }
    fn shutdown(&self) -> io::Result<()> {
        UnixStream::shutdown(self, Shutdown::Both)
    }
}

/// Reads and decodes one line. `Ok(None)` on a clean end of stream.
pub(crate) fn read_message<R: BufRead>(r: &mut R, buf: &mut Vec<u8>) -> Result<Option<Message>, ProtocolError> {
    buf.clear();
    let n = r.by_ref().take(MAX_LINE_BYTES as u64 + 1).read_until(b'\n', buf)?;
    if n == 0 {
        return Ok(None);
    }
    if buf.last() != Some(&b'\n') {
        if buf.len() > MAX_LINE_BYTES {
            return Err(ProtocolError::LineTooLong(MAX_LINE_BYTES));
        }
        return Err(ProtocolError::Malformed("truncated line".into()));
    }
    Message::decode(buf).map(Some)
}
