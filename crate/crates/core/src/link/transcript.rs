//! Human-readable session log: one message per line, `> ` for messages the
//! gateway received and `< ` for messages it sent, in processing order.

use std::io::BufRead;

use thiserror::Error;

use super::{Message, ProtocolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Wearable to gateway.
    Inbound,
    /// Gateway to wearable.
    Outbound,
}

impl Direction {
    fn prefix(self) -> &'static str {
        match self {
            Direction::Inbound => "> ",
            Direction::Outbound => "< ",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranscriptError {
    #[error("transcript line {line}: {source}")]
    Message { line: usize, source: ProtocolError },
    #[error("transcript line {0}: expected `> ` or `< ` prefix")]
    Prefix(usize),
    #[error("transcript: {0}")]
    Io(String),
}

/// `encoded` is a canonical line as produced by [`Message::encode`].
pub fn transcript_line(dir: Direction, encoded: &str) -> String {
    format!("{}{}", dir.prefix(), encoded)
}

pub fn parse_transcript<R: BufRead>(r: R) -> Result<Vec<(Direction, Message)>, TranscriptError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| TranscriptError::Io(e.to_string()))?;
        let n = i + 1;
        let (dir, body) = if let Some(b) = line.strip_prefix("> ") {
            (Direction::Inbound, b)
        } else if let Some(b) = line.strip_prefix("< ") {
            (Direction::Outbound, b)
        } else {
            return Err(TranscriptError::Prefix(n));
        };
        let msg = Message::decode(body.as_bytes()).map_err(|source| TranscriptError::Message { line: n, source })?;
        out.push((dir, msg));
    }
    Ok(out)
}
