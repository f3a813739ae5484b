//! Newline-delimited JSON messages between wearable and gateway.
//!
//! Encoding is canonical: `type` first, then the variant's fields in a fixed
//! order, no whitespace, `\n` terminator.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::ProtocolError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Message {
    #[serde(rename = "HELLO")]
    Hello { patient_id: String, sample_rate_hz: u32 },
    #[serde(rename = "ACC")]
    Acc { t_ms: u64, x: f64, y: f64, z: f64 },
    #[serde(rename = "HRQ")]
    Hrq { minute_index: u64 },
    #[serde(rename = "HRR")]
    Hrr { minute_index: u64, bpm: f64 },
    #[serde(rename = "PRED")]
    Pred {
        minute_index: u64,
        bpm: f64,
        variance: f64,
        queried: bool,
    },
    #[serde(rename = "BYE")]
    Bye,
}

const TYPES: [(&str, &[&str]); 6] = [
    ("HELLO", &["patient_id", "sample_rate_hz"]),
    ("ACC", &["t_ms", "x", "y", "z"]),
    ("HRQ", &["minute_index"]),
    ("HRR", &["minute_index", "bpm"]),
    ("PRED", &["minute_index", "bpm", "variance", "queried"]),
    ("BYE", &[]),
];

impl Message {
    pub fn type_tag(&self) -> &'static str {
        match self {
            Message::Hello { .. } => "HELLO",
            Message::Acc { .. } => "ACC",
            Message::Hrq { .. } => "HRQ",
            Message::Hrr { .. } => "HRR",
            Message::Pred { .. } => "PRED",
            Message::Bye => "BYE",
        }
    }

    fn check_finite(&self) -> Result<(), ProtocolError> {
        let fields: &[(&'static str, f64)] = match self {
            Message::Acc { x, y, z, .. } => &[("x", *x), ("y", *y), ("z", *z)],
            Message::Hrr { bpm, .. } => &[("bpm", *bpm)],
            Message::Pred { bpm, variance, .. } => &[("bpm", *bpm), ("variance", *variance)],
            _ => &[],
        };
        match fields.iter().find(|(_, v)| !v.is_finite()) {
            Some((name, _)) => Err(ProtocolError::NonFinite {
                msg_type: self.type_tag(),
                field: name,
            }),
            None => Ok(()),
        }
    }

    /// Canonical line, including the trailing `\n`.
    pub fn encode(&self) -> Result<String, ProtocolError> {
        self.check_finite()?;
        let mut s = serde_json::to_string(self).expect("message serializes");
        s.push('\n');
        Ok(s)
    }

    /// Parses one line; a single trailing `\n` (or `\r\n`) is allowed.
    pub fn decode(line: &[u8]) -> Result<Message, ProtocolError> {
        let line = line.strip_suffix(b"\n").unwrap_or(line);
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        if line.contains(&b'\n') {
            return Err(ProtocolError::Malformed("embedded newline".into()));
        }
        let text = std::str::from_utf8(line).map_err(|_| ProtocolError::Malformed("invalid UTF-8".into()))?;

        let mut stream = serde_json::Deserializer::from_str(text).into_iter::<Value>();
        let value = match stream.next() {
            Some(Ok(v)) => v,
            Some(Err(e)) => return Err(ProtocolError::Malformed(e.to_string())),
            None => return Err(ProtocolError::Malformed("empty line".into())),
        };
        if !text[stream.byte_offset()..].trim().is_empty() {
            return Err(ProtocolError::TrailingGarbage);
        }
        let Value::Object(mut obj) = value else {
            return Err(ProtocolError::Malformed("not a JSON object".into()));
        };
        let tag = match obj.remove("type") {
            Some(Value::String(t)) => t,
            Some(_) => return Err(ProtocolError::Malformed("`type` is not a string".into())),
            None => return Err(ProtocolError::MissingType),
        };
        let Some(&(msg_type, fields)) = TYPES.iter().find(|(t, _)| *t == tag) else {
            return Err(ProtocolError::UnknownType(tag));
        };
        if let Some(field) = fields.iter().find(|f| !obj.contains_key(**f)) {
            return Err(ProtocolError::MissingField { msg_type, field });
        }
        if let Some(extra) = obj.keys().find(|k| !fields.contains(&k.as_str())) {
            return Err(ProtocolError::UnknownField {
                msg_type,
                field: extra.clone(),
            });
        }
        let mut tagged = Map::with_capacity(obj.len() + 1);
        tagged.insert("type".into(), Value::String(tag));
        tagged.extend(obj);
        let msg: Message = serde_json::from_value(Value::Object(tagged)).map_err(|e| {
            ProtocolError::InvalidField {
                msg_type,
                detail: e.to_string(),
            }
        })?;
        msg.check_finite()?;
        Ok(msg)
    }
}
