use std::io::{BufRead, Write};

use super::StepOutcome;
use crate::ingest::csv::{parse_field, LineReader};
use crate::ingest::IngestError;

pub const TRACE_HEADER: &str =
    "minute_index,predicted_bpm,variance,queried,true_bpm,retrained_on_error,retrained_on_ttl";

pub fn write_trace_csv<W: Write>(mut w: W, outcomes: &[StepOutcome]) -> std::io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for o in outcomes {
        write!(w, "{},{},{},{},", o.minute_index, o.predicted_bpm, o.variance, o.queried)?;
        if let Some(t) = o.true_bpm {
            write!(w, "{t}")?;
        }
        writeln!(w, ",{},{}", o.retrained_on_error, o.retrained_on_ttl)?;
    }
    w.flush()
}

pub fn parse_trace_csv<R: BufRead>(src: R) -> Result<Vec<StepOutcome>, IngestError> {
    let mut lines = LineReader::new(src);
    lines.expect_header(TRACE_HEADER)?;
    let mut out: Vec<StepOutcome> = Vec::new();
    while let Some((n, line)) = lines.next_line()? {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(IngestError::Parse {
                line: n,
                reason: format!("expected 7 fields, found {}", f.len()),
            });
        }
        let queried = match f[3] {
            "true" => true,
            "false" => false,
            other => {
                return Err(IngestError::Parse {
                    line: n,
                    reason: format!("queried: `{other}` is not true/false"),
                })
            }
        };
        let true_bpm = if f[4].is_empty() {
            None
        } else {
            Some(parse_field::<f64>(f[4], "true_bpm", n)?)
        };
        if queried != true_bpm.is_some() {
            return Err(IngestError::Parse {
                line: n,
                reason: "true_bpm must be present exactly when queried".into(),
            });
        }
        let variance: f64 = parse_field(f[2], "variance", n)?;
        if variance < 0.0 {
            return Err(IngestError::Parse {
                line: n,
                reason: "variance must be >= 0".into(),
            });
        }
        let o = StepOutcome {
            minute_index: parse_field(f[0], "minute_index", n)?,
            predicted_bpm: parse_field(f[1], "predicted_bpm", n)?,
            variance,
            queried,
            true_bpm,
            retrained_on_error: parse_field(f[5], "retrained_on_error", n)?,
            retrained_on_ttl: parse_field(f[6], "retrained_on_ttl", n)?,
        };
        if let Some(prev) = out.last() {
            if o.minute_index <= prev.minute_index {
                return Err(IngestError::Ordering {
                    line: n,
                    prev: prev.minute_index,
                    current: o.minute_index,
                });
            }
        }
        out.push(o);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let t = vec![
            StepOutcome {
                minute_index: 3,
                predicted_bpm: 71.25,
                variance: 0.5,
                queried: true,
                true_bpm: Some(80.0),
                retrained_on_error: 2,
                retrained_on_ttl: 0,
            },
            StepOutcome {
                minute_index: 4,
                predicted_bpm: 79.0,
                variance: 0.0,
                queried: false,
                true_bpm: None,
                retrained_on_error: 0,
                retrained_on_ttl: 1,
            },
        ];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\n3,71.25,0.5,true,80,2,0\n4,79,0,false,,0,1\n"), "{text}");
        assert_eq!(parse_trace_csv(&buf[..]).unwrap(), t);
    }

    #[test]
    fn rejects_inconsistent_rows() {
        for row in ["1,70,0,true,,0,0", "1,70,0,false,70,0,0", "1,70,-1,false,,0,0", "1,70,0,yes,,0,0"] {
            let text = format!("{TRACE_HEADER}\n{row}\n");
            assert!(parse_trace_csv(text.as_bytes()).is_err(), "{row}");
        }
    }
}
