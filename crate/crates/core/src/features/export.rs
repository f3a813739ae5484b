use std::io::{BufRead, Write};

use super::{FeatureVector, FEATURE_NAMES, N_FEATURES};
use crate::ingest::csv::{parse_field, LineReader};
use crate::ingest::{check_bpm, IngestError, MinuteRecord};

/// Columns preceding the 39 feature names.
pub const FEATURE_CSV_PREFIX: [&str; 3] = ["minute_index", "phase", "bpm"];

fn header() -> String {
    FEATURE_CSV_PREFIX
        .iter()
        .chain(FEATURE_NAMES.iter())
        .copied()
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes the feature matrix. A missing bpm is an empty field.
pub fn write_feature_csv<W: Write>(mut w: W, records: &[MinuteRecord]) -> std::io::Result<()> {
    writeln!(w, "{}", header())?;
    for r in records {
        write!(w, "{},{},", r.minute_index, r.phase)?;
        if let Some(b) = r.bpm {
            write!(w, "{b}")?;
        }
        for v in r.features.as_array() {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn parse_feature_csv<R: BufRead>(src: R) -> Result<Vec<MinuteRecord>, IngestError> {
    let expected = header();
    let mut lines = LineReader::new(src);
    lines.expect_header(&expected)?;
    let mut out: Vec<MinuteRecord> = Vec::new();
    while let Some((line_no, line)) = lines.next_line()? {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 + N_FEATURES {
            return Err(IngestError::Parse {
                line: line_no,
                reason: format!("expected {} fields, found {}", 3 + N_FEATURES, fields.len()),
            });
        }
        let minute_index: u64 = parse_field(fields[0], "minute_index", line_no)?;
        let phase: u32 = parse_field(fields[1], "phase", line_no)?;
        let bpm = if fields[2].is_empty() {
            None
        } else {
            let b: f64 = parse_field(fields[2], "bpm", line_no)?;
            check_bpm(b, line_no)?;
            Some(b)
        };
        let mut values = [0.0; N_FEATURES];
        for (i, (v, f)) in values.iter_mut().zip(&fields[3..]).enumerate() {
            *v = parse_field(f, FEATURE_NAMES[i], line_no)?;
        }
        if let Some(prev) = out.last() {
            if minute_index <= prev.minute_index {
                return Err(IngestError::Ordering {
                    line: line_no,
                    prev: prev.minute_index,
                    current: minute_index,
                });
            }
        }
        out.push(MinuteRecord {
            minute_index,
            features: FeatureVector::from_array(values),
            bpm,
            phase,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(m: u64, bpm: Option<f64>) -> MinuteRecord {
        let mut a = [0.0; N_FEATURES];
        for (i, v) in a.iter_mut().enumerate() {
            *v = (i as f64 + m as f64) * 0.1 - 1.0;
        }
        MinuteRecord {
            minute_index: m,
            features: FeatureVector::from_array(a),
            bpm,
            phase: (m / 2) as u32,
        }
    }

    #[test]
    fn header_layout() {
        let h = header();
        assert!(h.starts_with("minute_index,phase,bpm,x_min,x_max,"));
        assert!(h.ends_with(",z_spec_energy,z_spec_entropy"));
    }

    #[test]
    fn roundtrip_with_missing_bpm() {
        let recs = vec![record(0, Some(61.5)), record(1, None), record(4, Some(100.0))];
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &recs).unwrap();
        let back = parse_feature_csv(&buf[..]).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn rejects_short_rows_and_bad_bpm() {
        let text = format!("{}\n0,0,70,1,2\n", header());
        assert!(matches!(
            parse_feature_csv(text.as_bytes()),
            Err(IngestError::Parse { line: 2, .. })
        ));
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &[record(0, Some(70.0))]).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(",70,", ",7,");
        assert!(matches!(
            parse_feature_csv(text.as_bytes()),
            Err(IngestError::Range { line: 2, .. })
        ));
    }
}
