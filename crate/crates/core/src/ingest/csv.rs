//! Fixed-header CSV readers and writers.
//!
//! Rows are split on `,` by hand: the formats have no quoting and the accel
//! files of a multi-week recording run to a hundred million lines.

use std::io::{BufRead, Write};
use std::str::FromStr;

use super::{check_bpm, AccelSample, HrSample, IngestError};

pub const ACCEL_HEADER: &str = "t_ms,x,y,z";
pub const HR_HEADER: &str = "minute_index,bpm";

/// A value that can appear in a CSV field.
pub(crate) trait Field: FromStr {
    fn acceptable(&self) -> bool {
        true
    }
}

impl Field for u64 {}
impl Field for u32 {}
impl Field for f64 {
    fn acceptable(&self) -> bool {
        self.is_finite()
    }
}

pub(crate) fn parse_field<T: Field>(s: &str, name: &str, line: usize) -> Result<T, IngestError> {
    match s.trim().parse::<T>() {
        Ok(v) if v.acceptable() => Ok(v),
        Ok(_) => Err(IngestError::Parse {
            line,
            reason: format!("{name}: `{s}` is not finite"),
        }),
        Err(_) => Err(IngestError::Parse {
            line,
            reason: format!("{name}: `{s}` is not a valid number"),
        }),
    }
}

/// Numbered UTF-8 lines without their terminators.
pub(crate) struct LineReader<R> {
    src: R,
    buf: Vec<u8>,
    line: usize,
}

impl<R: BufRead> LineReader<R> {
    pub(crate) fn new(src: R) -> Self {
        Self {
            src,
            buf: Vec::with_capacity(128),
            line: 0,
        }
    }

    pub(crate) fn next_line(&mut self) -> Result<Option<(usize, &str)>, IngestError> {
        self.buf.clear();
        if self.src.read_until(b'\n', &mut self.buf)? == 0 {
            return Ok(None);
        }
        self.line += 1;
        let mut bytes = &self.buf[..];
        if let Some(b) = bytes.strip_suffix(b"\n") {
            bytes = b;
        }
        if let Some(b) = bytes.strip_suffix(b"\r") {
            bytes = b;
        }
        let text = std::str::from_utf8(bytes).map_err(|_| IngestError::Parse {
            line: self.line,
            reason: "invalid UTF-8".into(),
        })?;
        if text.is_empty() {
            return Err(IngestError::Parse {
                line: self.line,
                reason: "empty line".into(),
            });
        }
        Ok(Some((self.line, text)))
    }

    pub(crate) fn expect_header(&mut self, expected: &str) -> Result<(), IngestError> {
        let found = match self.next_line() {
            Ok(Some((_, h))) => h.to_string(),
            Ok(None) => String::new(),
            Err(IngestError::Parse { .. }) => String::from("<unreadable>"),
            Err(e) => return Err(e),
        };
        if found != expected {
            return Err(IngestError::Header {
                line: 1,
                expected: expected.to_string(),
                found,
            });
        }
        Ok(())
    }
}

fn split_exact<const N: usize>(line: &str, line_no: usize) -> Result<[&str; N], IngestError> {
    let mut out = [""; N];
    let mut parts = line.split(',');
    for slot in out.iter_mut() {
        *slot = parts.next().ok_or_else(|| arity(line, line_no, N))?;
    }
    if parts.next().is_some() {
        return Err(arity(line, line_no, N));
    }
    Ok(out)
}

fn arity(line: &str, line_no: usize, n: usize) -> IngestError {
    IngestError::Parse {
        line: line_no,
        reason: format!("expected {n} fields, found {}", line.split(',').count()),
    }
}

/// Streaming accelerometer reader; validates the header on construction and
/// strict timestamp ordering while iterating. Stops after the first error.
pub struct AccelReader<R> {
    lines: LineReader<R>,
    prev: Option<u64>,
    failed: bool,
}

impl<R: BufRead> AccelReader<R> {
    pub fn new(src: R) -> Result<Self, IngestError> {
        let mut lines = LineReader::new(src);
        lines.expect_header(ACCEL_HEADER)?;
        Ok(Self {
            lines,
            prev: None,
            failed: false,
        })
    }

    fn read_one(&mut self) -> Result<Option<AccelSample>, IngestError> {
        let Some((n, line)) = self.lines.next_line()? else {
            return Ok(None);
        };
        let [t, x, y, z] = split_exact::<4>(line, n)?;
        let s = AccelSample {
            t_ms: parse_field(t, "t_ms", n)?,
            x: parse_field(x, "x", n)?,
            y: parse_field(y, "y", n)?,
            z: parse_field(z, "z", n)?,
        };
        if let Some(prev) = self.prev {
            if s.t_ms <= prev {
                return Err(IngestError::Ordering {
                    line: n,
                    prev,
                    current: s.t_ms,
                });
            }
        }
        self.prev = Some(s.t_ms);
        Ok(Some(s))
    }
}

impl<R: BufRead> Iterator for AccelReader<R> {
    type Item = Result<AccelSample, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.read_one() {
            Ok(v) => v.map(Ok),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

pub fn parse_accel_csv<R: BufRead>(src: R) -> Result<Vec<AccelSample>, IngestError> {
    AccelReader::new(src)?.collect()
}

pub fn parse_hr_csv<R: BufRead>(src: R) -> Result<Vec<HrSample>, IngestError> {
    let mut lines = LineReader::new(src);
    lines.expect_header(HR_HEADER)?;
    let mut out: Vec<HrSample> = Vec::new();
    while let Some((n, line)) = lines.next_line()? {
        let [m, b] = split_exact::<2>(line, n)?;
        let minute_index: u64 = parse_field(m, "minute_index", n)?;
        let bpm: f64 = parse_field(b, "bpm", n)?;
        check_bpm(bpm, n)?;
        if let Some(prev) = out.last() {
            if minute_index <= prev.minute_index {
                return Err(IngestError::Ordering {
                    line: n,
                    prev: prev.minute_index,
                    current: minute_index,
                });
            }
        }
        out.push(HrSample { minute_index, bpm });
    }
    Ok(out)
}

/// Incremental accelerometer CSV writer.
pub struct AccelCsvWriter<W: Write> {
    w: W,
}

impl<W: Write> AccelCsvWriter<W> {
    pub fn new(mut w: W) -> std::io::Result<Self> {
        writeln!(w, "{ACCEL_HEADER}")?;
        Ok(Self { w })
    }

    pub fn write(&mut self, s: &AccelSample) -> std::io::Result<()> {
        writeln!(self.w, "{},{},{},{}", s.t_ms, s.x, s.y, s.z)
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.w.flush()?;
        Ok(self.w)
    }
}

pub fn write_accel_csv<W: Write>(w: W, samples: &[AccelSample]) -> std::io::Result<()> {
    let mut out = AccelCsvWriter::new(w)?;
    for s in samples {
        out.write(s)?;
    }
    out.finish().map(|_| ())
}

pub fn write_hr_csv<W: Write>(mut w: W, samples: &[HrSample]) -> std::io::Result<()> {
    writeln!(w, "{HR_HEADER}")?;
    for s in samples {
        writeln!(w, "{},{}", s.minute_index, s.bpm)?;
    }
    w.flush()
}
