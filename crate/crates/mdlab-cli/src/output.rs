//! Artifact writing: CSV/JSON either to a file or to stdout.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! reimported value is bit-identical to the computed one and identical
//! configs produce byte-identical artifacts.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub enum Sink {
    Stdout(io::Stdout),
    File(BufWriter<File>),
}

impl Sink {
    pub fn open(path: Option<&Path>) -> io::Result<Self> {
        Ok(match path {
            None => Sink::Stdout(io::stdout()),
            Some(p) => Sink::File(BufWriter::new(File::create(p)?)),
        })
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Sink::Stdout(s) => s.write(buf),
            Sink::File(f) => f.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Stdout(s) => s.flush(),
            Sink::File(f) => f.flush(),
        }
    }
}

/// Magnitudes below this are reported as zero. The dynamics keep tiny
/// positive entries alive internally (abandoned goods decay geometrically,
/// down into the subnormal range after long runs); flushing happens only
/// at the reporting boundary.
pub const REPORT_FLOOR: f64 = 1e-300;

/// One CSV row of floats after some fixed leading fields.
pub fn write_csv_row(w: &mut impl Write, lead: &str, values: &[f64]) -> io::Result<()> {
    w.write_all(lead.as_bytes())?;
    for &v in values {
        let v = if v.abs() < REPORT_FLOOR { 0.0 } else { v };
        write!(w, ",{v}")?;
    }
    writeln!(w)
}
