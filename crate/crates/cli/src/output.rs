//! Output plumbing: full-precision JSON, CSV tables and the run manifest.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};

/// JSON formatter writing every float with 17 significant digits.
struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            CompactFormatter.write_null(writer)
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Where a command's artifacts go: files under `--out`, or stdout.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> io::Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Sink { dir })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Writes `bytes` to `<out>/<name>`, or to stdout without `--out`.
    pub fn emit(&self, name: &str, bytes: &[u8]) -> io::Result<()> {
        match &self.dir {
            Some(d) => {
                let mut f = BufWriter::new(File::create(d.join(name))?);
                f.write_all(bytes)?;
                f.flush()
            }
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()
            }
        }
    }

    pub fn emit_json<T: Serialize>(&self, name: &str, value: &T) -> io::Result<()> {
        self.emit(name, &to_json(value)?)
    }

    /// The manifest goes to `<out>/manifest.json`, or to stderr. It records
    /// wall-clock time and is therefore not part of the reproducible output.
    pub fn emit_manifest(&self, manifest: &RunManifest) -> io::Result<()> {
        let bytes = to_json(manifest)?;
        match &self.dir {
            Some(d) => std::fs::write(d.join("manifest.json"), bytes),
            None => io::stderr().lock().write_all(&bytes),
        }
    }
}

/// CSV with a fixed header; floats at full precision.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub duration_seconds: f64,
    pub threads: usize,
    pub deterministic: bool,
}
