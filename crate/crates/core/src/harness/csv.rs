use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{BerRecord, DetectorKind};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "detector,L,M,snr_db,total_bits,bit_errors,ber,stderr,wall_seconds";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Ten significant digits.
fn fmt_float(x: f64) -> String {
    format!("{x:.9e}")
}

fn format_row(r: &BerRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.detector,
        r.branches,
        r.stages,
        fmt_float(r.snr_db),
        r.total_bits,
        r.bit_errors,
        fmt_float(r.ber),
        fmt_float(r.stderr),
        fmt_float(r.wall_seconds)
    )
}

/// Incremental writer: header on creation, one flushed row per record, so an
/// interrupted sweep leaves every finished cell on disk.
pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = Self {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        writeln!(w.out, "{CSV_HEADER}").map_err(io_err(path))?;
        w.out.flush().map_err(io_err(path))?;
        Ok(w)
    }

    pub fn append(&mut self, record: &BerRecord) -> Result<()> {
        writeln!(self.out, "{}", format_row(record)).map_err(io_err(&self.path))?;
        self.out.flush().map_err(io_err(&self.path))
    }
}

pub fn write_csv(records: &[BerRecord], path: &Path) -> Result<()> {
    let mut w = CsvWriter::create(path)?;
    for r in records {
        w.append(r)?;
    }
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<BerRecord>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose().map_err(io_err(path))?;
    if header.as_deref() != Some(CSV_HEADER) {
        return Err(Error::Config(format!("{}: unexpected CSV header", path.display())));
    }
    let bad = |n: usize, what: &str| Error::Config(format!("{}: row {n}: bad {what}", path.display()));
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad(n + 1, "field count"));
        }
        let detector: DetectorKind = f[0].parse()?;
        let num = |i: usize, what: &str| f[i].parse::<f64>().map_err(|_| bad(n + 1, what));
        let int = |i: usize, what: &str| f[i].parse::<u64>().map_err(|_| bad(n + 1, what));
        let record = BerRecord::from_counts(
            detector,
            int(1, "L")? as usize,
            int(2, "M")? as usize,
            num(3, "snr_db")?,
            int(4, "total_bits")?,
            int(5, "bit_errors")?,
            num(8, "wall_seconds")?,
        );
        if fmt_float(record.ber) != f[6] || fmt_float(record.stderr) != f[7] {
            return Err(bad(n + 1, "ber/stderr (inconsistent with counts)"));
        }
        records.push(record);
    }
    Ok(records)
}
