//! CSV output of sweep reports.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, Terminator, WriterBuilder};

use crate::error::HarnessError;
use crate::experiment::{RateReport, SweepPoint};

pub const HEADER: [&str; 6] = [
    "sweep_param",
    "hd_mean",
    "fd_mean",
    "selected_mean",
    "stderr",
    "trials",
];

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub sweep_param: f64,
    pub hd_mean: f64,
    pub fd_mean: f64,
    pub selected_mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl From<&SweepPoint> for ReportRow {
    fn from(p: &SweepPoint) -> Self {
        Self {
            sweep_param: p.sweep_param,
            hd_mean: p.hd_mean,
            fd_mean: p.fd_mean,
            selected_mean: p.selected_mean,
            stderr: p.stderr,
            trials: p.trials,
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(report: &RateReport, out: W) -> Result<(), csv::Error> {
    let mut w = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for p in &report.points {
        let r = ReportRow::from(p);
        w.write_record([
            fmt_float(r.sweep_param),
            fmt_float(r.hd_mean),
            fmt_float(r.fd_mean),
            fmt_float(r.selected_mean),
            fmt_float(r.stderr),
            r.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Creates (truncating) the output file. Called before a sweep so a bad path fails fast.
pub fn create_output(path: &Path) -> Result<File, HarnessError> {
    File::create(path).map_err(|e| HarnessError::io(path, e))
}

pub fn emit_csv(report: &RateReport, path: &Path) -> Result<(), HarnessError> {
    let file = create_output(path)?;
    write_csv(report, file).map_err(|e| HarnessError::csv(path, e))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ReportRow>, csv::Error> {
    let mut r = ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(HEADER) {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header {headers:?}"),
        )));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let field = |k: usize| -> Result<f64, csv::Error> {
            record[k].parse().map_err(|e| {
                csv::Error::from(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("column {}: {e}", HEADER[k]),
                ))
            })
        };
        let trials = record[5].parse().map_err(|e| {
            csv::Error::from(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("column trials: {e}"),
            ))
        })?;
        rows.push(ReportRow {
            sweep_param: field(0)?,
            hd_mean: field(1)?,
            fd_mean: field(2)?,
            selected_mean: field(3)?,
            stderr: field(4)?,
            trials,
        });
    }
    Ok(rows)
}

pub fn parse_csv(path: &Path) -> Result<Vec<ReportRow>, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_csv(file).map_err(|e| HarnessError::csv(path, e))
}
