//! CSV input.

use crate::CliError;
use sphericity::estimator::{polar_decompose, PolarSample, Sample};
use sphericity::Error;
use std::path::Path;

/// A parsed data file.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub sample: Sample,
    pub header: Option<Vec<String>>,
    /// 1-based file line of each observation.
    pub lines: Vec<usize>,
}

impl Ingested {
    /// Polar decomposition with zero rows reported by file line.
    pub fn polar(&self) -> Result<PolarSample, CliError> {
        polar_decompose(&self.sample).map_err(|e| match e {
            Error::ZeroVector { row } => Error::ZeroVector { row: self.lines[row] }.into(),
            other => other.into(),
        })
    }
}

pub fn ingest_csv(path: &Path) -> Result<Ingested, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_csv(&text)
}

/// Rows are observations and columns coordinates. A first row with any
/// non-numeric field is taken as the header.
pub fn parse_csv(text: &str) -> Result<Ingested, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut data = Vec::new();
    let mut lines = Vec::new();
    let mut p = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |pos| pos.line() as usize);
            Error::Parse { row, col: 0, msg: e.to_string() }
        })?;
        let line = record.position().map_or(i + 1, |pos| pos.line() as usize);
        if i == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(record.iter().map(str::to_string).collect::<Vec<_>>());
            p = record.len();
            continue;
        }
        if p == 0 {
            p = record.len();
        }
        if record.len() != p {
            return Err(Error::Parse { row: line, col: record.len().min(p) + 1, msg: format!("expected {p} fields, found {}", record.len()) }.into());
        }
        for (j, field) in record.iter().enumerate() {
            let x: f64 = field
                .parse()
                .map_err(|_| Error::Parse { row: line, col: j + 1, msg: format!("{field:?} is not a number") })?;
            if !x.is_finite() {
                return Err(Error::Parse { row: line, col: j + 1, msg: format!("non-finite value {field:?}") }.into());
            }
            data.push(x);
        }
        lines.push(line);
    }
    if p < 2 {
        return Err(Error::Dimension(format!("need at least 2 columns, found {p}")).into());
    }
    let n = lines.len();
    let sample = Sample::new(data, n, p)?;
    Ok(Ingested { sample, header, lines })
}
