//! Per-seed trace files.

use std::io::{Read, Write};
use std::path::Path;

use gesmr::GenerationTrace;
use serde::{Deserialize, Serialize};

use crate::LabError;

/// Header of every trace file, in column order.
pub const COLUMNS: [&str; 7] = ["generation", "elite_f", "mean_f", "mean_log10_mr", "min_mr", "max_mr", "cum_evals"];

/// One CSV record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: u64,
    pub elite_f: f64,
    pub mean_f: f64,
    pub mean_log10_mr: f64,
    pub min_mr: f64,
    pub max_mr: f64,
    pub cum_evals: u64,
}

impl From<&GenerationTrace> for TraceRow {
    fn from(t: &GenerationTrace) -> Self {
        Self {
            generation: t.generation,
            elite_f: t.elite_value,
            mean_f: t.mean_value,
            mean_log10_mr: t.mr.mean_log10,
            min_mr: t.mr.min,
            max_mr: t.mr.max,
            cum_evals: t.cumulative_evaluations,
        }
    }
}

impl TraceRow {
    /// Geometric mean of the rates applied in this generation.
    pub fn mr(&self) -> f64 {
        10f64.powf(self.mean_log10_mr)
    }
}

pub fn file_name(seed: u64) -> String {
    format!("trace_seed_{seed}.csv")
}

pub fn write<W: Write>(rows: &[TraceRow], out: W) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_file(rows: &[TraceRow], path: &Path) -> Result<(), LabError> {
    write(rows, std::fs::File::create(path)?)
}

/// Parses a trace and checks the header and that generations run 0, 1, 2, ...
pub fn read<R: Read>(input: R) -> Result<Vec<TraceRow>, LabError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != COLUMNS {
        return Err(LabError::InvalidArgument(format!("unexpected trace columns {header:?}")));
    }
    let rows = r.deserialize().collect::<Result<Vec<TraceRow>, _>>()?;
    for (i, row) in rows.iter().enumerate() {
        if row.generation != i as u64 {
            return Err(LabError::InvalidArgument(format!(
                "trace has a gap: record {i} is generation {}",
                row.generation
            )));
        }
    }
    Ok(rows)
}

pub fn read_file(path: &Path) -> Result<Vec<TraceRow>, LabError> {
    read(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(g: u64) -> TraceRow {
        TraceRow {
            generation: g,
            elite_f: 1.0 / (g as f64 + 3.0),
            mean_f: 2.5,
            mean_log10_mr: -1.25,
            min_mr: 0.01,
            max_mr: 0.1,
            cum_evals: 9 + 8 * g,
        }
    }

    #[test]
    fn header_and_round_trip() {
        let rows: Vec<TraceRow> = (0..4).map(row).collect();
        let mut buf = Vec::new();
        write(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), COLUMNS.join(","));
        assert_eq!(read(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn gaps_are_rejected() {
        let rows = vec![row(0), row(2)];
        let mut buf = Vec::new();
        write(&rows, &mut buf).unwrap();
        assert!(matches!(read(buf.as_slice()), Err(LabError::InvalidArgument(_))));
    }

    #[test]
    fn foreign_header_is_rejected() {
        assert!(read("a,b\n1,2\n".as_bytes()).is_err());
    }
}
