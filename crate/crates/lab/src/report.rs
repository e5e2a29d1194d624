//! Comparison of finished runs against a reference mutation-rate curve.
//!
//! Three numbers per run: the final elite, the elite averaged over every
//! record, and the mean squared log10 distance between the run's MR curve and
//! the reference's. Record 0 carries the controller's initial state rather
//! than an applied rate, so MR curves start at generation 1.

use std::fs;
use std::path::Path;

use gesmr::analysis::log_mr_mse;
use gesmr::stats::median;
use serde::Serialize;

use crate::config::RunConfig;
use crate::runner::{write_csv, MANIFEST};
use crate::trace::{self, TraceRow};
use crate::LabError;

/// All per-seed traces of one run directory.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSet {
    pub algorithm: String,
    pub objective: String,
    pub oracle: bool,
    pub runs: Vec<(u64, Vec<TraceRow>)>,
}

impl TraceSet {
    /// Reads a directory written by [`crate::run`].
    pub fn load(dir: &Path) -> Result<Self, LabError> {
        let manifest = dir.join(MANIFEST);
        if !manifest.exists() {
            return Err(LabError::InvalidArgument(format!("{} has no {MANIFEST}", dir.display())));
        }
        let config = RunConfig::parse(&fs::read_to_string(&manifest)?)?;
        let runs = config
            .seeds
            .iter()
            .map(|&seed| Ok((seed, trace::read_file(&dir.join(trace::file_name(seed)))?)))
            .collect::<Result<_, LabError>>()?;
        Ok(Self {
            algorithm: config.algorithm.name().to_owned(),
            objective: format!("{}-{}", config.objective.name, config.objective.dim),
            oracle: config.algorithm.is_oracle(),
            runs,
        })
    }

    /// Reference curve for `seed`: the same seed if present, otherwise the
    /// only run of a single-seed set.
    fn reference_for(&self, seed: u64) -> Result<&[TraceRow], LabError> {
        if let Some((_, rows)) = self.runs.iter().find(|(s, _)| *s == seed) {
            return Ok(rows);
        }
        match self.runs.as_slice() {
            [(_, rows)] => Ok(rows),
            _ => Err(LabError::InvalidArgument(format!("reference has no trace for seed {seed}"))),
        }
    }
}

/// Generations `1..` as applied mutation rates.
pub fn mr_curve(rows: &[TraceRow]) -> Vec<f64> {
    rows.iter().skip(1).map(TraceRow::mr).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub algorithm: String,
    pub objective: String,
    /// Uses foresight; a reference, not a competitor.
    pub oracle: bool,
    pub seeds: Vec<u64>,
    pub final_elite: Vec<f64>,
    pub mean_elite: Vec<f64>,
    pub log_mr_mse: Vec<f64>,
}

impl ReportRow {
    pub fn median_final_elite(&self) -> f64 {
        median(&self.final_elite)
    }

    pub fn median_mean_elite(&self) -> f64 {
        median(&self.mean_elite)
    }

    pub fn median_log_mr_mse(&self) -> f64 {
        median(&self.log_mr_mse)
    }
}

/// Metrics of every set against `reference`. All traces must have the same
/// number of records as the reference.
pub fn compare(sets: &[TraceSet], reference: &TraceSet) -> Result<Vec<ReportRow>, LabError> {
    if reference.runs.is_empty() {
        return Err(LabError::InvalidArgument("reference has no traces".into()));
    }
    sets.iter()
        .map(|set| {
            if set.runs.is_empty() {
                return Err(LabError::InvalidArgument(format!("{} has no traces", set.algorithm)));
            }
            let mut row = ReportRow {
                algorithm: set.algorithm.clone(),
                objective: set.objective.clone(),
                oracle: set.oracle,
                seeds: Vec::new(),
                final_elite: Vec::new(),
                mean_elite: Vec::new(),
                log_mr_mse: Vec::new(),
            };
            for (seed, rows) in &set.runs {
                let reference_rows = reference.reference_for(*seed)?;
                if rows.len() != reference_rows.len() {
                    return Err(LabError::InvalidArgument(format!(
                        "{} seed {seed} has {} records, reference has {}",
                        set.algorithm,
                        rows.len(),
                        reference_rows.len()
                    )));
                }
                let last = rows.last().ok_or_else(|| LabError::InvalidArgument("empty trace".into()))?;
                row.seeds.push(*seed);
                row.final_elite.push(last.elite_f);
                row.mean_elite.push(rows.iter().map(|r| r.elite_f).sum::<f64>() / rows.len() as f64);
                let mse = if rows.len() > 1 { log_mr_mse(&mr_curve(rows), &mr_curve(reference_rows))? } else { 0.0 };
                row.log_mr_mse.push(mse);
            }
            Ok(row)
        })
        .collect()
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    algorithm: &'a str,
    objective: &'a str,
    oracle: bool,
    seed: String,
    final_elite: f64,
    mean_elite: f64,
    log_mr_mse: f64,
}

/// One CSV line per (algorithm, seed) followed by a `median` line.
pub fn write_report(rows: &[ReportRow], path: &Path) -> Result<(), LabError> {
    let mut records = Vec::new();
    for r in rows {
        for i in 0..r.seeds.len() {
            records.push(ReportRecord {
                algorithm: &r.algorithm,
                objective: &r.objective,
                oracle: r.oracle,
                seed: r.seeds[i].to_string(),
                final_elite: r.final_elite[i],
                mean_elite: r.mean_elite[i],
                log_mr_mse: r.log_mr_mse[i],
            });
        }
        records.push(ReportRecord {
            algorithm: &r.algorithm,
            objective: &r.objective,
            oracle: r.oracle,
            seed: "median".into(),
            final_elite: r.median_final_elite(),
            mean_elite: r.median_mean_elite(),
            log_mr_mse: r.median_log_mr_mse(),
        });
    }
    write_csv(&records, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(mrs: &[f64]) -> Vec<TraceRow> {
        mrs.iter()
            .enumerate()
            .map(|(g, &m)| TraceRow {
                generation: g as u64,
                elite_f: 10.0 - g as f64,
                mean_f: 11.0,
                mean_log10_mr: m.log10(),
                min_mr: m,
                max_mr: m,
                cum_evals: g as u64,
            })
            .collect()
    }

    fn set(name: &str, runs: Vec<(u64, Vec<TraceRow>)>) -> TraceSet {
        TraceSet { algorithm: name.into(), objective: "sphere-2".into(), oracle: name == "lamr", runs }
    }

    #[test]
    fn self_reference_has_zero_error() {
        let s = set("gesmr", vec![(1, rows(&[1.0, 0.5, 0.25])), (2, rows(&[1.0, 2.0, 4.0]))]);
        let r = compare(std::slice::from_ref(&s), &s).unwrap();
        assert_eq!(r[0].log_mr_mse, vec![0.0, 0.0]);
        assert_eq!(r[0].final_elite, vec![8.0, 8.0]);
        assert_eq!(r[0].mean_elite, vec![9.0, 9.0]);
    }

    #[test]
    fn initial_record_is_ignored() {
        let a = set("fmr", vec![(1, rows(&[1e5, 1.0, 1.0]))]);
        let b = set("lamr", vec![(1, rows(&[1e-5, 10.0, 10.0]))]);
        let r = compare(&[a], &b).unwrap();
        assert!((r[0].log_mr_mse[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_seed_reference_serves_every_seed() {
        let a = set("fmr", vec![(1, rows(&[1.0, 1.0])), (2, rows(&[1.0, 100.0]))]);
        let b = set("lamr", vec![(9, rows(&[1.0, 1.0]))]);
        let r = compare(&[a], &b).unwrap();
        assert_eq!(r[0].log_mr_mse, vec![0.0, 4.0]);
        assert!(!r[0].oracle);
    }

    #[test]
    fn mismatches_are_invalid() {
        let a = set("fmr", vec![(1, rows(&[1.0, 1.0, 1.0]))]);
        let b = set("lamr", vec![(1, rows(&[1.0, 1.0]))]);
        assert!(matches!(compare(std::slice::from_ref(&a), &b), Err(LabError::InvalidArgument(_))));
        let c = set("lamr", vec![(5, rows(&[1.0, 1.0, 1.0])), (6, rows(&[1.0, 1.0, 1.0]))]);
        assert!(matches!(compare(&[a], &c), Err(LabError::InvalidArgument(_))));
    }
}
