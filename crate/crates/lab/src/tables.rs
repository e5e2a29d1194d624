//! CSV output for the analysis experiments.

use std::io::Write;

use gesmr::analysis::{AblationRow, DeltaHistogram};
use gesmr::oracles::OfmrOutcome;
use serde::Serialize;

use crate::LabError;

#[derive(Serialize)]
struct BinRecord {
    sigma: f64,
    bin_lo: f64,
    bin_hi: f64,
    count: u64,
}

#[derive(Serialize)]
struct CurveRecord {
    sigma: f64,
    mean: f64,
    min_q: f64,
    max_q: f64,
}

#[derive(Serialize)]
struct AblationRecord {
    n: usize,
    k: usize,
    median_final_elite: f64,
}

#[derive(Serialize)]
struct GridRecord {
    sigma: f64,
    median_final_elite: f64,
    selected: bool,
}

fn write_all<W: Write, T: Serialize>(records: impl IntoIterator<Item = T>, out: W) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `sigma,bin_lo,bin_hi,count`, one line per (σ, bin).
pub fn write_histogram<W: Write>(h: &DeltaHistogram, out: W) -> Result<(), LabError> {
    let records = h.sigma_grid.iter().zip(&h.counts).flat_map(|(&sigma, row)| {
        row.iter().enumerate().map(move |(b, &count)| BinRecord {
            sigma,
            bin_lo: h.bin_edges[b],
            bin_hi: h.bin_edges[b + 1],
            count,
        })
    });
    write_all(records, out)
}

/// Columns `sigma,mean,min_q,max_q`, one line per σ.
pub fn write_curves<W: Write>(h: &DeltaHistogram, out: W) -> Result<(), LabError> {
    let records = (0..h.sigma_grid.len()).map(|i| CurveRecord {
        sigma: h.sigma_grid[i],
        mean: h.mean[i],
        min_q: h.min_q[i],
        max_q: h.max_q[i],
    });
    write_all(records, out)
}

/// Columns `n,k,median_final_elite`.
pub fn write_ablation<W: Write>(rows: &[AblationRow], out: W) -> Result<(), LabError> {
    write_all(
        rows.iter().map(|r| AblationRecord {
            n: r.population_size,
            k: r.groups,
            median_final_elite: r.median_final_elite,
        }),
        out,
    )
}

/// Columns `sigma,median_final_elite,selected`.
pub fn write_ofmr_grid<W: Write>(grid: &[f64], outcome: &OfmrOutcome, out: W) -> Result<(), LabError> {
    write_all(
        grid.iter().zip(&outcome.medians).enumerate().map(|(i, (&sigma, &m))| GridRecord {
            sigma,
            median_final_elite: m,
            selected: i == outcome.best_index,
        }),
        out,
    )
}
