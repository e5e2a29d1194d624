//! Seeded multi-run execution.

use std::fs;
use std::path::{Path, PathBuf};

use gesmr::oracles::{lamr_run, ofmr_search_per_seed};
use gesmr::{Evolution, GenerationTrace};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Algorithm, RunConfig};
use crate::tables;
use crate::trace::{self, TraceRow};
use crate::LabError;

pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.csv";
pub const OFMR_GRID: &str = "ofmr_grid.csv";

/// Files written by [`run`].
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub manifest: PathBuf,
    pub traces: Vec<PathBuf>,
    pub summary: PathBuf,
    pub config: RunConfig,
    /// σ picked by the grid search, for `ofmr` runs.
    pub ofmr_sigma: Option<f64>,
}

#[derive(Serialize)]
struct SummaryRow {
    seed: u64,
    final_elite: f64,
    mean_elite: f64,
    lookahead_evals: u64,
}

struct SeedRun {
    seed: u64,
    traces: Vec<GenerationTrace>,
    lookahead_evals: u64,
}

/// Runs `config` once per seed and writes the manifest, one trace per seed and
/// a per-seed summary into `out_dir`. Identical configs give byte-identical
/// files regardless of the worker count.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunArtifacts, LabError> {
    let config = config.resolve()?;
    fs::create_dir_all(out_dir)?;
    let manifest = out_dir.join(MANIFEST);
    fs::write(&manifest, config.to_json()?)?;

    let mut ofmr_sigma = None;
    let runs: Vec<SeedRun> = match &config.algorithm {
        Algorithm::Ofmr { grid } => {
            let grid = grid.build()?;
            let objectives =
                config.seeds.iter().map(|&seed| config.objective.build(seed)).collect::<Result<Vec<_>, _>>()?;
            let outcome = ofmr_search_per_seed(&grid, &objectives, &config.params(0), &config.seeds)?;
            tables::write_ofmr_grid(grid.values(), &outcome, fs::File::create(out_dir.join(OFMR_GRID))?)?;
            ofmr_sigma = Some(outcome.best_sigma);
            let best = outcome.traces.into_iter().nth(outcome.best_index).expect("best index is in the grid");
            config
                .seeds
                .iter()
                .zip(best)
                .map(|(&seed, traces)| SeedRun { seed, traces, lookahead_evals: 0 })
                .collect()
        }
        Algorithm::Lamr { .. } => {
            let plan = config.algorithm.lookahead_plan().expect("lamr has a plan")?;
            config
                .seeds
                .par_iter()
                .map(|&seed| {
                    let obj = config.objective.build(seed)?;
                    let out = lamr_run(&obj, &config.params(seed), &plan)?;
                    Ok(SeedRun { seed, lookahead_evals: out.run.lookahead_evaluations, traces: out.run.traces })
                })
                .collect::<Result<_, LabError>>()?
        }
        online => {
            let spec = online.controller(config.population_size).expect("online algorithm");
            config
                .seeds
                .par_iter()
                .map(|&seed| {
                    let obj = config.objective.build(seed)?;
                    let params = config.params(seed);
                    let out = Evolution::new(&obj, params, spec.build(&obj, &params)?)?.run()?;
                    Ok(SeedRun { seed, traces: out.traces, lookahead_evals: 0 })
                })
                .collect::<Result<_, LabError>>()?
        }
    };

    let mut traces = Vec::with_capacity(runs.len());
    let mut summary = Vec::with_capacity(runs.len());
    for r in &runs {
        let rows: Vec<TraceRow> = r.traces.iter().map(TraceRow::from).collect();
        let path = out_dir.join(trace::file_name(r.seed));
        trace::write_file(&rows, &path)?;
        traces.push(path);
        summary.push(SummaryRow {
            seed: r.seed,
            final_elite: rows.last().map_or(f64::NAN, |x| x.elite_f),
            mean_elite: rows.iter().map(|x| x.elite_f).sum::<f64>() / rows.len() as f64,
            lookahead_evals: r.lookahead_evals,
        });
    }
    let summary_path = out_dir.join(SUMMARY);
    write_csv(&summary, &summary_path)?;
    Ok(RunArtifacts { manifest, traces, summary: summary_path, config, ofmr_sigma })
}

pub(crate) fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<(), LabError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
