use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gesmr::analysis::{group_size_ablation, mr_objective_curves, sample_delta, theorem_check, DeltaSampling, XSource};
use gesmr::controllers::GesmrParams;
use gesmr::stats::log_space;
use gesmr::{EvolutionParams, RngStream};
use gesmr_lab::config::{Algorithm, GridSettings, ObjectiveConfig};
use gesmr_lab::report::write_report;
use gesmr_lab::{compare, run, tables, RunConfig, TraceSet};

/// Worker-count override for the rayon pool.
const WORKERS_ENV: &str = "GESMR_WORKERS";

#[derive(Parser)]
#[command(name = "gesmr-lab", version, about = "Run and analyse mutation-rate control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a config file once per seed.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Final elite, mean elite and log-MR MSE of run directories against a reference run.
    Compare {
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        reference: PathBuf,
        /// CSV destination; stdout summary only when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid search for the best fixed mutation rate.
    Ofmr {
        #[command(flatten)]
        exp: Experiment,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "out-ofmr")]
        out: PathBuf,
    },
    /// Look-ahead mutation-rate oracle.
    Lamr {
        #[command(flatten)]
        exp: Experiment,
        #[command(flatten)]
        grid: GridArgs,
        /// Generations between decisions.
        #[arg(long = "period", short = 'g', default_value_t = 100)]
        period: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value = "out-lamr")]
        out: PathBuf,
    },
    /// Sample the change in objective value over a grid of mutation rates.
    DeltaCurves {
        #[arg(long)]
        objective: String,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1e-4)]
        sigma_lo: f64,
        #[arg(long, default_value_t = 1e2)]
        sigma_hi: f64,
        #[arg(long, default_value_t = 33)]
        points: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 16)]
        q: usize,
        #[arg(long, value_enum, default_value_t = Source::Normal)]
        x: Source,
        /// Scale for `--x scaled`.
        #[arg(long, default_value_t = 10.0)]
        x_std: f64,
        /// Plain iid sampling instead of antithetic pairs.
        #[arg(long)]
        iid: bool,
        #[arg(long, default_value_t = 64)]
        bins: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out-delta")]
        out: PathBuf,
    },
    /// Check that the expected minimum of q normals scales linearly with σ.
    TheoremCheck {
        #[arg(long, default_value_t = 10)]
        q: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        sigmas: Vec<f64>,
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// GESMR final elite for every divisor K of each population size.
    AblateGroups {
        #[arg(long)]
        objective: String,
        #[arg(long)]
        dim: usize,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 500)]
        generations: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 1.0)]
        init_std: f64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Experiment {
    #[arg(long)]
    objective: String,
    #[arg(long)]
    dim: usize,
    #[arg(long = "n")]
    population_size: usize,
    #[arg(long)]
    generations: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 1.0)]
    init_std: f64,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-4)]
    grid_lo: f64,
    #[arg(long, default_value_t = 1e2)]
    grid_hi: f64,
    #[arg(long, default_value_t = 9)]
    grid_points: usize,
}

impl GridArgs {
    fn settings(&self) -> GridSettings {
        GridSettings { lo: self.grid_lo, hi: self.grid_hi, points: self.grid_points }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    /// x ~ N(0, I)
    Normal,
    /// x ~ N(0, s² I) with s from --x-std
    Scaled,
    /// x = 0
    Origin,
}

impl Experiment {
    fn config(&self, algorithm: Algorithm) -> RunConfig {
        RunConfig {
            objective: ObjectiveConfig::new(&self.objective, self.dim),
            init_std: self.init_std,
            algorithm,
            population_size: self.population_size,
            selection_rate: 0.5,
            generations: self.generations,
            seeds: self.seeds.clone(),
        }
    }
}

fn configure_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{WORKERS_ENV} must be a positive integer"))?;
        if n == 0 {
            bail!("{WORKERS_ENV} must be a positive integer");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn print_run(artifacts: &gesmr_lab::RunArtifacts) {
    println!("wrote {} trace(s) and {}", artifacts.traces.len(), artifacts.manifest.display());
    if let Some(s) = artifacts.ofmr_sigma {
        println!("selected sigma {s:e}");
    }
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = RunConfig::load(&config)?;
            print_run(&run(&cfg, &out)?);
        }
        Command::Compare { runs, reference, out } => {
            let reference = TraceSet::load(&reference)?;
            let sets = runs.iter().map(|d| TraceSet::load(d)).collect::<Result<Vec<_>, _>>()?;
            let rows = compare(&sets, &reference)?;
            println!("algorithm,objective,oracle,median_final_elite,median_mean_elite,median_log_mr_mse");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{}",
                    r.algorithm,
                    r.objective,
                    r.oracle,
                    r.median_final_elite(),
                    r.median_mean_elite(),
                    r.median_log_mr_mse()
                );
            }
            if let Some(path) = out {
                write_report(&rows, &path)?;
            }
        }
        Command::Ofmr { exp, grid, out } => {
            print_run(&run(&exp.config(Algorithm::Ofmr { grid: grid.settings() }), &out)?);
        }
        Command::Lamr { exp, grid, period, repeats, out } => {
            let algorithm = Algorithm::Lamr { period, repeats, grid: grid.settings() };
            print_run(&run(&exp.config(algorithm), &out)?);
        }
        Command::DeltaCurves { objective, dim, sigma_lo, sigma_hi, points, samples, q, x, x_std, iid, bins, seed, out } => {
            let obj = ObjectiveConfig::new(&objective, dim).build(seed)?;
            let source = match x {
                Source::Normal => XSource::StandardNormal,
                Source::Scaled => XSource::ScaledNormal(x_std),
                Source::Origin => XSource::Fixed(vec![0.0; dim]),
            };
            if !(sigma_lo > 0.0 && sigma_lo <= sigma_hi) || points == 0 {
                bail!("sigma grid needs 0 < sigma-lo <= sigma-hi and at least one point");
            }
            let grid = log_space(sigma_lo, sigma_hi, points);
            let cfg = DeltaSampling { samples, q, bins, antithetic: !iid };
            let hist = sample_delta(&obj, &source, &grid, &cfg, &RngStream::new(seed))?;
            fs::create_dir_all(&out)?;
            tables::write_histogram(&hist, fs::File::create(out.join("histogram.csv"))?)?;
            tables::write_curves(&hist, fs::File::create(out.join("curves.csv"))?)?;
            let curves = mr_objective_curves(&hist);
            println!("sigma_star_mean {:e}", curves.sigma_star_mean);
            println!("sigma_star_min {:e}", curves.sigma_star_min);
        }
        Command::TheoremCheck { q, samples, sigmas, tolerance, seed } => {
            let check = theorem_check(q, &sigmas, samples, tolerance, seed)?;
            println!("sigma,estimate,normalized");
            for i in 0..check.sigmas.len() {
                println!("{},{},{}", check.sigmas[i], check.estimates[i], check.normalized[i]);
            }
            let verdict = if check.passed() { "PASS" } else { "FAIL" };
            println!(
                "{verdict}: relative spread {:.4}% (tolerance {:.4}%)",
                100.0 * check.relative_spread,
                100.0 * tolerance
            );
            return Ok(check.passed());
        }
        Command::AblateGroups { objective, dim, sizes, generations, seeds, init_std, out } => {
            let obj = ObjectiveConfig::new(&objective, dim).build(seeds.first().copied().unwrap_or(1))?;
            let base = EvolutionParams::new(1, generations, 0).with_init_std(init_std);
            let rows = group_size_ablation(&obj, &sizes, &seeds, &base, &GesmrParams::new(1))?;
            match out {
                Some(path) => tables::write_ablation(&rows, fs::File::create(path)?)?,
                None => {
                    let stdout = io::stdout();
                    let mut lock = stdout.lock();
                    tables::write_ablation(&rows, &mut lock)?;
                    lock.flush()?;
                }
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|_| execute(cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
