//! Offline analyses of mutation-rate objectives.
//!
//! * [`sample_delta`] samples `Δ(x, σ) = f(x + σε) - f(x)` over a σ grid and
//!   estimates the mean objective `E[Δ]` and the outlier objective
//!   `E[min_q Δ_q]` (plus `E[max_q Δ_q]`).
//! * [`min_normal_expectation`] and [`theorem_check`] verify that the expected
//!   minimum of `q` iid `N(0, σ²)` draws is `σ` times the `σ = 1` value.
//! * [`group_size_ablation`] sweeps every divisor `K` of `N` for GESMR.
//! * [`log_mr_mse`] compares two mutation-rate curves in log space.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::controllers::{Gesmr, GesmrParams};
use crate::engine::{Evolution, EvolutionParams};
use crate::error::{invalid, Result};
use crate::objectives::Objective;
use crate::par;
use crate::rng::{Purpose, RngStream};
use crate::stats::{argmin, divisors, median};

/// Where the base point `x` of each Δ sample comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum XSource {
    Fixed(Vec<f64>),
    /// `x ~ N(0, I)`.
    StandardNormal,
    /// `x ~ N(0, s² I)`.
    ScaledNormal(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaSampling {
    /// Δ samples per σ.
    pub samples: usize,
    /// Block size for the extreme-value estimates.
    pub q: usize,
    pub bins: usize,
    /// Pair every draw `(x, ε)` with `(x, -ε)`. The first half of the samples
    /// uses `+ε`, the second half `-ε`; extreme-value blocks never mix halves,
    /// so each block is still iid.
    pub antithetic: bool,
}

impl DeltaSampling {
    pub fn new(samples: usize, q: usize) -> Self {
        Self { samples, q, bins: 64, antithetic: true }
    }
}

/// Δ samples binned on a σ × Δ grid together with the three objective curves.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaHistogram {
    pub sigma_grid: Vec<f64>,
    /// `bins + 1` ascending edges shared by every σ row.
    pub bin_edges: Vec<f64>,
    /// `counts[σ index][bin]`; each row sums to `samples`.
    pub counts: Vec<Vec<u64>>,
    pub mean: Vec<f64>,
    pub min_q: Vec<f64>,
    pub max_q: Vec<f64>,
    pub q: usize,
    pub samples: usize,
}

fn draw_x(source: &XSource, dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    match source {
        XSource::Fixed(x) => x.clone(),
        XSource::StandardNormal => (0..dim).map(|_| rng.sample(StandardNormal)).collect(),
        XSource::ScaledNormal(s) => (0..dim).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect(),
    }
}

/// Raw Δ samples for one σ. Every σ replays the same `(x, ε)` draws.
fn delta_samples(obj: &Objective, source: &XSource, sigma: f64, cfg: &DeltaSampling, stream: &RngStream) -> Vec<f64> {
    let dim = obj.dim();
    let mut rng = stream.substream(Purpose::Sampling, 0, 0);
    let fixed_value = match source {
        XSource::Fixed(x) => Some(obj.eval_unchecked(x)),
        _ => None,
    };
    let draws = if cfg.antithetic { cfg.samples.div_ceil(2) } else { cfg.samples };
    let mut plus = Vec::with_capacity(draws);
    let mut minus = Vec::with_capacity(cfg.samples - draws);
    let mut probe = vec![0.0; dim];
    for j in 0..draws {
        let x = draw_x(source, dim, &mut rng);
        let eps: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let fx = fixed_value.unwrap_or_else(|| obj.eval_unchecked(&x));
        for ((p, xi), e) in probe.iter_mut().zip(&x).zip(&eps) {
            *p = xi + sigma * e;
        }
        plus.push(obj.eval_unchecked(&probe) - fx);
        if cfg.antithetic && j < cfg.samples - draws {
            for ((p, xi), e) in probe.iter_mut().zip(&x).zip(&eps) {
                *p = xi - sigma * e;
            }
            minus.push(obj.eval_unchecked(&probe) - fx);
        }
    }
    plus.extend(minus);
    plus
}

/// Mean of the extremes over disjoint blocks of `q` consecutive samples.
fn block_extremes(samples: &[f64], q: usize) -> (f64, f64, usize) {
    let (mut lo, mut hi, mut n) = (0.0, 0.0, 0usize);
    for block in samples.chunks_exact(q) {
        lo += block.iter().copied().fold(f64::INFINITY, f64::min);
        hi += block.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        n += 1;
    }
    (lo, hi, n)
}

/// Samples Δ for every σ in the grid and summarizes it.
pub fn sample_delta(
    obj: &Objective,
    source: &XSource,
    sigma_grid: &[f64],
    cfg: &DeltaSampling,
    stream: &RngStream,
) -> Result<DeltaHistogram> {
    if cfg.q == 0 || cfg.samples < cfg.q {
        return Err(invalid!("need samples >= q >= 1, got samples = {}, q = {}", cfg.samples, cfg.q));
    }
    if cfg.antithetic && cfg.samples / 2 < cfg.q {
        return Err(invalid!("antithetic sampling needs samples >= 2q, got samples = {}, q = {}", cfg.samples, cfg.q));
    }
    if cfg.bins == 0 {
        return Err(invalid!("histogram needs at least one bin"));
    }
    if sigma_grid.is_empty() || sigma_grid.iter().any(|s| !(*s >= 0.0)) {
        return Err(invalid!("sigma grid must be nonempty and nonnegative"));
    }
    if sigma_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid!("sigma grid must be strictly increasing"));
    }
    if let XSource::Fixed(x) = source {
        if x.len() != obj.dim() {
            return Err(invalid!("fixed point has length {}, objective dimension is {}", x.len(), obj.dim()));
        }
    }

    let per_sigma = par::map(sigma_grid.to_vec(), |sigma| delta_samples(obj, source, sigma, cfg, stream));

    let (mut mean, mut min_q, mut max_q) = (Vec::new(), Vec::new(), Vec::new());
    for s in &per_sigma {
        mean.push(s.iter().sum::<f64>() / s.len() as f64);
        let (lo, hi, blocks) = if cfg.antithetic {
            let half = cfg.samples.div_ceil(2);
            let (a, b) = s.split_at(half);
            let (l1, h1, n1) = block_extremes(a, cfg.q);
            let (l2, h2, n2) = block_extremes(b, cfg.q);
            (l1 + l2, h1 + h2, n1 + n2)
        } else {
            block_extremes(s, cfg.q)
        };
        min_q.push(lo / blocks as f64);
        max_q.push(hi / blocks as f64);
    }

    let finite = per_sigma.iter().flatten().copied().filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(lo < hi) {
        let c = if lo.is_finite() { lo } else { 0.0 };
        lo = c - 0.5;
        hi = c + 0.5;
    }
    let width = (hi - lo) / cfg.bins as f64;
    let bin_edges: Vec<f64> =
        (0..=cfg.bins).map(|i| if i == cfg.bins { hi } else { lo + width * i as f64 }).collect();
    let counts = per_sigma
        .iter()
        .map(|s| {
            let mut row = vec![0u64; cfg.bins];
            for &v in s {
                let b = if v.is_nan() {
                    0
                } else {
                    (libm::floor((v - lo) / width).max(0.0) as usize).min(cfg.bins - 1)
                };
                row[b] += 1;
            }
            row
        })
        .collect();

    Ok(DeltaHistogram {
        sigma_grid: sigma_grid.to_vec(),
        bin_edges,
        counts,
        mean,
        min_q,
        max_q,
        q: cfg.q,
        samples: cfg.samples,
    })
}

/// The mean and outlier curves and their grid minimizers.
#[derive(Clone, Debug, PartialEq)]
pub struct MrObjectiveCurves {
    pub sigma_grid: Vec<f64>,
    pub mean_curve: Vec<f64>,
    pub outlier_curve: Vec<f64>,
    /// Grid σ minimizing `E[Δ]`; the smallest σ wins ties.
    pub sigma_star_mean: f64,
    /// Grid σ minimizing `E[min_q Δ_q]`; the smallest σ wins ties.
    pub sigma_star_min: f64,
}

impl MrObjectiveCurves {
    pub fn sigma_star_min_index(&self) -> usize {
        argmin(&self.outlier_curve).expect("curves are nonempty")
    }

    pub fn sigma_star_mean_index(&self) -> usize {
        argmin(&self.mean_curve).expect("curves are nonempty")
    }
}

pub fn mr_objective_curves(hist: &DeltaHistogram) -> MrObjectiveCurves {
    let i_mean = argmin(&hist.mean).expect("histogram has at least one sigma");
    let i_min = argmin(&hist.min_q).expect("histogram has at least one sigma");
    MrObjectiveCurves {
        sigma_grid: hist.sigma_grid.clone(),
        mean_curve: hist.mean.clone(),
        outlier_curve: hist.min_q.clone(),
        sigma_star_mean: hist.sigma_grid[i_mean],
        sigma_star_min: hist.sigma_grid[i_min],
    }
}

/// Monte-Carlo estimate of `E[min(Z_1..Z_q)]`, `Z_i ~ N(0, σ²)` iid.
pub fn min_normal_expectation<R: Rng + ?Sized>(q: usize, sigma: f64, samples: usize, rng: &mut R) -> Result<f64> {
    if q == 0 || samples == 0 {
        return Err(invalid!("need q >= 1 and samples >= 1"));
    }
    let mut total = 0.0;
    for _ in 0..samples {
        let mut m = f64::INFINITY;
        for _ in 0..q {
            m = m.min(rng.sample::<f64, _>(StandardNormal));
        }
        total += m;
    }
    Ok(sigma * total / samples as f64)
}

/// Scaling check of the expected minimum across several σ.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremCheck {
    pub q: usize,
    pub samples: usize,
    pub sigmas: Vec<f64>,
    pub estimates: Vec<f64>,
    /// `estimate / σ`.
    pub normalized: Vec<f64>,
    /// `(max - min) / |mean|` of the normalized estimates.
    pub relative_spread: f64,
    pub tolerance: f64,
}

impl TheoremCheck {
    pub fn all_negative(&self) -> bool {
        self.estimates.iter().all(|e| *e < 0.0)
    }

    pub fn passed(&self) -> bool {
        (self.q < 2 || self.all_negative()) && self.relative_spread <= self.tolerance
    }
}

/// Estimates `E[min]` at every σ on independent streams and measures how far
/// the σ-normalized values spread.
pub fn theorem_check(q: usize, sigmas: &[f64], samples: usize, tolerance: f64, seed: u64) -> Result<TheoremCheck> {
    if sigmas.iter().any(|s| !(*s > 0.0)) || sigmas.is_empty() {
        return Err(invalid!("sigmas must be positive"));
    }
    let stream = RngStream::new(seed);
    let jobs: Vec<(usize, f64)> = sigmas.iter().copied().enumerate().collect();
    let estimates = par::map(jobs, |(i, s)| {
        min_normal_expectation(q, s, samples, &mut stream.substream(Purpose::Sampling, 1, i as u64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let normalized: Vec<f64> = estimates.iter().zip(sigmas).map(|(e, s)| e / s).collect();
    let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let centre = crate::stats::mean(&normalized).abs();
    let relative_spread = if centre > 0.0 { (hi - lo) / centre } else { hi - lo };
    Ok(TheoremCheck {
        q,
        samples,
        sigmas: sigmas.to_vec(),
        estimates,
        normalized,
        relative_spread,
        tolerance,
    })
}

/// Mean over time of `(log10 a(t) - log10 b(t))²`.
pub fn log_mr_mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(invalid!("curves have different lengths ({} vs {})", a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(invalid!("curves are empty"));
    }
    if a.iter().chain(b).any(|v| !(*v > 0.0)) {
        return Err(invalid!("mutation-rate curves must be strictly positive"));
    }
    let total: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = libm::log10(*x) - libm::log10(*y);
            d * d
        })
        .sum();
    Ok(total / a.len() as f64)
}

/// One `(N, K)` cell of the group-size sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub population_size: usize,
    pub groups: usize,
    pub median_final_elite: f64,
    pub final_elites: Vec<f64>,
}

/// Divisor of `n` nearest to `n^(3/4)`.
pub fn three_quarter_groups(n: usize) -> usize {
    crate::controllers::nearest_divisor(n, libm::round(libm::pow(n as f64, 0.75)) as usize)
}

/// Runs GESMR for every divisor `K` of every `N` in `sizes`, once per seed.
/// `template` supplies everything but the group count; `base` everything but
/// the population size and seed.
pub fn group_size_ablation(
    obj: &Objective,
    sizes: &[usize],
    seeds: &[u64],
    base: &EvolutionParams,
    template: &GesmrParams,
) -> Result<Vec<AblationRow>> {
    if seeds.is_empty() {
        return Err(invalid!("ablation needs at least one seed"));
    }
    for &n in sizes {
        if divisors(n).len() < 3 {
            return Err(invalid!("population size {} has fewer than three divisors", n));
        }
    }
    let cells: Vec<(usize, usize)> =
        sizes.iter().flat_map(|&n| divisors(n).into_iter().map(move |k| (n, k))).collect();
    let jobs: Vec<(usize, usize, u64)> =
        cells.iter().flat_map(|&(n, k)| seeds.iter().map(move |&s| (n, k, s))).collect();
    let finals = par::map(jobs, |(n, k, seed)| -> Result<f64> {
        let params = EvolutionParams { population_size: n, seed, ..*base };
        let gp = GesmrParams { groups: k, ..template.clone() };
        let controller = Box::new(Gesmr::new(gp, n)?);
        Ok(Evolution::new(obj, params, controller)?.run()?.final_elite())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(cells
        .iter()
        .zip(finals.chunks(seeds.len()))
        .map(|(&(n, k), f)| AblationRow {
            population_size: n,
            groups: k,
            median_final_elite: median(f),
            final_elites: f.to_vec(),
        })
        .collect())
}
