//! Group elite selection of mutation rates.
//!
//! The `N` children are split into `K` equal groups and group `k` is mutated
//! with `σ_k`. After evaluation each rate is scored by the best (lowest)
//! parent-to-child change in its group, and the rate pool runs its own small
//! GA: sort by score, keep the best rate unchanged, refill the rest from the
//! top `floor(η_σ K)` rates and perturb them by `σ · τ^ε`.

use alloc::vec::Vec;

use rand::Rng;

use super::{meta_mutate, MutationRateController, Proposal};
use crate::error::{config_err, internal, invalid, Result};
use crate::rng::StreamRng;
use crate::stats::log_space;

/// How the per-child changes inside one group are reduced to Δ_k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregation {
    Min,
    Mean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GesmrParams {
    /// Number of groups `K`; must divide the population size.
    pub groups: usize,
    pub mr_selection_rate: f64,
    /// Meta mutation rate τ.
    pub meta_mr: f64,
    pub init_range: (f64, f64),
    pub aggregation: Aggregation,
    /// Keep the initial pool forever.
    pub frozen: bool,
}

impl GesmrParams {
    pub const DEFAULT_MR_SELECTION_RATE: f64 = 0.5;
    pub const DEFAULT_META_MR: f64 = 2.0;
    pub const DEFAULT_INIT_RANGE: (f64, f64) = (1e-2, 1e2);

    pub fn new(groups: usize) -> Self {
        Self {
            groups,
            mr_selection_rate: Self::DEFAULT_MR_SELECTION_RATE,
            meta_mr: Self::DEFAULT_META_MR,
            init_range: Self::DEFAULT_INIT_RANGE,
            aggregation: Aggregation::Min,
            frozen: false,
        }
    }

    /// Scores rates by the group mean instead of the group best.
    pub fn averaged(mut self) -> Self {
        self.aggregation = Aggregation::Mean;
        self
    }

    /// Never evolves the pool.
    pub fn frozen(mut self) -> Self {
        self.frozen = true;
        self
    }

    pub fn variant_name(&self) -> &'static str {
        match (self.frozen, self.aggregation) {
            (true, _) => "gesmr-fix",
            (false, Aggregation::Mean) => "gesmr-avg",
            (false, Aggregation::Min) => "gesmr",
        }
    }

    /// `l = floor(η_σ K)`, at least 1.
    pub fn parent_pool(&self) -> usize {
        (libm::floor(self.mr_selection_rate * self.groups as f64) as usize).max(1)
    }

    pub fn validate(&self, population_size: usize) -> Result<()> {
        if self.groups == 0 {
            return Err(config_err!("number of groups must be positive"));
        }
        if !population_size.is_multiple_of(self.groups) {
            return Err(config_err!(
                "{} groups do not divide population size {}; nearest valid group count is {}",
                self.groups,
                population_size,
                nearest_divisor(population_size, self.groups)
            ));
        }
        if !(self.mr_selection_rate > 0.0 && self.mr_selection_rate <= 1.0) {
            return Err(config_err!("mr selection rate must lie in (0, 1], got {}", self.mr_selection_rate));
        }
        if !(self.meta_mr >= 1.0 && self.meta_mr.is_finite()) {
            return Err(config_err!("meta mutation rate must be >= 1, got {}", self.meta_mr));
        }
        let (lo, hi) = self.init_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(invalid!("initial rate range must satisfy 0 < lo <= hi, got ({}, {})", lo, hi));
        }
        Ok(())
    }
}

/// Divisor of `n` closest to `k`; the smaller one wins a tie.
pub fn nearest_divisor(n: usize, k: usize) -> usize {
    crate::stats::divisors(n)
        .into_iter()
        .min_by_key(|&d| (d.abs_diff(k), d))
        .unwrap_or(1)
}

/// `round(sqrt(n))` snapped to the nearest divisor of `n`.
pub fn default_groups(n: usize) -> usize {
    nearest_divisor(n, libm::round(libm::sqrt(n as f64)) as usize)
}

/// `K` positive rates; group `k` covers children `(k-1)N/K + 1 ..= kN/K`.
#[derive(Clone, Debug, PartialEq)]
pub struct MutationRatePool {
    rates: Vec<f64>,
    group_size: usize,
}

impl MutationRatePool {
    pub fn new(rates: Vec<f64>, population_size: usize) -> Result<Self> {
        if rates.is_empty() || !population_size.is_multiple_of(rates.len()) {
            return Err(config_err!(
                "{} rates cannot split population size {} into equal groups",
                rates.len(),
                population_size
            ));
        }
        if rates.iter().any(|r| !(*r > 0.0)) {
            return Err(invalid!("mutation rates must be strictly positive"));
        }
        Ok(Self { group_size: population_size / rates.len(), rates })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn groups(&self) -> usize {
        self.rates.len()
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    /// Zero-based group of child `i` (`1 <= i <= N`): `ceil(iK/N) - 1`.
    pub fn group_of(&self, i: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.group_size * self.rates.len());
        i.div_ceil(self.group_size) - 1
    }

    /// Rate used for child `i`.
    pub fn assign(&self, i: usize) -> f64 {
        self.rates[self.group_of(i)]
    }
}

/// Deterministic log-spaced initial pool; a single group gets the geometric
/// mean of the range.
pub fn gesmr_init(params: &GesmrParams, population_size: usize) -> Result<MutationRatePool> {
    params.validate(population_size)?;
    let (lo, hi) = params.init_range;
    MutationRatePool::new(log_space(lo, hi, params.groups), population_size)
}

/// Reduces per-child changes to one score per group.
pub fn group_deltas(deltas: &[f64], groups: usize, aggregation: Aggregation) -> Result<Vec<f64>> {
    if groups == 0 || !deltas.len().is_multiple_of(groups) {
        return Err(internal!("{} deltas cannot be split into {} equal groups", deltas.len(), groups));
    }
    let size = deltas.len() / groups;
    Ok(deltas
        .chunks(size)
        .map(|g| match aggregation {
            Aggregation::Min => g.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregation::Mean => g.iter().sum::<f64>() / size as f64,
        })
        .collect())
}

/// One generation of the rate GA. Returns the pool unchanged when frozen.
pub fn evolve_rates(
    pool: &MutationRatePool,
    scores: &[f64],
    params: &GesmrParams,
    rng: &mut StreamRng,
) -> Result<MutationRatePool> {
    if scores.len() != pool.rates.len() {
        return Err(internal!("{} scores for {} rates", scores.len(), pool.rates.len()));
    }
    if params.frozen {
        return Ok(pool.clone());
    }
    let k = pool.rates.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let l = params.parent_pool().min(k);
    let mut rates = Vec::with_capacity(k);
    rates.push(pool.rates[order[0]]);
    for _ in 1..k {
        let parent = pool.rates[order[rng.random_range(0..l)]];
        rates.push(meta_mutate(parent, params.meta_mr, rng));
    }
    Ok(MutationRatePool { rates, group_size: pool.group_size })
}

pub struct Gesmr {
    params: GesmrParams,
    pool: MutationRatePool,
    last_scores: Vec<f64>,
}

impl Gesmr {
    pub fn new(params: GesmrParams, population_size: usize) -> Result<Self> {
        let pool = gesmr_init(&params, population_size)?;
        Ok(Self { params, pool, last_scores: Vec::new() })
    }

    pub fn pool(&self) -> &MutationRatePool {
        &self.pool
    }

    pub fn params(&self) -> &GesmrParams {
        &self.params
    }
}

impl MutationRateController for Gesmr {
    fn name(&self) -> &str {
        self.params.variant_name()
    }

    fn propose(&mut self, ctx: &Proposal<'_>, _rng: &mut StreamRng) -> Result<Vec<f64>> {
        let n = ctx.parents.len();
        if n != self.pool.group_size * self.pool.groups() {
            return Err(internal!("pool covers {} children, population has {}", self.pool.group_size * self.pool.groups(), n));
        }
        Ok((1..=n).map(|i| self.pool.assign(i)).collect())
    }

    fn observe(&mut self, deltas: &[f64], rng: &mut StreamRng) -> Result<()> {
        self.last_scores = group_deltas(deltas, self.pool.groups(), self.params.aggregation)?;
        self.pool = evolve_rates(&self.pool, &self.last_scores, &self.params, rng)?;
        Ok(())
    }

    fn rates(&self) -> Vec<f64> {
        self.pool.rates.clone()
    }

    fn group_deltas(&self) -> Option<&[f64]> {
        Some(&self.last_scores)
    }
}
