//! Self-adaptation: each solution carries its own rate, selected jointly with
//! it and meta-mutated before being used on the child.

use alloc::vec::Vec;

use rand::Rng;

use super::{meta_mutate, MutationRateController, Proposal};
use crate::error::{config_err, internal, Result};
use crate::rng::{Purpose, RngStream, StreamRng};

#[derive(Clone, Debug, PartialEq)]
pub struct SamrParams {
    pub meta_mr: f64,
    /// Initial rates are drawn log-uniformly from this range.
    pub init_range: (f64, f64),
}

impl Default for SamrParams {
    fn default() -> Self {
        Self { meta_mr: 2.0, init_range: (1e-2, 1e2) }
    }
}

pub struct Samr {
    params: SamrParams,
    /// One rate per population slot, aligned with the current population.
    rates: Vec<f64>,
}

impl Samr {
    pub fn new(params: SamrParams, population_size: usize, seed: u64) -> Result<Self> {
        let (lo, hi) = params.init_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(config_err!("initial rate range must satisfy 0 < lo <= hi, got ({}, {})", lo, hi));
        }
        if !(params.meta_mr >= 1.0 && params.meta_mr.is_finite()) {
            return Err(config_err!("meta mutation rate must be >= 1, got {}", params.meta_mr));
        }
        let mut rng = RngStream::new(seed).substream(Purpose::ControllerInit, 0, 0);
        let (a, b) = (libm::log10(lo), libm::log10(hi));
        let rates = (0..=population_size)
            .map(|_| if a == b { lo } else { libm::pow(10.0, rng.random_range(a..b)) })
            .collect();
        Ok(Self { params, rates })
    }

    /// Starts from explicit per-slot rates.
    pub fn with_rates(params: SamrParams, rates: Vec<f64>) -> Self {
        Self { params, rates }
    }

    pub fn per_individual(&self) -> &[f64] {
        &self.rates
    }
}

impl MutationRateController for Samr {
    fn name(&self) -> &str {
        "samr"
    }

    fn on_sort(&mut self, order: &[usize]) {
        self.rates = order.iter().map(|&i| self.rates[i]).collect();
    }

    fn propose(&mut self, ctx: &Proposal<'_>, rng: &mut StreamRng) -> Result<Vec<f64>> {
        if ctx.parents.len() + 1 != self.rates.len() {
            return Err(internal!("{} rates for a population of {}", self.rates.len(), ctx.parents.len() + 1));
        }
        let mut next = Vec::with_capacity(self.rates.len());
        next.push(self.rates[0]);
        for &p in ctx.parents {
            next.push(meta_mutate(self.rates[p], self.params.meta_mr, rng));
        }
        self.rates = next;
        Ok(self.rates[1..].to_vec())
    }

    fn observe(&mut self, _deltas: &[f64], _rng: &mut StreamRng) -> Result<()> {
        Ok(())
    }

    fn rates(&self) -> Vec<f64> {
        self.rates.clone()
    }
}
