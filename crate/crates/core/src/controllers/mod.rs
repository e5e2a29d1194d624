//! Online mutation-rate controllers.
//!
//! Every strategy implements [`MutationRateController`]: it proposes one σ per
//! non-elite child before mutation and observes the per-child change in
//! objective value afterwards. [`ControllerSpec`] is the serializable recipe
//! used to build one for a given objective and population size.

mod fixed;
mod gesmr;
mod samr;
mod ucb;

use alloc::boxed::Box;
use alloc::vec::Vec;

pub use fixed::{fifteen_mr_update, fmr, one_over_d, FixedRate, OneFifthRule, FMR_SIGMA, ONE_FIFTH_INITIAL_SIGMA};
pub use gesmr::{
    default_groups, evolve_rates, gesmr_init, group_deltas, nearest_divisor, Aggregation, Gesmr, GesmrParams,
    MutationRatePool,
};
pub use samr::{Samr, SamrParams};
pub use ucb::{BanditState, Ucb, UcbParams};

use crate::engine::{EvolutionParams, Population};
use crate::error::Result;
use crate::objectives::Objective;
use crate::rng::StreamRng;

/// Smallest and largest rate a multiplicative update may produce.
pub const MIN_RATE: f64 = 1e-300;
pub const MAX_RATE: f64 = 1e300;

pub(crate) fn clamp_rate(rate: f64) -> f64 {
    rate.clamp(MIN_RATE, MAX_RATE)
}

/// Meta-mutation `σ · τ^ε`, `ε ~ U(-1, 1)`.
pub(crate) fn meta_mutate(sigma: f64, tau: f64, rng: &mut StreamRng) -> f64 {
    use rand::Rng;
    let eps: f64 = rng.random_range(-1.0..1.0);
    clamp_rate(sigma * libm::pow(tau, eps))
}

/// What the engine shows a controller before mutation.
pub struct Proposal<'p> {
    pub generation: u64,
    /// The sorted population the parents were drawn from.
    pub population: &'p Population,
    /// `parents[i - 1]` is the sorted index of child `i`'s parent.
    pub parents: &'p [usize],
}

pub trait MutationRateController {
    fn name(&self) -> &str;

    /// Called after the population is sorted; `order[j]` is the pre-sort index
    /// of the member now at position `j`.
    fn on_sort(&mut self, _order: &[usize]) {}

    /// One σ for each child `1..=N`.
    fn propose(&mut self, ctx: &Proposal<'_>, rng: &mut StreamRng) -> Result<Vec<f64>>;

    /// Per-child `f(child) - f(parent)`, aligned with the proposal.
    fn observe(&mut self, deltas: &[f64], rng: &mut StreamRng) -> Result<()>;

    /// Current rate state, e.g. the whole pool for group-based controllers.
    fn rates(&self) -> Vec<f64>;

    /// Per-group Δ_k from the last observation.
    fn group_deltas(&self) -> Option<&[f64]> {
        None
    }

    /// Objective evaluations spent outside the main run.
    fn lookahead_evaluations(&self) -> u64 {
        0
    }
}

impl<C: MutationRateController + ?Sized> MutationRateController for Box<C> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn on_sort(&mut self, order: &[usize]) {
        (**self).on_sort(order)
    }
    fn propose(&mut self, ctx: &Proposal<'_>, rng: &mut StreamRng) -> Result<Vec<f64>> {
        (**self).propose(ctx, rng)
    }
    fn observe(&mut self, deltas: &[f64], rng: &mut StreamRng) -> Result<()> {
        (**self).observe(deltas, rng)
    }
    fn rates(&self) -> Vec<f64> {
        (**self).rates()
    }
    fn group_deltas(&self) -> Option<&[f64]> {
        (**self).group_deltas()
    }
    fn lookahead_evaluations(&self) -> u64 {
        (**self).lookahead_evaluations()
    }
}

/// Recipe for one online controller.
#[derive(Clone, Debug, PartialEq)]
pub enum ControllerSpec {
    /// GESMR and its two ablations, distinguished by `aggregation` / `frozen`.
    Gesmr(GesmrParams),
    Samr(SamrParams),
    Fixed { sigma: f64 },
    /// Fixed `σ = 1/d`.
    OneOverDim,
    OneFifth { initial_sigma: f64 },
    Ucb(UcbParams),
}

impl ControllerSpec {
    pub const NAMES: [&'static str; 8] = ["gesmr", "gesmr-avg", "gesmr-fix", "samr", "fmr", "1cmr", "15mr", "ucb"];

    /// GESMR with the default group count for population size `n`.
    pub fn gesmr_default(n: usize) -> Self {
        ControllerSpec::Gesmr(GesmrParams::new(default_groups(n)))
    }

    /// Every controller with default settings, in [`Self::NAMES`] order.
    pub fn roster(n: usize) -> Vec<ControllerSpec> {
        let k = default_groups(n);
        alloc::vec![
            ControllerSpec::Gesmr(GesmrParams::new(k)),
            ControllerSpec::Gesmr(GesmrParams::new(k).averaged()),
            ControllerSpec::Gesmr(GesmrParams::new(k).frozen()),
            ControllerSpec::Samr(SamrParams::default()),
            ControllerSpec::Fixed { sigma: fixed::FMR_SIGMA },
            ControllerSpec::OneOverDim,
            ControllerSpec::OneFifth { initial_sigma: fixed::ONE_FIFTH_INITIAL_SIGMA },
            ControllerSpec::Ucb(UcbParams::default()),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ControllerSpec::Gesmr(p) => p.variant_name(),
            ControllerSpec::Samr(_) => "samr",
            ControllerSpec::Fixed { .. } => "fmr",
            ControllerSpec::OneOverDim => "1cmr",
            ControllerSpec::OneFifth { .. } => "15mr",
            ControllerSpec::Ucb(_) => "ucb",
        }
    }

    pub fn build(&self, obj: &Objective, params: &EvolutionParams) -> Result<Box<dyn MutationRateController>> {
        let n = params.population_size;
        Ok(match self {
            ControllerSpec::Gesmr(p) => Box::new(Gesmr::new(p.clone(), n)?),
            ControllerSpec::Samr(p) => Box::new(Samr::new(p.clone(), n, params.seed)?),
            ControllerSpec::Fixed { sigma } => Box::new(FixedRate::new(*sigma)?),
            ControllerSpec::OneOverDim => Box::new(one_over_d(obj.dim())?),
            ControllerSpec::OneFifth { initial_sigma } => Box::new(OneFifthRule::new(*initial_sigma)?),
            ControllerSpec::Ucb(p) => Box::new(Ucb::new(p.clone())?),
        })
    }
}
