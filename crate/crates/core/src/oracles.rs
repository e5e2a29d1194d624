//! Foresight baselines.
//!
//! Both oracles spend evaluations the online controllers never get, so they
//! serve as reference curves rather than competitors:
//!
//! * OFMR runs a complete fixed-rate evolution for every grid σ and keeps the
//!   one with the best median final elite.
//! * LAMR-G re-picks σ every `G` generations by cloning the current
//!   population and simulating `G` generations for every grid σ.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::controllers::{FixedRate, MutationRateController, Proposal};
use crate::engine::{Evolution, EvolutionParams, GenerationTrace, Population, RunOutcome};
use crate::error::{invalid, Result};
use crate::objectives::Objective;
use crate::par;
use crate::rng::{RngStream, StreamRng};
use crate::stats::{argmin, log_space, mean, median};

/// Strictly increasing positive mutation rates.
#[derive(Clone, Debug, PartialEq)]
pub struct MrGrid(Vec<f64>);

impl MrGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid!("mutation-rate grid is empty"));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid!("mutation-rate grid values must be positive and finite"));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid!("mutation-rate grid must be strictly increasing"));
        }
        Ok(Self(values))
    }

    /// `n` log-spaced values between `lo` and `hi`.
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(log_space(lo, hi, n))
    }

    /// Nine values from 1e-4 to 1e2.
    pub fn default_grid() -> Self {
        Self::log_spaced(1e-4, 1e2, 9).expect("default grid is valid")
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LookaheadPlan {
    /// Generations between re-decisions, `G`.
    pub period: usize,
    /// Independent simulations per grid σ; their final elites are averaged.
    pub repeats: usize,
    pub grid: MrGrid,
}

impl LookaheadPlan {
    pub fn new(period: usize, repeats: usize, grid: MrGrid) -> Result<Self> {
        if period == 0 {
            return Err(invalid!("look-ahead period must be positive"));
        }
        if repeats == 0 {
            return Err(invalid!("look-ahead repeats must be positive"));
        }
        Ok(Self { period, repeats, grid })
    }
}

fn fixed_run(obj: &Objective, params: EvolutionParams, sigma: f64) -> Result<RunOutcome> {
    Evolution::new(obj, params, Box::new(FixedRate::new(sigma)?))?.run()
}

#[derive(Clone, Debug)]
pub struct OfmrOutcome {
    pub best_sigma: f64,
    pub best_index: usize,
    /// Median final elite per grid σ.
    pub medians: Vec<f64>,
    /// `traces[σ index][seed index]`.
    pub traces: Vec<Vec<Vec<GenerationTrace>>>,
}

/// Full fixed-rate evolution for every (σ, seed); picks the σ with the lowest
/// median final elite. `params.seed` is ignored in favour of `seeds`.
pub fn ofmr_search(grid: &MrGrid, obj: &Objective, params: &EvolutionParams, seeds: &[u64]) -> Result<OfmrOutcome> {
    ofmr_search_per_seed(grid, core::slice::from_ref(obj), params, seeds)
}

/// [`ofmr_search`] where seed `i` runs on `objectives[i]`. A single objective
/// is shared by every seed.
pub fn ofmr_search_per_seed(
    grid: &MrGrid,
    objectives: &[Objective],
    params: &EvolutionParams,
    seeds: &[u64],
) -> Result<OfmrOutcome> {
    if seeds.is_empty() {
        return Err(invalid!("grid search needs at least one seed"));
    }
    if objectives.len() != 1 && objectives.len() != seeds.len() {
        return Err(invalid!("need one objective or one per seed, got {} for {} seeds", objectives.len(), seeds.len()));
    }
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|s| (0..seeds.len()).map(move |i| (s, i))).collect();
    let outcomes = par::map(jobs, |(s, i)| {
        let obj = &objectives[if objectives.len() == 1 { 0 } else { i }];
        fixed_run(obj, params.with_seed(seeds[i]), grid.values()[s])
    });
    let mut traces: Vec<Vec<Vec<GenerationTrace>>> = (0..grid.len()).map(|_| Vec::new()).collect();
    let mut finals: Vec<Vec<f64>> = (0..grid.len()).map(|_| Vec::new()).collect();
    for (job, outcome) in outcomes.into_iter().enumerate() {
        let outcome = outcome?;
        let s = job / seeds.len();
        finals[s].push(outcome.final_elite());
        traces[s].push(outcome.traces);
    }
    let medians: Vec<f64> = finals.iter().map(|f| median(f)).collect();
    let best_index = argmin(&medians).expect("grid is nonempty");
    Ok(OfmrOutcome { best_sigma: grid.values()[best_index], best_index, medians, traces })
}

/// Result of one look-ahead decision.
#[derive(Clone, Debug, PartialEq)]
pub struct LookaheadChoice {
    pub sigma: f64,
    /// Mean final elite per grid σ.
    pub scores: Vec<f64>,
    pub evaluations: u64,
}

/// Simulates `plan.period` generations from `snapshot` for every grid σ,
/// `plan.repeats` times each, and returns the σ with the best mean elite.
///
/// Leg `(σ index, repeat)` runs on `stream.derive(generation, σ index, repeat)`.
pub fn lamr_choose(
    snapshot: &Population,
    plan: &LookaheadPlan,
    obj: &Objective,
    params: &EvolutionParams,
    stream: &RngStream,
) -> Result<LookaheadChoice> {
    let generation = snapshot.generation();
    let jobs: Vec<(usize, usize)> =
        (0..plan.grid.len()).flat_map(|s| (0..plan.repeats).map(move |r| (s, r))).collect();
    let results = par::map(jobs, |(s, r)| -> Result<(f64, u64)> {
        let leg = EvolutionParams {
            generations: plan.period,
            seed: stream.derive(generation, s as u64, r as u64).seed(),
            ..*params
        };
        let controller = Box::new(FixedRate::new(plan.grid.values()[s])?);
        let out = Evolution::from_population(obj, leg, controller, snapshot.clone())?.run()?;
        Ok((out.final_elite(), out.traces.last().map_or(0, |t| t.cumulative_evaluations)))
    });
    let mut finals: Vec<Vec<f64>> = (0..plan.grid.len()).map(|_| Vec::new()).collect();
    let mut evaluations = 0;
    for (job, res) in results.into_iter().enumerate() {
        let (elite, evals) = res?;
        finals[job / plan.repeats].push(elite);
        evaluations += evals;
    }
    let scores: Vec<f64> = finals.iter().map(|f| mean(f)).collect();
    let best = argmin(&scores).expect("grid is nonempty");
    Ok(LookaheadChoice { sigma: plan.grid.values()[best], scores, evaluations })
}

/// Controller that re-decides σ by look-ahead at every multiple of the period.
pub struct Lookahead<'a> {
    plan: LookaheadPlan,
    objective: &'a Objective,
    params: EvolutionParams,
    stream: RngStream,
    sigma: Option<f64>,
    evaluations: u64,
}

impl<'a> Lookahead<'a> {
    /// Look-ahead legs draw from streams derived from `params.seed`, separate
    /// from the main run's.
    pub fn new(plan: LookaheadPlan, objective: &'a Objective, params: EvolutionParams) -> Self {
        let stream = RngStream::new(params.seed).derive(u64::MAX, 0, 0);
        Self { plan, objective, params, stream, sigma: None, evaluations: 0 }
    }
}

impl MutationRateController for Lookahead<'_> {
    fn name(&self) -> &str {
        "lamr"
    }

    fn propose(&mut self, ctx: &Proposal<'_>, _rng: &mut StreamRng) -> Result<Vec<f64>> {
        if self.sigma.is_none() || ctx.generation.is_multiple_of(self.plan.period as u64) {
            let choice = lamr_choose(ctx.population, &self.plan, self.objective, &self.params, &self.stream)?;
            self.evaluations += choice.evaluations;
            self.sigma = Some(choice.sigma);
        }
        Ok(alloc::vec![self.sigma.expect("set above"); ctx.parents.len()])
    }

    fn observe(&mut self, _deltas: &[f64], _rng: &mut StreamRng) -> Result<()> {
        Ok(())
    }

    fn rates(&self) -> Vec<f64> {
        match self.sigma {
            Some(s) => alloc::vec![s],
            None => self.plan.grid.values().to_vec(),
        }
    }

    fn lookahead_evaluations(&self) -> u64 {
        self.evaluations
    }
}

#[derive(Clone, Debug)]
pub struct LamrOutcome {
    pub run: RunOutcome,
    /// σ applied in generations `1..=G`.
    pub sigma_curve: Vec<f64>,
}

/// Main LAMR-G run. Its own evaluation count matches any fixed-rate run of the
/// same size; the look-ahead cost is reported separately.
pub fn lamr_run(obj: &Objective, params: &EvolutionParams, plan: &LookaheadPlan) -> Result<LamrOutcome> {
    let controller = Box::new(Lookahead::new(plan.clone(), obj, *params));
    let run = Evolution::new(obj, *params, controller)?.run()?;
    let sigma_curve = run.sigma_curve();
    Ok(LamrOutcome { run, sigma_curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn grid_validation() {
        assert!(MrGrid::new(vec![]).is_err());
        assert!(MrGrid::new(vec![1.0, 1.0]).is_err());
        assert!(MrGrid::new(vec![0.0, 1.0]).is_err());
        assert_eq!(MrGrid::default_grid().len(), 9);
        assert!(LookaheadPlan::new(0, 1, MrGrid::default_grid()).is_err());
        assert!(LookaheadPlan::new(1, 0, MrGrid::default_grid()).is_err());
    }

    #[test]
    fn single_value_grids_return_that_value() {
        let obj = Objective::ackley(3).unwrap();
        let params = EvolutionParams::new(8, 10, 1);
        let grid = MrGrid::new(vec![0.37]).unwrap();
        assert_eq!(ofmr_search(&grid, &obj, &params, &[1, 2]).unwrap().best_sigma, 0.37);
        let plan = LookaheadPlan::new(3, 2, grid).unwrap();
        let pop = Population::sample(&obj, 9, 1.0, &RngStream::new(0));
        let choice = lamr_choose(&pop, &plan, &obj, &params, &RngStream::new(5)).unwrap();
        assert_eq!(choice.sigma, 0.37);
        assert_eq!(choice.evaluations, 2 * 3 * 8);
    }

    #[test]
    fn lookahead_near_optimum_prefers_smallest_rate() {
        let obj = Objective::sphere(4).unwrap();
        let params = EvolutionParams::new(16, 1, 0);
        let plan = LookaheadPlan::new(1, 3, MrGrid::default_grid()).unwrap();
        // Everyone sits at the optimum: no σ can improve, ties go to the smallest.
        let at_opt = Population::from_members(&obj, vec![vec![0.0; 4]; 17], 0).unwrap();
        let c = lamr_choose(&at_opt, &plan, &obj, &params, &RngStream::new(1)).unwrap();
        assert_eq!(c.sigma, 1e-4);
        // Just off the optimum only the smallest steps can still help.
        let mut near = vec![vec![0.0; 4]; 17];
        for m in near.iter_mut() {
            m[0] = 1e-5;
        }
        let near = Population::from_members(&obj, near, 0).unwrap();
        let c = lamr_choose(&near, &plan, &obj, &params, &RngStream::new(1)).unwrap();
        assert_eq!(c.sigma, 1e-4, "scores {:?}", c.scores);
    }

    #[test]
    fn lookahead_choice_is_deterministic() {
        let obj = Objective::rastrigin(3).unwrap();
        let params = EvolutionParams::new(8, 1, 0);
        let plan = LookaheadPlan::new(4, 2, MrGrid::default_grid()).unwrap();
        let pop = Population::sample(&obj, 9, 1.0, &RngStream::new(3));
        let a = lamr_choose(&pop, &plan, &obj, &params, &RngStream::new(9)).unwrap();
        let b = lamr_choose(&pop, &plan, &obj, &params, &RngStream::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lamr_curve_steps_only_at_period_boundaries() {
        let obj = Objective::ackley(4).unwrap();
        let params = EvolutionParams::new(8, 23, 2);
        let plan = LookaheadPlan::new(5, 1, MrGrid::default_grid()).unwrap();
        let out = lamr_run(&obj, &params, &plan).unwrap();
        assert_eq!(out.sigma_curve.len(), 23);
        // curve[i] is the σ used by the step starting at generation i
        for i in 1..out.sigma_curve.len() {
            if i % 5 != 0 {
                assert_eq!(out.sigma_curve[i], out.sigma_curve[i - 1], "break at {i}");
            }
            assert!(MrGrid::default_grid().values().contains(&out.sigma_curve[i]));
        }
        for w in out.run.traces.windows(2) {
            assert!(w[1].elite_value <= w[0].elite_value);
        }
        assert_eq!(out.run.traces.last().unwrap().cumulative_evaluations, 9 + 23 * 8);
        assert_eq!(out.run.lookahead_evaluations, 5 * 9 * 5 * 8);
    }
}
