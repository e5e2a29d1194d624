//! UCB1 bandit over a fixed set of mutation rates.
//!
//! One arm is pulled per generation and its σ is applied to every child. The
//! reward is the best improvement of the generation, `max(0, -min Δ)`,
//! divided by the largest such improvement seen so far.

use alloc::vec;
use alloc::vec::Vec;

use super::{MutationRateController, Proposal};
use crate::error::{config_err, internal, Result};
use crate::rng::StreamRng;
use crate::stats::log_space;

#[derive(Clone, Debug, PartialEq)]
pub struct UcbParams {
    pub arms: usize,
    pub sigma_range: (f64, f64),
    pub exploration: f64,
}

impl Default for UcbParams {
    fn default() -> Self {
        Self { arms: 9, sigma_range: (1e-4, 1e2), exploration: core::f64::consts::SQRT_2 }
    }
}

/// Arm values, pull counts and reward sums.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditState {
    values: Vec<f64>,
    pulls: Vec<u64>,
    reward_sums: Vec<f64>,
    exploration: f64,
}

impl BanditState {
    pub fn new(values: Vec<f64>, exploration: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(config_err!("a bandit needs at least two arms, got {}", values.len()));
        }
        if !(exploration >= 0.0) {
            return Err(config_err!("exploration coefficient must be nonnegative"));
        }
        let n = values.len();
        Ok(Self { values, pulls: vec![0; n], reward_sums: vec![0.0; n], exploration })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn total_pulls(&self) -> u64 {
        self.pulls.iter().sum()
    }

    pub fn mean_reward(&self, arm: usize) -> f64 {
        if self.pulls[arm] == 0 {
            0.0
        } else {
            self.reward_sums[arm] / self.pulls[arm] as f64
        }
    }

    /// `mean + c * sqrt(2 ln(total) / pulls)`; infinite for unpulled arms.
    pub fn score(&self, arm: usize) -> f64 {
        if self.pulls[arm] == 0 {
            return f64::INFINITY;
        }
        let total = self.total_pulls() as f64;
        self.mean_reward(arm) + self.exploration * libm::sqrt(2.0 * libm::log(total) / self.pulls[arm] as f64)
    }

    /// Unpulled arms first, in order; then the highest score, first on ties.
    pub fn select(&self) -> usize {
        if let Some(arm) = self.pulls.iter().position(|&p| p == 0) {
            return arm;
        }
        let mut best = 0;
        for arm in 1..self.values.len() {
            if self.score(arm) > self.score(best) {
                best = arm;
            }
        }
        best
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.pulls[arm] += 1;
        self.reward_sums[arm] += reward;
    }
}

pub struct Ucb {
    bandit: BanditState,
    current: Option<usize>,
    best_improvement: f64,
}

impl Ucb {
    pub fn new(params: UcbParams) -> Result<Self> {
        let (lo, hi) = params.sigma_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(config_err!("arm range must satisfy 0 < lo < hi, got ({}, {})", lo, hi));
        }
        let bandit = BanditState::new(log_space(lo, hi, params.arms), params.exploration)?;
        Ok(Self { bandit, current: None, best_improvement: 0.0 })
    }

    pub fn bandit(&self) -> &BanditState {
        &self.bandit
    }

    /// Reward for a generation's changes, updating the running normalizer.
    fn reward(&mut self, deltas: &[f64]) -> f64 {
        let best = deltas.iter().copied().fold(f64::INFINITY, f64::min);
        let gain = if best.is_finite() { (-best).max(0.0) } else { 0.0 };
        self.best_improvement = self.best_improvement.max(gain);
        if self.best_improvement > 0.0 {
            gain / self.best_improvement
        } else {
            0.0
        }
    }
}

impl MutationRateController for Ucb {
    fn name(&self) -> &str {
        "ucb"
    }

    fn propose(&mut self, ctx: &Proposal<'_>, _rng: &mut StreamRng) -> Result<Vec<f64>> {
        let arm = self.bandit.select();
        self.current = Some(arm);
        Ok(vec![self.bandit.values[arm]; ctx.parents.len()])
    }

    fn observe(&mut self, deltas: &[f64], _rng: &mut StreamRng) -> Result<()> {
        let arm = self.current.take().ok_or_else(|| internal!("ucb observed without a pulled arm"))?;
        let reward = self.reward(deltas);
        self.bandit.record(arm, reward);
        Ok(())
    }

    fn rates(&self) -> Vec<f64> {
        self.bandit.values.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warm_up_pulls_in_order() {
        let mut b = BanditState::new(vec![1.0, 2.0, 3.0, 4.0], 1.0).unwrap();
        for expected in 0..4 {
            let arm = b.select();
            assert_eq!(arm, expected);
            b.record(arm, 0.0);
        }
    }

    #[test]
    fn rewarded_arm_dominates() {
        let mut b = BanditState::new(vec![1.0, 2.0, 3.0], 1.0).unwrap();
        for arm in 0..3 {
            for _ in 0..1000 {
                b.record(arm, if arm == 1 { 1.0 } else { 0.0 });
            }
        }
        assert!(b.score(1) > b.score(0) && b.score(1) > b.score(2));
        assert_eq!(b.select(), 1);
    }

    /// Straight transcription of UCB1 with deterministic rewards.
    fn reference_pulls(rewards: &[f64], c: f64, steps: usize) -> Vec<u64> {
        let k = rewards.len();
        let mut n = vec![0u64; k];
        let mut s = vec![0.0f64; k];
        for t in 0..steps {
            let arm = if t < k {
                t
            } else {
                let total = t as f64;
                let mut best = 0;
                let mut best_score = f64::NEG_INFINITY;
                for a in 0..k {
                    let sc = s[a] / n[a] as f64 + c * libm::sqrt(2.0 * libm::log(total) / n[a] as f64);
                    if sc > best_score {
                        best_score = sc;
                        best = a;
                    }
                }
                best
            };
            n[arm] += 1;
            s[arm] += rewards[arm];
        }
        n
    }

    #[test]
    fn better_arm_pulled_more_and_matches_reference() {
        let rewards = [0.0, 1.0];
        let mut b = BanditState::new(vec![0.1, 1.0], 1.0).unwrap();
        for _ in 0..100 {
            let arm = b.select();
            b.record(arm, rewards[arm]);
        }
        assert_eq!(b.pulls(), reference_pulls(&rewards, 1.0, 100).as_slice());
        assert!(b.pulls()[1] > b.pulls()[0]);
        assert_eq!(b.total_pulls(), 100);
    }

    #[test]
    fn reward_is_normalized_by_running_best() {
        let mut u = Ucb::new(UcbParams::default()).unwrap();
        assert_eq!(u.reward(&[1.0, 2.0]), 0.0);
        assert_eq!(u.reward(&[-4.0, 2.0]), 1.0);
        assert_eq!(u.reward(&[-1.0, 0.0]), 0.25);
        assert_eq!(u.reward(&[-8.0]), 1.0);
    }

    #[test]
    fn default_arms() {
        let u = Ucb::new(UcbParams::default()).unwrap();
        assert_eq!(u.bandit().values().len(), 9);
        assert_eq!(u.bandit().values()[0], 1e-4);
        assert_eq!(u.bandit().values()[8], 1e2);
        assert!(BanditState::new(vec![1.0], 1.0).is_err());
    }
}
