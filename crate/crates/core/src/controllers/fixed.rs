use alloc::vec;
use alloc::vec::Vec;

use super::{clamp_rate, MutationRateController, Proposal};
use crate::error::{invalid, Result};
use crate::rng::StreamRng;

pub const FMR_SIGMA: f64 = 0.01;
pub const ONE_FIFTH_INITIAL_SIGMA: f64 = 1.0;

/// Same σ for every child, every generation.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedRate {
    sigma: f64,
}

impl FixedRate {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid!("fixed mutation rate must be positive, got {}", sigma));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// The conventional small fixed rate, σ = 0.01.
pub fn fmr() -> FixedRate {
    FixedRate { sigma: FMR_SIGMA }
}

/// σ = 1/d.
pub fn one_over_d(dim: usize) -> Result<FixedRate> {
    if dim == 0 {
        return Err(invalid!("dimension must be at least 1"));
    }
    FixedRate::new(1.0 / dim as f64)
}

impl MutationRateController for FixedRate {
    fn name(&self) -> &str {
        "fmr"
    }

    fn propose(&mut self, ctx: &Proposal<'_>, _rng: &mut StreamRng) -> Result<Vec<f64>> {
        Ok(vec![self.sigma; ctx.parents.len()])
    }

    fn observe(&mut self, _deltas: &[f64], _rng: &mut StreamRng) -> Result<()> {
        Ok(())
    }

    fn rates(&self) -> Vec<f64> {
        vec![self.sigma]
    }
}

/// Doubles σ when strictly more than a fifth of the mutations improved,
/// halves it otherwise. A mutation improves when its change is negative.
pub fn fifteen_mr_update(sigma: f64, beneficial_fraction: f64) -> f64 {
    if beneficial_fraction > 0.2 {
        2.0 * sigma
    } else {
        0.5 * sigma
    }
}

/// One-fifth success rule applied once per generation to a single global σ.
#[derive(Clone, Debug, PartialEq)]
pub struct OneFifthRule {
    sigma: f64,
}

impl OneFifthRule {
    pub fn new(initial_sigma: f64) -> Result<Self> {
        if !(initial_sigma > 0.0 && initial_sigma.is_finite()) {
            return Err(invalid!("initial mutation rate must be positive, got {}", initial_sigma));
        }
        Ok(Self { sigma: initial_sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl MutationRateController for OneFifthRule {
    fn name(&self) -> &str {
        "15mr"
    }

    fn propose(&mut self, ctx: &Proposal<'_>, _rng: &mut StreamRng) -> Result<Vec<f64>> {
        Ok(vec![self.sigma; ctx.parents.len()])
    }

    fn observe(&mut self, deltas: &[f64], _rng: &mut StreamRng) -> Result<()> {
        if deltas.is_empty() {
            return Ok(());
        }
        let improved = deltas.iter().filter(|d| **d < 0.0).count();
        let fraction = improved as f64 / deltas.len() as f64;
        self.sigma = clamp_rate(fifteen_mr_update(self.sigma, fraction));
        Ok(())
    }

    fn rates(&self) -> Vec<f64> {
        vec![self.sigma]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, RngStream};

    #[test]
    fn fixed_values() {
        assert_eq!(fmr().sigma(), 0.01);
        assert_eq!(one_over_d(100).unwrap().sigma(), 0.01);
        assert_eq!(one_over_d(1).unwrap().sigma(), 1.0);
        assert!(one_over_d(0).is_err());
        assert!(FixedRate::new(0.0).is_err());
    }

    #[test]
    fn one_fifth_rule() {
        assert!((fifteen_mr_update(0.4, 0.3) - 0.8).abs() < 1e-15);
        assert!((fifteen_mr_update(0.4, 0.1) - 0.2).abs() < 1e-15);
        assert_eq!(fifteen_mr_update(0.4, 0.2), 0.2);
    }

    #[test]
    fn one_fifth_controller_counts_strict_improvements() {
        let mut c = OneFifthRule::new(1.0).unwrap();
        let mut rng = RngStream::new(0).substream(Purpose::Observe, 0, 0);
        // 2 of 5 improved (zero does not count) -> 0.4 > 0.2 -> double
        c.observe(&[-1.0, -0.5, 0.0, 1.0, 2.0], &mut rng).unwrap();
        assert_eq!(c.sigma(), 2.0);
        // 1 of 5 -> exactly 0.2 -> halve
        c.observe(&[-1.0, 0.0, 0.0, 1.0, 2.0], &mut rng).unwrap();
        assert_eq!(c.sigma(), 1.0);
    }
}
