//! Run configuration files.
//!
//! A config is a JSON document. Every optional field has a default, and
//! [`RunConfig::resolve`] fills in the one default that depends on other
//! fields (the GESMR group count), so the manifest written next to the traces
//! is a complete, runnable config on its own.

use std::fs;
use std::path::Path;

use gesmr::controllers::{default_groups, Aggregation, GesmrParams, SamrParams, UcbParams, FMR_SIGMA};
use gesmr::oracles::{LookaheadPlan, MrGrid};
use gesmr::{ControllerSpec, EvolutionParams, Objective};
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub name: String,
    pub dim: usize,
    /// Seed of the synthetic dataset; only the `mlp` objective reads it.
    /// `None` draws each run's dataset from that run's seed.
    #[serde(default)]
    pub dataset_seed: Option<u64>,
}

impl ObjectiveConfig {
    pub fn new(name: &str, dim: usize) -> Self {
        Self { name: name.to_owned(), dim, dataset_seed: None }
    }

    /// The objective as seen by the run with seed `run_seed`.
    pub fn build(&self, run_seed: u64) -> Result<Objective, LabError> {
        Objective::by_name(&self.name, self.dim, self.dataset_seed.unwrap_or(run_seed))
            .map_err(|e| LabError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSettings {
    /// `None` means round(√N) snapped to a divisor of N.
    #[serde(default)]
    pub groups: Option<usize>,
    #[serde(default = "half")]
    pub mr_selection_rate: f64,
    #[serde(default = "two")]
    pub meta_mr: f64,
    #[serde(default = "init_lo")]
    pub init_lo: f64,
    #[serde(default = "init_hi")]
    pub init_hi: f64,
}

impl Default for GroupSettings {
    fn default() -> Self {
        Self { groups: None, mr_selection_rate: 0.5, meta_mr: 2.0, init_lo: 1e-2, init_hi: 1e2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfAdaptSettings {
    #[serde(default = "two")]
    pub meta_mr: f64,
    #[serde(default = "init_lo")]
    pub init_lo: f64,
    #[serde(default = "init_hi")]
    pub init_hi: f64,
}

impl Default for SelfAdaptSettings {
    fn default() -> Self {
        Self { meta_mr: 2.0, init_lo: 1e-2, init_hi: 1e2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    #[serde(default = "grid_lo")]
    pub lo: f64,
    #[serde(default = "grid_hi")]
    pub hi: f64,
    #[serde(default = "grid_points")]
    pub points: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self { lo: 1e-4, hi: 1e2, points: 9 }
    }
}

impl GridSettings {
    pub fn build(&self) -> Result<MrGrid, LabError> {
        MrGrid::log_spaced(self.lo, self.hi, self.points).map_err(|e| LabError::Config(e.to_string()))
    }
}

/// Which controller (or oracle) drives the mutation rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Algorithm {
    Gesmr(GroupSettings),
    GesmrAvg(GroupSettings),
    GesmrFix(GroupSettings),
    Samr(SelfAdaptSettings),
    Fmr {
        #[serde(default = "fmr_sigma")]
        sigma: f64,
    },
    #[serde(rename = "1cmr")]
    OneCmr,
    #[serde(rename = "15mr")]
    FifteenMr {
        #[serde(default = "one")]
        initial_sigma: f64,
    },
    Ucb {
        #[serde(default = "ucb_arms")]
        arms: usize,
        #[serde(default = "grid_lo")]
        sigma_lo: f64,
        #[serde(default = "grid_hi")]
        sigma_hi: f64,
        #[serde(default = "sqrt_two")]
        exploration: f64,
    },
    /// Look-ahead oracle, re-choosing σ every `period` generations.
    Lamr {
        #[serde(default = "lamr_period")]
        period: usize,
        #[serde(default = "lamr_repeats")]
        repeats: usize,
        #[serde(default)]
        grid: GridSettings,
    },
    /// Best fixed σ by grid search over the config's seeds.
    Ofmr {
        #[serde(default)]
        grid: GridSettings,
    },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Gesmr(_) => "gesmr",
            Algorithm::GesmrAvg(_) => "gesmr-avg",
            Algorithm::GesmrFix(_) => "gesmr-fix",
            Algorithm::Samr(_) => "samr",
            Algorithm::Fmr { .. } => "fmr",
            Algorithm::OneCmr => "1cmr",
            Algorithm::FifteenMr { .. } => "15mr",
            Algorithm::Ucb { .. } => "ucb",
            Algorithm::Lamr { .. } => "lamr",
            Algorithm::Ofmr { .. } => "ofmr",
        }
    }

    /// Oracles use foresight and are reference curves, not competitors.
    pub fn is_oracle(&self) -> bool {
        matches!(self, Algorithm::Lamr { .. } | Algorithm::Ofmr { .. })
    }

    /// Default settings for an algorithm name.
    pub fn from_name(name: &str) -> Result<Self, LabError> {
        let json = format!("{{\"name\":{}}}", serde_json::to_string(name)?);
        serde_json::from_str(&json).map_err(|_| LabError::Config(format!("unknown algorithm '{name}'")))
    }

    fn group_params(settings: &GroupSettings, n: usize) -> GesmrParams {
        GesmrParams {
            groups: settings.groups.unwrap_or_else(|| default_groups(n)),
            mr_selection_rate: settings.mr_selection_rate,
            meta_mr: settings.meta_mr,
            init_range: (settings.init_lo, settings.init_hi),
            aggregation: Aggregation::Min,
            frozen: false,
        }
    }

    /// Controller for the online algorithms; `None` for the oracles.
    pub fn controller(&self, n: usize) -> Option<ControllerSpec> {
        Some(match self {
            Algorithm::Gesmr(s) => ControllerSpec::Gesmr(Self::group_params(s, n)),
            Algorithm::GesmrAvg(s) => ControllerSpec::Gesmr(Self::group_params(s, n).averaged()),
            Algorithm::GesmrFix(s) => ControllerSpec::Gesmr(Self::group_params(s, n).frozen()),
            Algorithm::Samr(s) => {
                ControllerSpec::Samr(SamrParams { meta_mr: s.meta_mr, init_range: (s.init_lo, s.init_hi) })
            }
            Algorithm::Fmr { sigma } => ControllerSpec::Fixed { sigma: *sigma },
            Algorithm::OneCmr => ControllerSpec::OneOverDim,
            Algorithm::FifteenMr { initial_sigma } => ControllerSpec::OneFifth { initial_sigma: *initial_sigma },
            Algorithm::Ucb { arms, sigma_lo, sigma_hi, exploration } => ControllerSpec::Ucb(UcbParams {
                arms: *arms,
                sigma_range: (*sigma_lo, *sigma_hi),
                exploration: *exploration,
            }),
            Algorithm::Lamr { .. } | Algorithm::Ofmr { .. } => return None,
        })
    }

    pub fn lookahead_plan(&self) -> Option<Result<LookaheadPlan, LabError>> {
        match self {
            Algorithm::Lamr { period, repeats, grid } => Some(
                grid.build()
                    .and_then(|g| LookaheadPlan::new(*period, *repeats, g).map_err(|e| LabError::Config(e.to_string()))),
            ),
            _ => None,
        }
    }

    fn groups_mut(&mut self) -> Option<&mut GroupSettings> {
        match self {
            Algorithm::Gesmr(s) | Algorithm::GesmrAvg(s) | Algorithm::GesmrFix(s) => Some(s),
            _ => None,
        }
    }
}

/// Everything needed to reproduce a set of runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub objective: ObjectiveConfig,
    /// Initial population is drawn from `N(0, init_std² I)`.
    #[serde(default = "one")]
    pub init_std: f64,
    pub algorithm: Algorithm,
    pub population_size: usize,
    #[serde(default = "half")]
    pub selection_rate: f64,
    pub generations: usize,
    pub seeds: Vec<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(LabError::ConfigNotFound(path.to_path_buf()))
            }
            Err(e) => return Err(e.into()),
        };
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Config(format!("malformed config: {e}")))
    }

    pub fn to_json(&self) -> Result<String, LabError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn params(&self, seed: u64) -> EvolutionParams {
        EvolutionParams {
            population_size: self.population_size,
            selection_rate: self.selection_rate,
            generations: self.generations,
            seed,
            init_std: self.init_std,
        }
    }

    /// Fills in N-dependent defaults and checks the whole config.
    pub fn resolve(&self) -> Result<Self, LabError> {
        let mut out = self.clone();
        let n = out.population_size;
        if let Some(s) = out.algorithm.groups_mut() {
            s.groups.get_or_insert_with(|| default_groups(n));
        }
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.seeds.is_empty() {
            return Err(LabError::Config("at least one seed is required".into()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(LabError::Config("seeds must be distinct".into()));
        }
        let obj = self.objective.build(self.seeds[0])?;
        let params = self.params(self.seeds[0]);
        params.validate().map_err(|e| LabError::Config(e.to_string()))?;
        if let Some(spec) = self.algorithm.controller(self.population_size) {
            spec.build(&obj, &params).map_err(|e| LabError::Config(e.to_string()))?;
        }
        if let Some(plan) = self.algorithm.lookahead_plan() {
            plan?;
        }
        if let Algorithm::Ofmr { grid } = &self.algorithm {
            grid.build()?;
        }
        Ok(())
    }
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn init_lo() -> f64 {
    1e-2
}
fn init_hi() -> f64 {
    1e2
}
fn grid_lo() -> f64 {
    1e-4
}
fn grid_hi() -> f64 {
    1e2
}
fn grid_points() -> usize {
    9
}
fn fmr_sigma() -> f64 {
    FMR_SIGMA
}
fn ucb_arms() -> usize {
    9
}
fn sqrt_two() -> f64 {
    std::f64::consts::SQRT_2
}
fn lamr_period() -> usize {
    100
}
fn lamr_repeats() -> usize {
    3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(
            r#"{"objective":{"name":"sphere","dim":10},"algorithm":{"name":"gesmr"},
                "population_size":100,"generations":5,"seeds":[1]}"#,
        )
        .unwrap();
        assert_eq!(c.init_std, 1.0);
        assert_eq!(c.selection_rate, 0.5);
        let r = c.resolve().unwrap();
        assert_eq!(r.algorithm, Algorithm::Gesmr(GroupSettings { groups: Some(10), ..GroupSettings::default() }));
    }

    #[test]
    fn bad_group_count_names_nearest_divisor() {
        let c = RunConfig::parse(
            r#"{"objective":{"name":"sphere","dim":2},"algorithm":{"name":"gesmr","groups":7},
                "population_size":64,"generations":1,"seeds":[1]}"#,
        )
        .unwrap();
        let msg = c.resolve().unwrap_err().to_string();
        assert!(msg.contains("nearest valid group count is 8"), "{msg}");
    }

    #[test]
    fn unknown_names_are_config_errors() {
        assert!(matches!(Algorithm::from_name("nope"), Err(LabError::Config(_))));
        assert_eq!(Algorithm::from_name("15mr").unwrap(), Algorithm::FifteenMr { initial_sigma: 1.0 });
        let c = RunConfig::parse(
            r#"{"objective":{"name":"bogus","dim":2},"algorithm":{"name":"fmr"},
                "population_size":4,"generations":1,"seeds":[1]}"#,
        )
        .unwrap();
        assert!(matches!(c.resolve(), Err(LabError::Config(_))));
    }

    #[test]
    fn every_algorithm_name_parses() {
        for name in ControllerSpec::NAMES.iter().chain(&["lamr", "ofmr"]) {
            let a = Algorithm::from_name(name).unwrap();
            assert_eq!(a.name(), *name);
            assert_eq!(a.is_oracle(), *name == "lamr" || *name == "ofmr");
        }
    }
}
