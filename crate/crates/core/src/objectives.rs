//! Objective functions `f: R^d -> R`, minimized by every optimizer in the crate.
//!
//! The classic test functions use their standard textbook forms. `Linear` is
//! `sum(x)`, which is unbounded below, so larger mutation rates always help.
//! [`MlpTask`] wraps a small fixed-topology regression network whose flattened
//! weights are the search vector.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{E, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::rng::{Purpose, RngStream};

/// Which function an [`Objective`] computes.
#[derive(Clone, Debug, PartialEq)]
pub enum ObjectiveKind {
    Sphere,
    Ackley,
    Griewank,
    Rastrigin,
    Rosenbrock,
    Linear,
    Mlp(MlpTask),
}

impl ObjectiveKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::Sphere => "sphere",
            ObjectiveKind::Ackley => "ackley",
            ObjectiveKind::Griewank => "griewank",
            ObjectiveKind::Rastrigin => "rastrigin",
            ObjectiveKind::Rosenbrock => "rosenbrock",
            ObjectiveKind::Linear => "linear",
            ObjectiveKind::Mlp(_) => "mlp",
        }
    }
}

/// Names accepted by [`Objective::by_name`].
pub const OBJECTIVE_NAMES: [&str; 7] =
    ["sphere", "ackley", "griewank", "rastrigin", "rosenbrock", "linear", "mlp"];

/// A named, immutable evaluation function over `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    name: String,
    dim: usize,
    kind: ObjectiveKind,
}

impl Objective {
    pub fn new(kind: ObjectiveKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid!("objective dimension must be at least 1"));
        }
        if let ObjectiveKind::Mlp(task) = &kind {
            if task.param_count() != dim {
                return Err(invalid!(
                    "mlp task has {} parameters but dimension {} was requested",
                    task.param_count(),
                    dim
                ));
            }
        }
        Ok(Self { name: kind.name().to_string(), dim, kind })
    }

    pub fn sphere(dim: usize) -> Result<Self> {
        Self::new(ObjectiveKind::Sphere, dim)
    }

    pub fn ackley(dim: usize) -> Result<Self> {
        Self::new(ObjectiveKind::Ackley, dim)
    }

    pub fn rastrigin(dim: usize) -> Result<Self> {
        Self::new(ObjectiveKind::Rastrigin, dim)
    }

    pub fn linear(dim: usize) -> Result<Self> {
        Self::new(ObjectiveKind::Linear, dim)
    }

    /// Looks an objective up by its config name. `seed` only matters for
    /// `mlp`, whose synthetic dataset is drawn from it; `mlp` requires
    /// `dim == MlpTask::DEFAULT_PARAM_COUNT`.
    pub fn by_name(name: &str, dim: usize, seed: u64) -> Result<Self> {
        let kind = match name {
            "sphere" => ObjectiveKind::Sphere,
            "ackley" => ObjectiveKind::Ackley,
            "griewank" => ObjectiveKind::Griewank,
            "rastrigin" => ObjectiveKind::Rastrigin,
            "rosenbrock" => ObjectiveKind::Rosenbrock,
            "linear" => ObjectiveKind::Linear,
            "mlp" => ObjectiveKind::Mlp(MlpTask::two_cluster_regression(seed)),
            other => {
                return Err(invalid!(
                    "unknown objective '{}' (expected one of {:?})",
                    other,
                    OBJECTIVE_NAMES
                ))
            }
        };
        Self::new(kind, dim)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(invalid!(
                "{} expects a vector of length {}, got {}",
                self.name,
                self.dim,
                x.len()
            ));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the length check; callers guarantee `x.len() == dim`.
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ObjectiveKind::Sphere => sphere(x),
            ObjectiveKind::Ackley => ackley(x),
            ObjectiveKind::Griewank => griewank(x),
            ObjectiveKind::Rastrigin => rastrigin(x),
            ObjectiveKind::Rosenbrock => rosenbrock(x),
            ObjectiveKind::Linear => x.iter().sum(),
            ObjectiveKind::Mlp(task) => task.loss(x),
        }
    }

    /// Global minimizer, when one exists.
    pub fn known_minimizer(&self) -> Option<Vec<f64>> {
        match self.kind {
            ObjectiveKind::Sphere
            | ObjectiveKind::Ackley
            | ObjectiveKind::Griewank
            | ObjectiveKind::Rastrigin => Some(vec![0.0; self.dim]),
            ObjectiveKind::Rosenbrock => Some(vec![1.0; self.dim]),
            ObjectiveKind::Linear | ObjectiveKind::Mlp(_) => None,
        }
    }
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x.iter().map(|v| libm::cos(2.0 * PI * v)).sum::<f64>() / d;
    -20.0 * libm::exp(-0.2 * libm::sqrt(sq)) - libm::exp(cs) + 20.0 + E
}

fn griewank(x: &[f64]) -> f64 {
    let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| libm::cos(v / libm::sqrt((i + 1) as f64)))
        .product();
    1.0 + sum - prod
}

fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter().map(|v| v * v - 10.0 * libm::cos(2.0 * PI * v)).sum::<f64>()
}

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = 1.0 - w[0];
            100.0 * a * a + b * b
        })
        .sum()
}

/// Fixed-topology MLP regression problem: tanh hidden layers, identity output,
/// mean squared error over a fixed dataset.
///
/// Parameters are laid out layer by layer; within a layer the `out x in`
/// weight matrix comes first in row-major order, followed by the `out` biases.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpTask {
    layer_sizes: Vec<usize>,
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl MlpTask {
    /// Parameter count of the default 2-8-1 network.
    pub const DEFAULT_PARAM_COUNT: usize = 33;

    pub fn new(layer_sizes: Vec<usize>, dataset: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(invalid!("mlp needs at least two positive layer sizes, got {:?}", layer_sizes));
        }
        if dataset.is_empty() {
            return Err(invalid!("mlp dataset is empty"));
        }
        let (n_in, n_out) = (layer_sizes[0], *layer_sizes.last().unwrap());
        let mut inputs = Vec::with_capacity(dataset.len());
        let mut targets = Vec::with_capacity(dataset.len());
        for (i, (x, y)) in dataset.into_iter().enumerate() {
            if x.len() != n_in || y.len() != n_out {
                return Err(invalid!(
                    "dataset row {} has shape ({}, {}), network expects ({}, {})",
                    i,
                    x.len(),
                    y.len(),
                    n_in,
                    n_out
                ));
            }
            inputs.push(x);
            targets.push(y);
        }
        Ok(Self { layer_sizes, inputs, targets })
    }

    /// The default desk-scale task: a 2-8-1 network fit to 64 points drawn
    /// from two Gaussian clusters, with a cluster offset plus a wavy term as
    /// the target.
    pub fn two_cluster_regression(seed: u64) -> Self {
        let mut rng = RngStream::new(seed).substream(Purpose::Dataset, 0, 0);
        let mut data = Vec::with_capacity(64);
        for i in 0..64 {
            let label = if i % 2 == 0 { 1.0 } else { -1.0 };
            let x0 = label + 0.5 * rng.sample::<f64, _>(StandardNormal);
            let x1 = label + 0.5 * rng.sample::<f64, _>(StandardNormal);
            let noise: f64 = rng.sample(StandardNormal);
            let y = 0.5 * label + 0.5 * libm::sin(1.5 * (x0 - x1)) + 0.05 * noise;
            data.push((vec![x0, x1], vec![y]));
        }
        Self::new(vec![2, 8, 1], data).expect("default task is well formed")
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn dataset_len(&self) -> usize {
        self.inputs.len()
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn evaluate(&self, params: &[f64]) -> Result<f64> {
        if params.len() != self.param_count() {
            return Err(invalid!(
                "mlp expects {} parameters, got {}",
                self.param_count(),
                params.len()
            ));
        }
        Ok(self.loss(params))
    }

    fn loss(&self, params: &[f64]) -> f64 {
        let widest = self.layer_sizes.iter().copied().max().unwrap_or(0);
        let mut cur = Vec::with_capacity(widest);
        let mut next = Vec::with_capacity(widest);
        let mut total = 0.0;
        let last = self.layer_sizes.len() - 2;
        for (x, y) in self.inputs.iter().zip(&self.targets) {
            cur.clear();
            cur.extend_from_slice(x);
            let mut offset = 0;
            for (layer, w) in self.layer_sizes.windows(2).enumerate() {
                let (n_in, n_out) = (w[0], w[1]);
                let weights = &params[offset..offset + n_in * n_out];
                let biases = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
                offset += n_in * n_out + n_out;
                next.clear();
                for o in 0..n_out {
                    let row = &weights[o * n_in..(o + 1) * n_in];
                    let z = row.iter().zip(&cur).map(|(a, b)| a * b).sum::<f64>() + biases[o];
                    next.push(if layer == last { z } else { libm::tanh(z) });
                }
                core::mem::swap(&mut cur, &mut next);
            }
            total += cur.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>();
        }
        total / (self.inputs.len() * self.targets[0].len()) as f64
    }
}
