//! Genetic-algorithm optimizer with group-elite co-evolution of mutation rates.
//!
//! The crate is `no_std` (it needs `alloc`). It holds the pure algorithmic
//! parts: benchmark objectives, the truncation-selection GA engine, every
//! mutation-rate controller, the look-ahead oracles and the Monte-Carlo
//! analysis routines. File formats, configuration and the command line live
//! in the companion `gesmr-lab` crate.
//!
//! Enable the `parallel` feature to evaluate offspring and independent runs on
//! the rayon thread pool. Results are bit-identical with or without it: every
//! random draw comes from a substream keyed by its role, generation and index.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod controllers;
pub mod engine;
mod error;
pub mod objectives;
pub mod oracles;
mod par;
pub mod rng;
pub mod stats;

pub use controllers::{ControllerSpec, MutationRateController};
pub use engine::{EvolutionParams, Evolution, GenerationTrace, MrSummary, Population};
pub use error::{Error, Result};
pub use objectives::{MlpTask, Objective, ObjectiveKind};
pub use rng::RngStream;
