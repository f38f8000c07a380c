//! Spatio-temporal small area estimation engine.
//!
//! Fits a Bayesian hierarchical model to plot-level inventory data indexed by
//! area and year: temporally-varying regression coefficients evolving as a
//! random walk, space-varying coefficients with a CAR (conditional
//! autoregressive) prior on the area adjacency graph, and a dynamically
//! evolving CAR intercept. Inference runs through a Gibbs sweep with
//! Metropolis updates for the spatial correlation parameters, backed by a
//! one-time spectral decomposition of the scaled adjacency so that CAR
//! log-determinants cost O(J) per iteration.
//!
//! The crate is `no_std` (with `alloc`); file formats, CSV ingestion, and the
//! command-line surface live in the companion `stsae-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod estimators;
pub mod graph;
pub mod linalg;
pub mod model;
pub mod sampler;
pub mod simulation;

pub use error::Error;
pub use graph::{AdjacencyGraph, CarEigenSystem};
pub use model::{Dataset, Hyperparameters, ModelState, PosteriorDraws};
pub use sampler::{ChainRun, McmcConfig, MetropolisStats};

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
