//! Error type shared across the engine.

use alloc::boxed::Box;
use alloc::string::String;

/// Everything that can go wrong while building graphs, loading data,
/// sampling, or scoring.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown area identifier `{id}`")]
    UnknownArea { id: String },

    #[error("area `{id}` has no neighbors; the adjacency graph must have no disconnected areas")]
    IslandArea { id: String },

    #[error("self-loop on area `{id}`")]
    SelfLoop { id: String },

    #[error("symmetric eigensolver failed to converge")]
    EigenFailure,

    #[error("non-positive determinant factor {factor} at area {area}; spatial correlation out of valid range")]
    NonPositiveFactor { area: usize, factor: f64 },

    #[error("spatial correlation {value} outside the open interval (0, 1)")]
    CorrelationOutOfRange { value: f64 },

    #[error("variance {value} must be strictly positive")]
    NonPositiveVariance { value: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("Cholesky factorization failed for {context}")]
    CholeskyFailure { context: &'static str },

    #[error("invalid hyperparameters: {detail}")]
    InvalidHyperparameters { detail: String },

    #[error("invalid MCMC configuration: {detail}")]
    InvalidConfig { detail: String },

    #[error("draw matrices misaligned: {detail}")]
    MisalignedDraws { detail: String },

    #[error("trend needs at least two time points, got {num_times}")]
    DegenerateTime { num_times: usize },

    #[error("invalid study specification: {detail}")]
    InvalidSpec { detail: String },

    #[error("sampling intensity {requested} exceeds the {available} population units in area {area}, year index {year}")]
    IntensityExceedsPopulation {
        area: usize,
        year: usize,
        requested: usize,
        available: usize,
    },

    #[error("no valid replicates for estimator `{estimator}`")]
    NoValidReplicates { estimator: String },

    #[error("chain aborted at iteration {iteration} while updating {parameter}: {source}")]
    ChainAborted {
        iteration: usize,
        parameter: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize, parameter: &'static str) -> Error {
        Error::ChainAborted {
            iteration,
            parameter,
            source: Box::new(self),
        }
    }
}
