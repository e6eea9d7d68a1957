//! Variogram estimation for random signals living on spatial sensor graphs.
//!
//! A sensor network is modelled as a weighted graph whose vertices sit at
//! sampled positions in the unit square and whose edge weights decay with
//! Euclidean distance. For a signal `x` observed on the vertices, the
//! spatial-increment energy restricted to a distance bin `Δh` is a Laplacian
//! quadratic form: binning the pairwise distances yields a family of masked
//! adjacency matrices, and
//!
//! ```text
//! 2γ̂(Δh) = 2 · xᵀ L_Δh x / (1ᵀ D_Δh 1)
//! ```
//!
//! recovers the classical empirical variogram when the graph contains every
//! pair. Vertex windows localize the same estimate around a centre vertex,
//! which turns the difference between local and global estimates into a
//! diagnostic for intrinsic stationarity.
//!
//! The crate is organized along that pipeline:
//!
//! - [`field`]: position sampling, variogram models, Gaussian ensembles;
//! - [`graph`]: full / k-nearest-neighbour sensor graphs and Laplacians;
//! - [`bins`]: distance-bin partitions;
//! - [`window`]: vertex windows (ones, ball indicator, Gaussian decay);
//! - [`variogram`]: binned graph families, local/global estimators,
//!   ensemble statistics, stationarity scores;
//! - [`spectral`]: graph Fourier transform and empirical power spectra;
//! - [`io`]: plain-text serialization of every artefact.
//!
//! All randomness is counter-based (ChaCha streams), so results are
//! reproducible bit-for-bit regardless of thread count.

pub mod bins;
pub mod exact;
pub mod field;
pub mod graph;
pub mod io;
pub mod spectral;
pub mod variogram;
pub mod window;

use thiserror::Error;

/// Errors produced by graph construction, estimation and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation (non-positive width, empty input, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested model has no stationary covariance to simulate from.
    #[error("model without stationary covariance: {0}")]
    UnsupportedModel(String),

    /// Cholesky factorization hit a non-positive leading minor (1-based).
    #[error("covariance is not positive semidefinite at leading minor {leading_minor}")]
    NotPositiveDefinite { leading_minor: usize },

    /// Signal/operator dimensions disagree.
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A matrix that must be symmetric is not.
    #[error("matrix is not symmetric (max |A - Aᵀ| = {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    /// A vertex index fell outside `0..n`.
    #[error("vertex index {index} out of range for {len} vertices")]
    VertexOutOfRange { index: usize, len: usize },

    /// Estimates with different bin partitions were mixed in one aggregate.
    #[error("estimates use different bin partitions")]
    MixedPartitions,
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
