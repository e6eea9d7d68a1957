//! Vertex windows for localized estimation.
//!
//! A window assigns each vertex a weight `g_k(i)` relative to a centre
//! vertex `k`. Conjugating a binned adjacency by `diag(g_k)` confines the
//! estimator to the neighbourhood of `k`; the trivial all-ones window
//! recovers the global estimator for any centre.

use crate::field::SpatialSample;
use crate::{Error, Result};

/// Weighting profile around a centre vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexWindow {
    /// `g ≡ 1`: no localization; the centre is irrelevant.
    Ones,
    /// `g(i) = 1` iff `‖s_i − s_k‖ ≤ radius`, else 0.
    BallIndicator { radius: f64 },
    /// `g(i) = exp(−‖s_i − s_k‖² / 2ρ²)`: smooth localization.
    GaussianDecay { rho: f64 },
}

impl VertexWindow {
    pub fn ones() -> Self {
        VertexWindow::Ones
    }

    /// Hard ball of the given positive radius.
    pub fn ball(radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be finite and > 0, got {radius}"
            )));
        }
        Ok(VertexWindow::BallIndicator { radius })
    }

    /// Gaussian profile with positive decay scale `rho`.
    pub fn gaussian(rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "gaussian window scale must be finite and > 0, got {rho}"
            )));
        }
        Ok(VertexWindow::GaussianDecay { rho })
    }

    /// Whether this is the all-ones window (no centre needed).
    pub fn is_ones(&self) -> bool {
        matches!(self, VertexWindow::Ones)
    }

    /// Weight vector `g_k` over all vertices for a centre `k`.
    pub fn values(&self, sample: &SpatialSample, center: usize) -> Result<Vec<f64>> {
        if center >= sample.len() {
            return Err(Error::VertexOutOfRange {
                index: center,
                len: sample.len(),
            });
        }
        let n = sample.len();
        Ok(match *self {
            VertexWindow::Ones => vec![1.0; n],
            VertexWindow::BallIndicator { radius } => (0..n)
                .map(|i| {
                    if sample.distance(center, i) <= radius {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            VertexWindow::GaussianDecay { rho } => (0..n)
                .map(|i| {
                    let d = sample.distance(center, i);
                    (-d * d / (2.0 * rho * rho)).exp()
                })
                .collect(),
        })
    }
}
