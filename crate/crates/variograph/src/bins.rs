//! Distance-bin partitions.
//!
//! A partition covers `(0, d_max]` with `H` left-open, right-closed
//! intervals. Membership is resolved with exact comparisons against the
//! breakpoints, so a distance that lands on a breakpoint always belongs to
//! the lower bin and refining a partition by inserting breakpoints never
//! moves a pair across the original boundaries.

use crate::graph::SensorGraph;
use crate::{Error, Result};

/// `H` disjoint lag intervals `(e_j, e_{j+1}]` spanning `(0, d_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinPartition {
    /// `H + 1` strictly increasing breakpoints, starting at 0.
    edges: Vec<f64>,
}

impl BinPartition {
    /// Equal-width partition of `(0, max_distance]` into `bins` intervals.
    pub fn equal_width(max_distance: f64, bins: usize) -> Result<Self> {
        if !max_distance.is_finite() || max_distance <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "max distance must be finite and > 0, got {max_distance}"
            )));
        }
        if bins == 0 {
            return Err(Error::InvalidArgument("need at least one bin".into()));
        }
        let mut edges: Vec<f64> = (0..=bins)
            .map(|j| max_distance * j as f64 / bins as f64)
            .collect();
        // The arithmetic above can round; the last breakpoint must be the
        // exact upper end so `d_max` itself is always binnable.
        edges[bins] = max_distance;
        Self::from_edges(edges)
    }

    /// Partition from explicit breakpoints (first must be 0, strictly
    /// increasing). Lets callers refine or customize lag resolution.
    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidArgument(
                "a partition needs at least two breakpoints".into(),
            ));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("breakpoints must be finite".into()));
        }
        if edges[0] != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "first breakpoint must be 0, got {}",
                edges[0]
            )));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { edges })
    }

    /// Number of bins `H`.
    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false // from_edges guarantees at least one bin
    }

    /// The `H + 1` breakpoints.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Upper end of the covered lag range.
    pub fn max_distance(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Midpoint of bin `j`, the lag at which the bin is reported.
    pub fn center(&self, j: usize) -> f64 {
        0.5 * (self.edges[j] + self.edges[j + 1])
    }

    /// All bin midpoints.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.center(j)).collect()
    }

    /// Index of the bin containing `d`, i.e. the `j` with
    /// `edges[j] < d ≤ edges[j+1]`; `None` for `d ≤ 0`, `d > d_max`, NaN.
    pub fn bin_of(&self, d: f64) -> Option<usize> {
        if !(d > self.edges[0]) || d > self.max_distance() {
            return None;
        }
        // First breakpoint >= d, minus one: left-open, right-closed.
        Some(self.edges.partition_point(|&e| e < d) - 1)
    }
}

/// Equal-width partition spanning the graph's full pair-distance range.
pub fn make_bins(graph: &SensorGraph, bins: usize) -> Result<BinPartition> {
    BinPartition::equal_width(graph.max_distance(), bins)
}
