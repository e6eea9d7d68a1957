//! Sensor graphs over spatial samples.
//!
//! Vertices are sampled positions; edge weights come from the Gaussian
//! similarity kernel `w(d) = exp(−d² / 2σ²)`. Two connectivities are
//! supported: the full graph (every pair) and the symmetrized k-nearest-
//! neighbour graph (an edge survives if either endpoint selects the other).
//! The primary storage is the sorted unordered edge list; dense operators
//! are materialized on demand.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::field::SpatialSample;
use crate::{Error, Result};

/// Which pairs become edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    /// Every unordered pair is an edge.
    Full,
    /// Union-symmetrized k-nearest-neighbour selection.
    Knn(usize),
}

/// One undirected edge, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    pub i: usize,
    pub j: usize,
    /// Euclidean distance between the endpoints.
    pub distance: f64,
    /// Gaussian kernel weight of the edge.
    pub weight: f64,
}

/// Weighted spatial graph: positions, connectivity and the edge list.
#[derive(Debug, Clone)]
pub struct SensorGraph {
    sample: SpatialSample,
    connectivity: Connectivity,
    kernel_sigma: f64,
    /// Unordered edges with `i < j`, sorted lexicographically.
    edges: Vec<GraphEdge>,
    /// Largest distance over all vertex pairs, edges or not, so distance
    /// bins can span lags the connectivity may have pruned away.
    max_distance: f64,
}

/// Builds the sensor graph for a sample.
///
/// `kernel_sigma` must be positive; for [`Connectivity::Knn`] the neighbour
/// count must satisfy `1 ≤ k < n`. Ties at the k-th smallest distance are
/// broken towards the lower vertex index, which keeps construction
/// deterministic on gridded samples.
pub fn build_graph(
    sample: &SpatialSample,
    connectivity: Connectivity,
    kernel_sigma: f64,
) -> Result<SensorGraph> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "graph needs at least 2 vertices, got {n}"
        )));
    }
    if !kernel_sigma.is_finite() || kernel_sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "kernel sigma must be finite and > 0, got {kernel_sigma}"
        )));
    }
    let weight = |d: f64| (-d * d / (2.0 * kernel_sigma * kernel_sigma)).exp();

    let mut max_distance = 0.0f64;
    let mut edges = Vec::new();
    match connectivity {
        Connectivity::Full => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = sample.distance(i, j);
                    max_distance = max_distance.max(d);
                    edges.push(GraphEdge {
                        i,
                        j,
                        distance: d,
                        weight: weight(d),
                    });
                }
            }
        }
        Connectivity::Knn(k) => {
            if k == 0 || k >= n {
                return Err(Error::InvalidArgument(format!(
                    "knn neighbour count must satisfy 1 <= k < n, got k={k}, n={n}"
                )));
            }
            let mut selected = std::collections::BTreeSet::new();
            let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
            for i in 0..n {
                candidates.clear();
                for j in 0..n {
                    if j != i {
                        let d = sample.distance(i, j);
                        max_distance = max_distance.max(d);
                        candidates.push((d, j));
                    }
                }
                candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                for &(_, j) in candidates.iter().take(k) {
                    selected.insert((i.min(j), i.max(j)));
                }
            }
            for (i, j) in selected {
                let d = sample.distance(i, j);
                edges.push(GraphEdge {
                    i,
                    j,
                    distance: d,
                    weight: weight(d),
                });
            }
        }
    }
    Ok(SensorGraph {
        sample: sample.clone(),
        connectivity,
        kernel_sigma,
        edges,
        max_distance,
    })
}

impl SensorGraph {
    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    /// Unordered edges, `i < j`, lexicographically sorted.
    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The positions the graph was built over.
    pub fn sample(&self) -> &SpatialSample {
        &self.sample
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    pub fn kernel_sigma(&self) -> f64 {
        self.kernel_sigma
    }

    /// Largest pairwise distance over all pairs (not only edges).
    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    /// Dense symmetric adjacency with zero diagonal.
    pub fn adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.len(), self.len()));
        for e in &self.edges {
            a[[e.i, e.j]] = e.weight;
            a[[e.j, e.i]] = e.weight;
        }
        a
    }

    /// Dense combinatorial Laplacian `L = D − A` with its degree vector.
    pub fn laplacian(&self) -> LaplacianView {
        let a = self.adjacency();
        let degrees = a.sum_axis(Axis(1));
        let mut matrix = -a;
        for (i, &d) in degrees.iter().enumerate() {
            matrix[[i, i]] = d;
        }
        LaplacianView { matrix, degrees }
    }
}

/// Dense Laplacian together with the vertex degrees.
#[derive(Debug, Clone)]
pub struct LaplacianView {
    matrix: Array2<f64>,
    degrees: Array1<f64>,
}

impl LaplacianView {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn degrees(&self) -> &Array1<f64> {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }
}

/// Energy `xᵀ M x` of a signal against a symmetric operator.
pub fn quadratic_form(operator: &Array2<f64>, signal: ArrayView1<'_, f64>) -> Result<f64> {
    if operator.nrows() != operator.ncols() {
        return Err(Error::DimensionMismatch {
            expected: operator.nrows(),
            actual: operator.ncols(),
        });
    }
    if signal.len() != operator.nrows() {
        return Err(Error::DimensionMismatch {
            expected: operator.nrows(),
            actual: signal.len(),
        });
    }
    Ok(signal.dot(&operator.dot(&signal)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample_positions, SamplingScheme};
    use ndarray::array;
    use proptest::prelude::*;

    fn random_sample(n: usize, seed: u64) -> SpatialSample {
        sample_positions(n, SamplingScheme::Uniform, seed).unwrap()
    }

    #[test]
    fn full_graph_has_every_pair() {
        let s = random_sample(17, 1);
        let g = build_graph(&s, Connectivity::Full, 0.05).unwrap();
        assert_eq!(g.edge_count(), 17 * 16 / 2);
        for e in g.edges() {
            assert!(e.i < e.j);
            assert_eq!(e.distance, s.distance(e.i, e.j));
            let expect = (-e.distance * e.distance / (2.0 * 0.05 * 0.05)).exp();
            assert_eq!(e.weight, expect);
            assert!(e.weight > 0.0 && e.weight <= 1.0);
        }
    }

    #[test]
    fn kernel_weight_closed_form() {
        // Collinear points spaced 0.1 apart with sigma = 0.1: adjacent
        // pairs weigh exp(-1/2), the far pair exp(-2).
        let s = SpatialSample::from_positions(array![[0.0, 0.0], [0.1, 0.0], [0.2, 0.0]])
            .unwrap();
        let g = build_graph(&s, Connectivity::Full, 0.1).unwrap();
        let w = |i: usize, j: usize| {
            g.edges()
                .iter()
                .find(|e| (e.i, e.j) == (i, j))
                .unwrap()
                .weight
        };
        assert!((w(0, 1) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((w(1, 2) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((w(0, 2) - (-2.0f64).exp()).abs() < 1e-15);
    }

    /// Reference k-NN membership: `j` is selected by `i` iff fewer than `k`
    /// other vertices compare strictly smaller in `(distance, index)` order.
    fn knn_oracle_selects(s: &SpatialSample, i: usize, j: usize, k: usize) -> bool {
        let key = (s.distance(i, j), j);
        let closer = (0..s.len())
            .filter(|&l| l != i && l != j)
            .filter(|&l| {
                let cand = (s.distance(i, l), l);
                cand.0 < key.0 || (cand.0 == key.0 && cand.1 < key.1)
            })
            .count();
        closer < k
    }

    #[test]
    fn knn_matches_the_selection_rule() {
        let s = random_sample(20, 7);
        for k in [1, 3, 5] {
            let g = build_graph(&s, Connectivity::Knn(k), 0.05).unwrap();
            let mut expect = std::collections::BTreeSet::new();
            for i in 0..20 {
                for j in 0..20 {
                    if i != j && knn_oracle_selects(&s, i, j, k) {
                        expect.insert((i.min(j), i.max(j)));
                    }
                }
            }
            let got: std::collections::BTreeSet<(usize, usize)> =
                g.edges().iter().map(|e| (e.i, e.j)).collect();
            assert_eq!(got, expect, "k={k}");
        }
    }

    #[test]
    fn knn_ties_break_towards_lower_indices() {
        // Four satellites at exactly distance 0.25 from the centre; with
        // k = 2 the centre must pick satellites 1 and 2.
        let s = SpatialSample::from_positions(array![
            [0.5, 0.5],
            [0.25, 0.5],
            [0.75, 0.5],
            [0.5, 0.25],
            [0.5, 0.75],
        ])
        .unwrap();
        assert!(knn_oracle_selects(&s, 0, 1, 2));
        assert!(knn_oracle_selects(&s, 0, 2, 2));
        assert!(!knn_oracle_selects(&s, 0, 3, 2));
        assert!(!knn_oracle_selects(&s, 0, 4, 2));
        let g = build_graph(&s, Connectivity::Knn(2), 0.1).unwrap();
        let h = build_graph(&s, Connectivity::Knn(2), 0.1).unwrap();
        assert_eq!(g.edges(), h.edges());
        // The oracle and the builder agree even under exact ties.
        let got: std::collections::BTreeSet<(usize, usize)> =
            g.edges().iter().map(|e| (e.i, e.j)).collect();
        let mut expect = std::collections::BTreeSet::new();
        for i in 0..5 {
            for j in 0..5 {
                if i != j && knn_oracle_selects(&s, i, j, 2) {
                    expect.insert((i.min(j), i.max(j)));
                }
            }
        }
        assert_eq!(got, expect);
    }

    #[test]
    fn knn_grows_with_k_and_saturates_at_full() {
        let s = random_sample(15, 3);
        let mut previous: std::collections::BTreeSet<(usize, usize)> =
            std::collections::BTreeSet::new();
        for k in 1..15 {
            let g = build_graph(&s, Connectivity::Knn(k), 0.05).unwrap();
            let current: std::collections::BTreeSet<(usize, usize)> =
                g.edges().iter().map(|e| (e.i, e.j)).collect();
            assert!(previous.is_subset(&current), "k={k} lost edges");
            previous = current;
        }
        let full = build_graph(&s, Connectivity::Full, 0.05).unwrap();
        assert_eq!(previous.len(), full.edge_count());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let s = random_sample(6, 4);
        assert!(build_graph(&s, Connectivity::Full, 0.0).is_err());
        assert!(build_graph(&s, Connectivity::Full, f64::NAN).is_err());
        assert!(build_graph(&s, Connectivity::Knn(0), 0.1).is_err());
        assert!(build_graph(&s, Connectivity::Knn(6), 0.1).is_err());
    }

    #[test]
    fn max_distance_covers_pairs_knn_pruned() {
        let s = random_sample(30, 5);
        let full = build_graph(&s, Connectivity::Full, 0.05).unwrap();
        let knn = build_graph(&s, Connectivity::Knn(2), 0.05).unwrap();
        assert_eq!(full.max_distance(), knn.max_distance());
        assert_eq!(full.max_distance(), s.max_pair_distance());
        let longest_knn_edge = knn
            .edges()
            .iter()
            .map(|e| e.distance)
            .fold(0.0f64, f64::max);
        assert!(longest_knn_edge < knn.max_distance());
    }

    #[test]
    fn two_node_laplacian_closed_form() {
        let s = SpatialSample::from_positions(array![[0.0, 0.0], [0.3, 0.0]]).unwrap();
        let g = build_graph(&s, Connectivity::Full, 0.3).unwrap();
        let w = g.edges()[0].weight;
        let lap = g.laplacian();
        assert_eq!(lap.matrix(), &array![[w, -w], [-w, w]]);
        assert_eq!(lap.degrees(), &array![w, w]);
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let s = random_sample(40, 6);
        for conn in [Connectivity::Full, Connectivity::Knn(5)] {
            let lap = build_graph(&s, conn, 0.05).unwrap().laplacian();
            for i in 0..40 {
                assert!(lap.matrix().row(i).sum().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn quadratic_form_matches_the_pairwise_sum() {
        let s = random_sample(10, 9);
        let g = build_graph(&s, Connectivity::Full, 0.2).unwrap();
        let lap = g.laplacian();
        let a = g.adjacency();
        let x = Array1::from_iter((0..10).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3));

        let qf = quadratic_form(lap.matrix(), x.view()).unwrap();
        // Independent evaluation: ½ Σ_ij w_ij (x_i − x_j)².
        let mut pairwise = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                let diff = x[i] - x[j];
                pairwise += a[[i, j]] * diff * diff;
            }
        }
        pairwise *= 0.5;
        assert!((qf - pairwise).abs() <= 1e-12 * pairwise.max(1.0));
    }

    #[test]
    fn quadratic_form_of_constants_is_null() {
        let s = random_sample(25, 10);
        let lap = build_graph(&s, Connectivity::Knn(4), 0.1).unwrap().laplacian();
        let x = Array1::from_elem(25, 3.75);
        let qf = quadratic_form(lap.matrix(), x.view()).unwrap();
        assert!(qf.abs() <= 1e-10);
    }

    #[test]
    fn quadratic_form_rejects_mismatched_lengths() {
        let s = random_sample(5, 11);
        let lap = build_graph(&s, Connectivity::Full, 0.1).unwrap().laplacian();
        let x = Array1::zeros(4);
        assert!(matches!(
            quadratic_form(lap.matrix(), x.view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn permutation_equivariance_of_construction() {
        let s = random_sample(12, 12);
        // Relabel vertices by a fixed permutation and rebuild.
        let perm: Vec<usize> = vec![4, 0, 7, 2, 11, 9, 1, 3, 10, 6, 8, 5];
        let mut permuted = Array2::zeros((12, 2));
        for (new, &old) in perm.iter().enumerate() {
            permuted.row_mut(new).assign(&s.positions().row(old));
        }
        let sp = SpatialSample::from_positions(permuted).unwrap();
        for conn in [Connectivity::Full, Connectivity::Knn(3)] {
            let a = build_graph(&s, conn, 0.07).unwrap().adjacency();
            let ap = build_graph(&sp, conn, 0.07).unwrap().adjacency();
            for new_i in 0..12 {
                for new_j in 0..12 {
                    assert_eq!(ap[[new_i, new_j]], a[[perm[new_i], perm[new_j]]]);
                }
            }
        }
    }

    proptest! {
        /// The Laplacian is positive semidefinite: xᵀLx ≥ 0 up to roundoff.
        #[test]
        fn laplacian_energy_is_nonnegative(seed in 0u64..200, scale in 0.1f64..10.0) {
            let s = random_sample(14, seed);
            let lap = build_graph(&s, Connectivity::Knn(4), 0.1).unwrap().laplacian();
            let x = Array1::from_iter((0..14).map(|i| {
                let t = ((seed as f64) + i as f64 * 0.7).sin();
                t * scale
            }));
            let qf = quadratic_form(lap.matrix(), x.view()).unwrap();
            prop_assert!(qf >= -1e-9);
        }
    }
}
