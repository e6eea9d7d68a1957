//! Graph variogram estimation.
//!
//! Binning the pairwise distances of a sensor graph splits its edge set
//! into per-lag subgraphs. For each bin `Δh` the (optionally windowed)
//! masked adjacency `A_(Δh,k) = G_k A_Δh G_k` with `G_k = diag(g_k)`
//! induces a Laplacian `L_(Δh,k)`, and the estimator
//!
//! ```text
//! 2γ̂(Δh, k) = 2 · xᵀ L_(Δh,k) x / (1ᵀ D_(Δh,k) 1)
//! ```
//!
//! is the window-weighted mean squared increment over pairs at that lag.
//! The leading factor 2 compensates for the quadratic form counting each
//! unordered pair once while the normalization counts ordered pairs. With
//! the all-ones window on the full graph this is exactly the classical
//! empirical variogram, which doubles as the test oracle.
//!
//! Estimates store the doubled value `2γ̂`; serialization reports the
//! semivariogram `γ̂ = value / 2`.
//!
//! Sums over pair sets use exactly rounded accumulation ([`crate::exact`]),
//! making estimates bitwise invariant under vertex relabelling and
//! independent of evaluation order.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::bins::BinPartition;
use crate::exact::ExactSum;
use crate::field::{FieldEnsemble, SpatialSample};
use crate::graph::SensorGraph;
use crate::window::VertexWindow;
use crate::{Error, Result};

/// One pair contributing to a bin: endpoints and window coupling
/// `g_k(i)·g_k(j)` (1 for the ones window).
#[derive(Debug, Clone, Copy)]
struct BinMember {
    i: usize,
    j: usize,
    coupling: f64,
}

/// A distance-binned, optionally windowed family of subgraphs.
///
/// Bin `b` holds the graph edges whose length falls in the `b`-th lag
/// interval, each carrying its window coupling; pairs with zero coupling
/// are dropped. The per-bin normalization `1ᵀ D 1` (ordered-pair mass) is
/// precomputed, so one family can be reused across many signals.
#[derive(Debug, Clone)]
pub struct BinnedGraphFamily {
    bins: BinPartition,
    n: usize,
    window: VertexWindow,
    center: Option<usize>,
    members: Vec<Vec<BinMember>>,
    normalization: Vec<f64>,
}

/// Builds the binned family of a graph under a window.
///
/// `center` is required for localizing windows and ignored by the ones
/// window (pass `None` for a global family).
pub fn binned_family(
    graph: &SensorGraph,
    bins: &BinPartition,
    window: &VertexWindow,
    center: Option<usize>,
) -> Result<BinnedGraphFamily> {
    let weights = match (window.is_ones(), center) {
        (true, _) => None,
        (false, None) => {
            return Err(Error::InvalidArgument(
                "localizing windows need a centre vertex".into(),
            ))
        }
        (false, Some(k)) => Some(window.values(graph.sample(), k)?),
    };
    if let Some(k) = center {
        if k >= graph.len() {
            return Err(Error::VertexOutOfRange {
                index: k,
                len: graph.len(),
            });
        }
    }

    let h = bins.len();
    let mut members: Vec<Vec<BinMember>> = vec![Vec::new(); h];
    for e in graph.edges() {
        if let Some(b) = bins.bin_of(e.distance) {
            let coupling = match &weights {
                None => 1.0,
                Some(g) => g[e.i] * g[e.j],
            };
            if coupling != 0.0 {
                members[b].push(BinMember {
                    i: e.i,
                    j: e.j,
                    coupling,
                });
            }
        }
    }
    let normalization = members
        .iter()
        .map(|m| 2.0 * crate::exact::sum(m.iter().map(|e| e.coupling)))
        .collect();
    Ok(BinnedGraphFamily {
        bins: bins.clone(),
        n: graph.len(),
        window: *window,
        center,
        members,
        normalization,
    })
}

impl BinnedGraphFamily {
    pub fn bins(&self) -> &BinPartition {
        &self.bins
    }

    /// Number of vertices of the underlying graph.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn window(&self) -> &VertexWindow {
        &self.window
    }

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    /// Ordered-pair mass `1ᵀ D_(Δh,k) 1` of bin `b`; 0 marks an undefined bin.
    pub fn normalization(&self, b: usize) -> f64 {
        self.normalization[b]
    }

    /// Unordered pairs with nonzero coupling in bin `b`.
    pub fn support_pair_count(&self, b: usize) -> usize {
        self.members[b].len()
    }

    /// Nonzero entries of the masked adjacency of bin `b` (ordered pairs).
    pub fn ordered_support_count(&self, b: usize) -> usize {
        2 * self.members[b].len()
    }

    /// Dense masked adjacency `G_k A_Δh G_k` of bin `b`.
    pub fn adjacency(&self, b: usize) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for m in &self.members[b] {
            a[[m.i, m.j]] = m.coupling;
            a[[m.j, m.i]] = m.coupling;
        }
        a
    }

    /// Dense Laplacian `D − A` of bin `b`'s masked adjacency.
    pub fn laplacian(&self, b: usize) -> Array2<f64> {
        let a = self.adjacency(b);
        let degrees = a.sum_axis(ndarray::Axis(1));
        let mut l = -a;
        for (i, &d) in degrees.iter().enumerate() {
            l[[i, i]] = d;
        }
        l
    }
}

/// A per-bin variogram estimate (values are the doubled quantity `2γ̂`).
#[derive(Debug, Clone, PartialEq)]
pub struct VariogramEstimate {
    bins: BinPartition,
    /// Centre vertex for local estimates; `None` for global ones.
    center: Option<usize>,
    /// `2γ̂` per bin; `None` where the normalization vanished.
    values: Vec<Option<f64>>,
    /// Unordered pairs that entered each bin.
    pair_counts: Vec<usize>,
}

impl VariogramEstimate {
    pub fn bins(&self) -> &BinPartition {
        &self.bins
    }

    /// Number of bins.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    /// Doubled estimate `2γ̂` for bin `b`, if defined.
    pub fn value(&self, b: usize) -> Option<f64> {
        self.values[b]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Semivariogram `γ̂ = value / 2` for bin `b`, if defined.
    pub fn semivariogram(&self, b: usize) -> Option<f64> {
        self.values[b].map(|v| 0.5 * v)
    }

    pub fn pair_count(&self, b: usize) -> usize {
        self.pair_counts[b]
    }

    pub fn pair_counts(&self) -> &[usize] {
        &self.pair_counts
    }

    pub fn is_defined(&self, b: usize) -> bool {
        self.values[b].is_some()
    }
}

/// Per-bin doubled estimate over one family: `2·xᵀLx / 1ᵀD1` per bin.
fn family_values(signal: ArrayView1<'_, f64>, family: &BinnedGraphFamily) -> Vec<Option<f64>> {
    family
        .members
        .iter()
        .zip(&family.normalization)
        .map(|(members, &norm)| {
            if norm == 0.0 {
                return None;
            }
            let mut num = ExactSum::new();
            for m in members {
                let diff = signal[m.i] - signal[m.j];
                num.add(m.coupling * diff * diff);
            }
            Some(2.0 * num.value() / norm)
        })
        .collect()
}

/// Local (windowed) graph variogram of one signal over a prebuilt family.
///
/// Bins whose windowed pair mass is zero come back undefined. A family
/// built with the ones window yields the global estimate (`center` none).
pub fn local_graph_variogram(
    signal: ArrayView1<'_, f64>,
    family: &BinnedGraphFamily,
) -> Result<VariogramEstimate> {
    if signal.len() != family.n {
        return Err(Error::DimensionMismatch {
            expected: family.n,
            actual: signal.len(),
        });
    }
    Ok(VariogramEstimate {
        bins: family.bins.clone(),
        center: family.center,
        values: family_values(signal, family),
        pair_counts: (0..family.bins.len())
            .map(|b| family.support_pair_count(b))
            .collect(),
    })
}

/// Global graph variogram: the ones window directly, otherwise the mean of
/// the local estimates over all centres, skipping undefined ones per bin.
pub fn global_graph_variogram(
    signal: ArrayView1<'_, f64>,
    graph: &SensorGraph,
    bins: &BinPartition,
    window: &VertexWindow,
) -> Result<VariogramEstimate> {
    let signals = signal
        .to_owned()
        .into_shape_with_order((1, signal.len()))
        .expect("row reshape");
    let mut estimates = global_graph_variogram_batch(signals.view(), graph, bins, window)?;
    Ok(estimates.pop().unwrap())
}

/// [`global_graph_variogram`] over a whole stack of signals (row per
/// realization). Binned pair sets — and for localizing windows the per-
/// centre couplings — are resolved once and shared across realizations.
pub fn global_graph_variogram_batch(
    signals: ArrayView2<'_, f64>,
    graph: &SensorGraph,
    bins: &BinPartition,
    window: &VertexWindow,
) -> Result<Vec<VariogramEstimate>> {
    let r = signals.nrows();
    if r == 0 {
        return Err(Error::InvalidArgument("no signals to estimate from".into()));
    }
    if signals.ncols() != graph.len() {
        return Err(Error::DimensionMismatch {
            expected: graph.len(),
            actual: signals.ncols(),
        });
    }
    if window.is_ones() {
        let family = binned_family(graph, bins, window, None)?;
        return (0..r)
            .into_par_iter()
            .map(|rr| local_graph_variogram(signals.row(rr), &family))
            .collect();
    }

    let h = bins.len();
    let skeleton = bin_pairs(graph, bins);
    let pair_counts: Vec<usize> = skeleton.iter().map(|p| p.len()).collect();

    // acc[rr][b] accumulates local values over centres; definedness of a
    // (centre, bin) cell is signal-independent, so one count per bin does.
    let mut acc: Vec<Vec<ExactSum>> = vec![vec![ExactSum::new(); h]; r];
    let mut defined_centers = vec![0usize; h];

    for k in 0..graph.len() {
        let g = window.values(graph.sample(), k)?;
        let (couplings, norms) = windowed_couplings(&skeleton, &g);
        let defined: Vec<usize> = (0..h).filter(|&b| norms[b] != 0.0).collect();
        if defined.is_empty() {
            continue;
        }
        for &b in &defined {
            defined_centers[b] += 1;
        }
        let locals: Vec<Vec<f64>> = (0..r)
            .into_par_iter()
            .map(|rr| {
                let x = signals.row(rr);
                defined
                    .iter()
                    .map(|&b| {
                        let mut num = ExactSum::new();
                        for (&(i, j), &c) in skeleton[b].iter().zip(&couplings[b]) {
                            if c != 0.0 {
                                let diff = x[i] - x[j];
                                num.add(c * diff * diff);
                            }
                        }
                        2.0 * num.value() / norms[b]
                    })
                    .collect()
            })
            .collect();
        for (rr, vals) in locals.into_iter().enumerate() {
            for (&b, v) in defined.iter().zip(vals) {
                acc[rr][b].add(v);
            }
        }
    }

    Ok(acc
        .into_iter()
        .map(|row| VariogramEstimate {
            bins: bins.clone(),
            center: None,
            values: row
                .iter()
                .zip(&defined_centers)
                .map(|(sum, &count)| {
                    (count > 0).then(|| sum.value() / count as f64)
                })
                .collect(),
            pair_counts: pair_counts.clone(),
        })
        .collect())
}

/// Graph edges grouped by bin, window-free.
fn bin_pairs(graph: &SensorGraph, bins: &BinPartition) -> Vec<Vec<(usize, usize)>> {
    let mut pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); bins.len()];
    for e in graph.edges() {
        if let Some(b) = bins.bin_of(e.distance) {
            pairs[b].push((e.i, e.j));
        }
    }
    pairs
}

/// Per-bin couplings `g_i g_j` aligned with a skeleton, plus `1ᵀD1`.
fn windowed_couplings(
    skeleton: &[Vec<(usize, usize)>],
    g: &[f64],
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let couplings: Vec<Vec<f64>> = skeleton
        .iter()
        .map(|pairs| pairs.iter().map(|&(i, j)| g[i] * g[j]).collect())
        .collect();
    let norms = couplings
        .iter()
        .map(|c| 2.0 * crate::exact::sum(c.iter().copied().filter(|&v| v != 0.0)))
        .collect();
    (couplings, norms)
}

/// Classical empirical variogram: the plain mean squared increment over
/// *all* pairs whose distance falls in each bin, graph or no graph.
///
/// This is the reference the graph estimator must reproduce on full
/// graphs; it is kept free of the binned-operator machinery on purpose.
pub fn classical_empirical_variogram(
    signal: ArrayView1<'_, f64>,
    sample: &SpatialSample,
    bins: &BinPartition,
) -> Result<VariogramEstimate> {
    let n = sample.len();
    if signal.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: signal.len(),
        });
    }
    let h = bins.len();
    let mut sums = vec![0.0f64; h];
    let mut counts = vec![0usize; h];
    for i in 0..n {
        for j in (i + 1)..n {
            if let Some(b) = bins.bin_of(sample.distance(i, j)) {
                let diff = signal[i] - signal[j];
                sums[b] += diff * diff;
                counts[b] += 1;
            }
        }
    }
    Ok(VariogramEstimate {
        bins: bins.clone(),
        center: None,
        values: sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect(),
        pair_counts: counts,
    })
}

/// Streaming mean/variance (Welford). Identical inputs keep `m2` at an
/// exact 0.0, which the degenerate-ensemble guarantees rely on.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        let delta2 = x - self.mean;
        self.m2 += delta * delta2;
    }

    fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    /// Sample standard deviation with `count − 1` normalization; defined
    /// as 0 for a single observation.
    fn sample_std(&self) -> Option<f64> {
        match self.count {
            0 => None,
            1 => Some(0.0),
            c => Some((self.m2.max(0.0) / (c - 1) as f64).sqrt()),
        }
    }
}

/// Per-bin mean/std of semivariogram values across an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct VariogramStatistics {
    bins: BinPartition,
    /// Mean semivariogram `γ̂` per bin over the defined estimates.
    mean: Vec<Option<f64>>,
    /// Sample std of `γ̂` per bin (0 when only one estimate defined it).
    std: Vec<Option<f64>>,
    /// How many estimates defined each bin.
    defined_counts: Vec<usize>,
    /// Minimum pair count per bin across the estimates.
    pair_counts: Vec<usize>,
}

impl VariogramStatistics {
    pub fn bins(&self) -> &BinPartition {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn mean(&self, b: usize) -> Option<f64> {
        self.mean[b]
    }

    pub fn std(&self, b: usize) -> Option<f64> {
        self.std[b]
    }

    pub fn defined_count(&self, b: usize) -> usize {
        self.defined_counts[b]
    }

    pub fn pair_count(&self, b: usize) -> usize {
        self.pair_counts[b]
    }
}

/// Per-bin mean and sample std of `γ̂` over estimates sharing one partition.
///
/// Bins skip estimates that left them undefined; a bin no estimate defined
/// stays undefined.
pub fn ensemble_statistics(estimates: &[VariogramEstimate]) -> Result<VariogramStatistics> {
    let first = estimates
        .first()
        .ok_or_else(|| Error::InvalidArgument("no estimates to aggregate".into()))?;
    if estimates.iter().any(|e| e.bins() != first.bins()) {
        return Err(Error::MixedPartitions);
    }
    let h = first.len();
    let mut stats = vec![Welford::default(); h];
    let mut pair_counts = vec![usize::MAX; h];
    for e in estimates {
        for b in 0..h {
            if let Some(g) = e.semivariogram(b) {
                stats[b].push(g);
            }
            pair_counts[b] = pair_counts[b].min(e.pair_count(b));
        }
    }
    Ok(VariogramStatistics {
        bins: first.bins().clone(),
        mean: stats.iter().map(|w| w.mean()).collect(),
        std: stats.iter().map(|w| w.sample_std()).collect(),
        defined_counts: stats.iter().map(|w| w.count).collect(),
        pair_counts,
    })
}

/// Second aggregation level: mean/std across *per-graph mean curves*
/// (e.g. over independently sampled graphs), skipping undefined bins.
pub fn aggregate_mean_curves(curves: &[VariogramStatistics]) -> Result<VariogramStatistics> {
    let first = curves
        .first()
        .ok_or_else(|| Error::InvalidArgument("no curves to aggregate".into()))?;
    if curves.iter().any(|c| c.bins() != first.bins()) {
        return Err(Error::MixedPartitions);
    }
    let h = first.len();
    let mut stats = vec![Welford::default(); h];
    let mut pair_counts = vec![usize::MAX; h];
    for c in curves {
        for b in 0..h {
            if let Some(m) = c.mean(b) {
                stats[b].push(m);
            }
            pair_counts[b] = pair_counts[b].min(c.pair_count(b));
        }
    }
    Ok(VariogramStatistics {
        bins: first.bins().clone(),
        mean: stats.iter().map(|w| w.mean()).collect(),
        std: stats.iter().map(|w| w.sample_std()).collect(),
        defined_counts: stats.iter().map(|w| w.count).collect(),
        pair_counts,
    })
}

/// Standardized local-vs-global discrepancy scores, vertex × bin.
#[derive(Debug, Clone)]
pub struct StationarityDiagnostic {
    bins: BinPartition,
    /// `n × H` scores; NaN marks undefined (centre, bin) cells.
    scores: Array2<f64>,
}

impl StationarityDiagnostic {
    pub fn bins(&self) -> &BinPartition {
        &self.bins
    }

    /// `n × H` score matrix (NaN = undefined).
    pub fn scores(&self) -> &Array2<f64> {
        &self.scores
    }

    pub fn score(&self, center: usize, b: usize) -> f64 {
        self.scores[[center, b]]
    }

    pub fn is_defined(&self, center: usize, b: usize) -> bool {
        !self.scores[[center, b]].is_nan()
    }
}

/// Intrinsic-stationarity diagnostic over an ensemble.
///
/// For every centre `k` and bin, the mean (over realizations) local
/// estimate is compared against the mean global estimate, standardized by
/// the standard error of the local mean:
///
/// ```text
/// score(k, Δh) = (mean_r γ̂_k − mean_r γ̂) / (std_r γ̂_k / √R)
/// ```
///
/// Under intrinsic stationarity scores concentrate around 0; a vertex
/// whose neighbourhood violates the global structure drifts away. The ones
/// window makes local ≡ global, so every defined score is exactly 0.
pub fn stationarity_diagnostic(
    ensemble: &FieldEnsemble,
    graph: &SensorGraph,
    bins: &BinPartition,
    window: &VertexWindow,
) -> Result<StationarityDiagnostic> {
    let n = graph.len();
    if ensemble.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: ensemble.len(),
        });
    }
    let h = bins.len();

    if window.is_ones() {
        // Local and global estimates coincide identically; the score is 0
        // wherever the (single, shared) family defines the bin.
        let family = binned_family(graph, bins, window, None)?;
        let mut scores = Array2::from_elem((n, h), f64::NAN);
        for b in 0..h {
            if family.normalization(b) != 0.0 {
                scores.column_mut(b).fill(0.0);
            }
        }
        return Ok(StationarityDiagnostic {
            bins: bins.clone(),
            scores,
        });
    }

    let r = ensemble.realizations();
    if r < 2 {
        return Err(Error::InvalidArgument(
            "diagnostic needs at least two realizations".into(),
        ));
    }

    let skeleton = bin_pairs(graph, bins);
    let signals = ensemble.signals();

    // Pass over centres: per-(k, bin) moments over realizations, plus the
    // per-realization global accumulator (mean over defined centres).
    let mut local_mean = Array2::from_elem((n, h), f64::NAN);
    let mut local_sem = Array2::from_elem((n, h), f64::NAN);
    let mut global_acc: Vec<Vec<ExactSum>> = vec![vec![ExactSum::new(); h]; r];
    let mut defined_centers = vec![0usize; h];

    for k in 0..n {
        let g = window.values(graph.sample(), k)?;
        let (couplings, norms) = windowed_couplings(&skeleton, &g);
        let defined: Vec<usize> = (0..h).filter(|&b| norms[b] != 0.0).collect();
        if defined.is_empty() {
            continue;
        }
        for &b in &defined {
            defined_centers[b] += 1;
        }
        let locals: Vec<Vec<f64>> = (0..r)
            .into_par_iter()
            .map(|rr| {
                let x = signals.row(rr);
                defined
                    .iter()
                    .map(|&b| {
                        let mut num = ExactSum::new();
                        for (&(i, j), &c) in skeleton[b].iter().zip(&couplings[b]) {
                            if c != 0.0 {
                                let diff = x[i] - x[j];
                                num.add(c * diff * diff);
                            }
                        }
                        0.5 * (2.0 * num.value() / norms[b])
                    })
                    .collect()
            })
            .collect();
        let mut moments = vec![Welford::default(); defined.len()];
        for (rr, vals) in locals.iter().enumerate() {
            for (slot, (&b, &v)) in defined.iter().zip(vals).enumerate() {
                moments[slot].push(v);
                global_acc[rr][b].add(v);
            }
        }
        for (slot, &b) in defined.iter().enumerate() {
            local_mean[[k, b]] = moments[slot].mean().unwrap();
            local_sem[[k, b]] = moments[slot].sample_std().unwrap() / (r as f64).sqrt();
        }
    }

    // Mean global curve over realizations.
    let mut global_mean = vec![f64::NAN; h];
    for b in 0..h {
        if defined_centers[b] > 0 {
            let mut over_r = ExactSum::new();
            for row in global_acc.iter() {
                over_r.add(row[b].value() / defined_centers[b] as f64);
            }
            global_mean[b] = over_r.value() / r as f64;
        }
    }

    let mut scores = Array2::from_elem((n, h), f64::NAN);
    for k in 0..n {
        for b in 0..h {
            let lm = local_mean[[k, b]];
            let gm = global_mean[b];
            if lm.is_nan() || gm.is_nan() {
                continue;
            }
            let num = lm - gm;
            scores[[k, b]] = if num == 0.0 {
                0.0
            } else {
                num / local_sem[[k, b]]
            };
        }
    }
    Ok(StationarityDiagnostic {
        bins: bins.clone(),
        scores,
    })
}
