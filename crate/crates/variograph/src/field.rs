//! Spatial sampling and Gaussian random field simulation.
//!
//! Positions are drawn in the unit square, either uniformly or from a fixed
//! three-component Gaussian mixture (a stand-in for clustered sensor
//! deployments). A [`VariogramModel`] describes second-order structure; for
//! models with a stationary covariance, `C(h) = C(0) − γ(h)` turns the model
//! into a covariance matrix over the sampled positions, and realizations are
//! simulated as `x = L z` with `L` the lower Cholesky factor and `z` i.i.d.
//! standard normals.
//!
//! Randomness is counter-based: every consumer of the base seed works on its
//! own ChaCha stream (one per realization, a reserved one for positions), so
//! ensembles are reproducible bit-for-bit under any parallel schedule and
//! growing an ensemble never perturbs earlier realizations.

use ndarray::{Array1, Array2, ArrayView1};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::{Error, Result};

/// Diagonal regularization added to simulated covariance matrices.
pub const DEFAULT_COVARIANCE_JITTER: f64 = 1e-10;

/// ChaCha stream reserved for position sampling; realization `r` uses
/// stream `r`, so positions and signals never share a stream.
const POSITION_STREAM: u64 = 1 << 62;

/// Gaussian-mixture centres of the clustered sampling scheme.
const MIXTURE_MEANS: [[f64; 2]; 3] = [[0.25, 0.25], [0.7, 0.6], [0.4, 0.85]];

/// Per-axis standard deviation of each mixture component.
const MIXTURE_STD: f64 = 0.12;

/// How point positions are drawn over the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingScheme {
    /// Independent uniforms on `[0, 1]²`.
    Uniform,
    /// Equal-weight Gaussian mixture, rejection-sampled into `[0, 1]²`.
    Nonuniform,
}

/// A finite set of pairwise-distinct sensor positions.
#[derive(Debug, Clone)]
pub struct SpatialSample {
    /// `n × d` coordinates (row per point).
    positions: Array2<f64>,
    scheme: SamplingScheme,
    seed: u64,
}

impl SpatialSample {
    /// Wraps externally constructed positions (tests, file input).
    ///
    /// Coordinates must be finite and rows pairwise distinct. Provenance
    /// fields are set to `Uniform` / seed 0 and are advisory only.
    pub fn from_positions(positions: Array2<f64>) -> Result<Self> {
        if positions.nrows() == 0 || positions.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "positions must have at least one row and one column".into(),
            ));
        }
        if positions.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "positions must be finite".into(),
            ));
        }
        for i in 0..positions.nrows() {
            for j in (i + 1)..positions.nrows() {
                if positions.row(i) == positions.row(j) {
                    return Err(Error::InvalidArgument(format!(
                        "positions {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Self {
            positions,
            scheme: SamplingScheme::Uniform,
            seed: 0,
        })
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.positions.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.nrows() == 0
    }

    /// Spatial dimension (2 for the built-in samplers).
    pub fn dim(&self) -> usize {
        self.positions.ncols()
    }

    /// `n × d` coordinate matrix.
    pub fn positions(&self) -> &Array2<f64> {
        &self.positions
    }

    pub fn scheme(&self) -> SamplingScheme {
        self.scheme
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Euclidean distance between points `i` and `j`.
    ///
    /// Every distance used anywhere in the crate funnels through this
    /// method, so bin membership is consistent across estimators.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let a = self.positions.row(i);
        let b = self.positions.row(j);
        let mut sq = 0.0;
        for (ai, bi) in a.iter().zip(b.iter()) {
            let diff = ai - bi;
            sq += diff * diff;
        }
        sq.sqrt()
    }

    /// Largest pairwise distance over *all* pairs, graph edges or not.
    pub fn max_pair_distance(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }
}

/// Draws `n ≥ 2` pairwise-distinct positions in the unit square.
///
/// Exact coordinate collisions (possible only with adversarial luck) are
/// resolved by redrawing the colliding point from the same stream.
pub fn sample_positions(n: usize, scheme: SamplingScheme, seed: u64) -> Result<SpatialSample> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 points, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(POSITION_STREAM);

    let mut seen = std::collections::HashSet::with_capacity(n);
    let mut positions = Array2::zeros((n, 2));
    for i in 0..n {
        loop {
            let p = match scheme {
                SamplingScheme::Uniform => [rng.random::<f64>(), rng.random::<f64>()],
                SamplingScheme::Nonuniform => {
                    let mean = MIXTURE_MEANS[rng.random_range(0..MIXTURE_MEANS.len())];
                    let x = mean[0] + MIXTURE_STD * rng.sample::<f64, _>(StandardNormal);
                    let y = mean[1] + MIXTURE_STD * rng.sample::<f64, _>(StandardNormal);
                    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                        continue; // rejected: outside the unit square
                    }
                    [x, y]
                }
            };
            if seen.insert((p[0].to_bits(), p[1].to_bits())) {
                positions[[i, 0]] = p[0];
                positions[[i, 1]] = p[1];
                break;
            }
        }
    }
    Ok(SpatialSample {
        positions,
        scheme,
        seed,
    })
}

/// Shape of an isotropic (semi)variogram model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `γ(h) = nugget + sill·(1 − exp(−h/range))`; stationary covariance.
    Exponential,
    /// Pure discontinuity: `γ(h) = nugget + sill` for `h > 0`; white noise.
    Nugget,
    /// `γ(h) = nugget + sill·h/range`; intrinsic only, no finite sill.
    Linear,
}

/// Isotropic semivariogram model `γ(h)` with `γ(0) = 0` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariogramModel {
    kind: ModelKind,
    sill: f64,
    range: f64,
    nugget: f64,
}

impl VariogramModel {
    /// Exponential model reaching `sill` asymptotically with scale `range`.
    pub fn exponential(sill: f64, range: f64) -> Result<Self> {
        Self::new(ModelKind::Exponential, sill, range, 0.0)
    }

    /// Pure-nugget (white noise) model jumping to `sill` at any `h > 0`.
    pub fn nugget_only(sill: f64) -> Result<Self> {
        Self::new(ModelKind::Nugget, sill, 1.0, 0.0)
    }

    /// Unbounded linear model with slope `sill / range`.
    pub fn linear(sill: f64, range: f64) -> Result<Self> {
        Self::new(ModelKind::Linear, sill, range, 0.0)
    }

    /// Adds a nugget discontinuity on top of the structured part.
    pub fn with_nugget(mut self, nugget: f64) -> Result<Self> {
        if !nugget.is_finite() || nugget < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "nugget must be finite and >= 0, got {nugget}"
            )));
        }
        self.nugget = nugget;
        Ok(self)
    }

    fn new(kind: ModelKind, sill: f64, range: f64, nugget: f64) -> Result<Self> {
        if !sill.is_finite() || sill < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "sill must be finite and >= 0, got {sill}"
            )));
        }
        if !range.is_finite() || range <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "range must be finite and > 0, got {range}"
            )));
        }
        Ok(Self {
            kind,
            sill,
            range,
            nugget,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn sill(&self) -> f64 {
        self.sill
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    /// Semivariogram value `γ(h)` for a lag `h ≥ 0`.
    pub fn semivariogram(&self, h: f64) -> f64 {
        debug_assert!(h >= 0.0, "lag must be nonnegative");
        if h == 0.0 {
            return 0.0;
        }
        match self.kind {
            ModelKind::Exponential => self.nugget + self.sill * (1.0 - (-h / self.range).exp()),
            ModelKind::Nugget => self.nugget + self.sill,
            ModelKind::Linear => self.nugget + self.sill * h / self.range,
        }
    }

    /// Whether `C(h) = C(0) − γ(h)` exists (the model has a finite sill).
    pub fn has_stationary_covariance(&self) -> bool {
        !matches!(self.kind, ModelKind::Linear)
    }

    /// Variance `C(0) = sill + nugget` of stationary models.
    pub fn total_sill(&self) -> f64 {
        self.sill + self.nugget
    }

    /// Stationary covariance at lag `h`; errors for unbounded models.
    pub fn covariance(&self, h: f64) -> Result<f64> {
        if !self.has_stationary_covariance() {
            return Err(Error::UnsupportedModel(
                "linear model grows without bound".into(),
            ));
        }
        Ok(self.total_sill() - self.semivariogram(h))
    }
}

/// Covariance matrix `Σ_ij = C(d_ij) + jitter·δ_ij` over a sample.
///
/// The jitter keeps the Cholesky factorization well-posed when distinct
/// points are nearly coincident relative to the model range.
pub fn covariance_from_model(
    sample: &SpatialSample,
    model: &VariogramModel,
    jitter: f64,
) -> Result<Array2<f64>> {
    if !jitter.is_finite() || jitter < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "jitter must be finite and >= 0, got {jitter}"
        )));
    }
    if !model.has_stationary_covariance() {
        return Err(Error::UnsupportedModel(
            "linear model grows without bound".into(),
        ));
    }
    let n = sample.len();
    let mut cov = Array2::zeros((n, n));
    for i in 0..n {
        cov[[i, i]] = model.total_sill() + jitter;
        for j in (i + 1)..n {
            let c = model.covariance(sample.distance(i, j))?;
            cov[[i, j]] = c;
            cov[[j, i]] = c;
        }
    }
    Ok(cov)
}

/// Lower Cholesky factor `L` with `L Lᵀ = a`, for symmetric positive
/// *semi*definite input: an exactly-zero pivot is accepted when its whole
/// column is zero (degenerate directions get zero coordinates).
///
/// Fails with the 1-based index of the offending leading minor otherwise.
pub fn cholesky_factor(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    let mut l = Array2::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if d > 0.0 {
            let pivot = d.sqrt();
            l[[j, j]] = pivot;
            for i in (j + 1)..n {
                let mut s = a[[i, j]];
                for k in 0..j {
                    s -= l[[i, k]] * l[[j, k]];
                }
                l[[i, j]] = s / pivot;
            }
        } else if d == 0.0 {
            for i in (j + 1)..n {
                let mut s = a[[i, j]];
                for k in 0..j {
                    s -= l[[i, k]] * l[[j, k]];
                }
                if s != 0.0 {
                    return Err(Error::NotPositiveDefinite {
                        leading_minor: j + 1,
                    });
                }
            }
        } else {
            return Err(Error::NotPositiveDefinite {
                leading_minor: j + 1,
            });
        }
    }
    Ok(l)
}

/// A stack of simulated (or injected) signal realizations on one sample.
#[derive(Debug, Clone)]
pub struct FieldEnsemble {
    /// `R × n`: one realization per row.
    signals: Array2<f64>,
    model: VariogramModel,
    seed: u64,
    jitter: f64,
}

impl FieldEnsemble {
    /// Wraps externally produced signals (diagnostics on measured data,
    /// synthetic stress tests). `model` documents the nominal structure.
    pub fn from_signals(
        signals: Array2<f64>,
        model: VariogramModel,
        seed: u64,
    ) -> Result<Self> {
        if signals.nrows() == 0 || signals.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "ensemble needs at least one realization and one vertex".into(),
            ));
        }
        Ok(Self {
            signals,
            model,
            seed,
            jitter: 0.0,
        })
    }

    /// Number of realizations `R`.
    pub fn realizations(&self) -> usize {
        self.signals.nrows()
    }

    /// Number of vertices `n`.
    pub fn len(&self) -> usize {
        self.signals.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    /// Realization `r` as a vertex-indexed view.
    pub fn signal(&self, r: usize) -> ArrayView1<'_, f64> {
        self.signals.row(r)
    }

    /// All realizations, one per row.
    pub fn signals(&self) -> &Array2<f64> {
        &self.signals
    }

    pub fn model(&self) -> &VariogramModel {
        &self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Jitter that was baked into the simulated covariance.
    pub fn covariance_jitter(&self) -> f64 {
        self.jitter
    }
}

/// Simulates `realizations` zero-mean Gaussian fields with the model's
/// stationary covariance, using [`DEFAULT_COVARIANCE_JITTER`].
pub fn generate_ensemble(
    sample: &SpatialSample,
    model: &VariogramModel,
    realizations: usize,
    seed: u64,
) -> Result<FieldEnsemble> {
    generate_ensemble_with_jitter(sample, model, realizations, seed, DEFAULT_COVARIANCE_JITTER)
}

/// [`generate_ensemble`] with an explicit covariance jitter.
///
/// Realization `r` is `L z_r` where `z_r` comes from ChaCha stream `r` of
/// the seed: values depend on `(seed, r)` only, never on the realization
/// count or the parallel schedule.
pub fn generate_ensemble_with_jitter(
    sample: &SpatialSample,
    model: &VariogramModel,
    realizations: usize,
    seed: u64,
    jitter: f64,
) -> Result<FieldEnsemble> {
    if realizations == 0 {
        return Err(Error::InvalidArgument(
            "need at least one realization".into(),
        ));
    }
    let n = sample.len();
    let cov = covariance_from_model(sample, model, jitter)?;
    let factor = cholesky_factor(&cov)?;

    let rows: Vec<Array1<f64>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let z = Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
            factor.dot(&z)
        })
        .collect();

    let mut signals = Array2::zeros((realizations, n));
    for (r, row) in rows.into_iter().enumerate() {
        signals.row_mut(r).assign(&row);
    }
    Ok(FieldEnsemble {
        signals,
        model: *model,
        seed,
        jitter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid_sample(n_side: usize, step: f64) -> SpatialSample {
        let mut pos = Array2::zeros((n_side * n_side, 2));
        for i in 0..n_side {
            for j in 0..n_side {
                pos[[i * n_side + j, 0]] = i as f64 * step;
                pos[[i * n_side + j, 1]] = j as f64 * step;
            }
        }
        SpatialSample::from_positions(pos).unwrap()
    }

    #[test]
    fn uniform_positions_fill_the_unit_square() {
        let s = sample_positions(500, SamplingScheme::Uniform, 1).unwrap();
        assert_eq!(s.len(), 500);
        assert_eq!(s.dim(), 2);
        assert!(s.positions().iter().all(|&v| (0.0..=1.0).contains(&v)));
        // Pairwise distinct by construction.
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                assert!(s.distance(i, j) > 0.0);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let a = sample_positions(64, SamplingScheme::Nonuniform, 9).unwrap();
        let b = sample_positions(64, SamplingScheme::Nonuniform, 9).unwrap();
        assert_eq!(a.positions(), b.positions());
        let c = sample_positions(64, SamplingScheme::Nonuniform, 10).unwrap();
        assert_ne!(a.positions(), c.positions());
    }

    #[test]
    fn nonuniform_sampling_clusters_at_the_mixture_means() {
        let s = sample_positions(1000, SamplingScheme::Nonuniform, 3).unwrap();
        assert!(s.positions().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let count_near = |cx: f64, cy: f64| {
            (0..s.len())
                .filter(|&i| {
                    let dx = s.positions()[[i, 0]] - cx;
                    let dy = s.positions()[[i, 1]] - cy;
                    (dx * dx + dy * dy).sqrt() < 0.1
                })
                .count()
        };
        // (0.25, 0.25) is a mixture centre; (0.95, 0.05) is ~5 std from
        // every centre, so the density ratio is enormous.
        let near_centre = count_near(0.25, 0.25);
        let far_corner = count_near(0.95, 0.05);
        assert!(
            near_centre > 50 && near_centre > 10 * (far_corner + 1),
            "near={near_centre} far={far_corner}"
        );
    }

    #[test]
    fn too_few_points_is_rejected() {
        assert!(matches!(
            sample_positions(1, SamplingScheme::Uniform, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn coincident_positions_are_rejected() {
        let pos = ndarray::array![[0.1, 0.2], [0.3, 0.4], [0.1, 0.2]];
        assert!(SpatialSample::from_positions(pos).is_err());
    }

    #[test]
    fn model_closed_forms() {
        let exp = VariogramModel::exponential(1.0, 0.2).unwrap();
        assert_eq!(exp.semivariogram(0.0), 0.0);
        let g = exp.semivariogram(0.2);
        assert!((g - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((exp.covariance(0.2).unwrap() - (-1.0f64).exp()).abs() < 1e-15);

        let nug = VariogramModel::nugget_only(2.0).unwrap();
        assert_eq!(nug.semivariogram(0.0), 0.0);
        assert_eq!(nug.semivariogram(1e-12), 2.0);
        assert_eq!(nug.total_sill(), 2.0);

        let lin = VariogramModel::linear(3.0, 0.5).unwrap();
        assert!((lin.semivariogram(1.0) - 6.0).abs() < 1e-15);
        assert!(!lin.has_stationary_covariance());
        assert!(matches!(
            lin.covariance(0.1),
            Err(Error::UnsupportedModel(_))
        ));

        let with_nugget = VariogramModel::exponential(1.0, 0.2)
            .unwrap()
            .with_nugget(0.5)
            .unwrap();
        assert_eq!(with_nugget.semivariogram(0.0), 0.0);
        assert!((with_nugget.semivariogram(1e-12) - 0.5).abs() < 1e-11);
        assert_eq!(with_nugget.total_sill(), 1.5);
    }

    #[test]
    fn model_parameters_are_validated() {
        assert!(VariogramModel::exponential(-1.0, 0.2).is_err());
        assert!(VariogramModel::exponential(1.0, 0.0).is_err());
        assert!(VariogramModel::linear(1.0, -0.5).is_err());
        assert!(VariogramModel::exponential(1.0, 0.2)
            .unwrap()
            .with_nugget(-0.1)
            .is_err());
    }

    proptest! {
        /// γ is nondecreasing in h for every supported kind.
        #[test]
        fn semivariogram_is_nondecreasing(sill in 0.0f64..5.0, range in 0.01f64..2.0,
                                          nugget in 0.0f64..1.0,
                                          a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for model in [
                VariogramModel::exponential(sill, range).unwrap().with_nugget(nugget).unwrap(),
                VariogramModel::nugget_only(sill).unwrap().with_nugget(nugget).unwrap(),
                VariogramModel::linear(sill, range).unwrap().with_nugget(nugget).unwrap(),
            ] {
                prop_assert!(model.semivariogram(lo) <= model.semivariogram(hi) + 1e-15);
            }
        }
    }

    #[test]
    fn covariance_matrix_matches_the_model_entrywise() {
        let s = sample_positions(10, SamplingScheme::Uniform, 4).unwrap();
        let model = VariogramModel::exponential(1.5, 0.3)
            .unwrap()
            .with_nugget(0.25)
            .unwrap();
        let jitter = 1e-8;
        let cov = covariance_from_model(&s, &model, jitter).unwrap();
        for i in 0..10 {
            // Diagonal carries the full variance plus jitter, exactly.
            assert_eq!(cov[[i, i]], model.total_sill() + jitter);
            for j in 0..10 {
                if i != j {
                    let expect =
                        model.total_sill() - model.semivariogram(s.distance(i, j));
                    assert_eq!(cov[[i, j]], expect);
                    assert_eq!(cov[[i, j]], cov[[j, i]]);
                }
            }
        }
    }

    #[test]
    fn covariance_decays_with_distance() {
        let s = sample_positions(12, SamplingScheme::Uniform, 11).unwrap();
        let model = VariogramModel::exponential(1.0, 0.2).unwrap();
        let cov = covariance_from_model(&s, &model, 0.0).unwrap();
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for i in 0..12 {
            for j in (i + 1)..12 {
                pairs.push((s.distance(i, j), cov[[i, j]]));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            if w[0].0 < w[1].0 {
                assert!(w[0].1 > w[1].1, "covariance must strictly decay");
            }
        }
    }

    #[test]
    fn cholesky_recovers_a_known_factor() {
        // L = [[2,0,0],[1,2,0],[1,1,2]] gives integer L·Lᵀ, so the
        // factorization is exact.
        let a = ndarray::array![[4.0, 2.0, 2.0], [2.0, 5.0, 3.0], [2.0, 3.0, 6.0]];
        let l = cholesky_factor(&a).unwrap();
        let expect = ndarray::array![[2.0, 0.0, 0.0], [1.0, 2.0, 0.0], [1.0, 1.0, 2.0]];
        assert_eq!(l, expect);
    }

    #[test]
    fn cholesky_reports_the_failing_leading_minor() {
        let a = ndarray::array![[1.0, 2.0], [2.0, 1.0]];
        match cholesky_factor(&a) {
            Err(Error::NotPositiveDefinite { leading_minor }) => {
                assert_eq!(leading_minor, 2)
            }
            other => panic!("expected leading-minor failure, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_accepts_the_zero_matrix() {
        let a = Array2::<f64>::zeros((4, 4));
        let l = cholesky_factor(&a).unwrap();
        assert!(l.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cholesky_reconstructs_random_spd_matrices() {
        let s = sample_positions(20, SamplingScheme::Uniform, 5).unwrap();
        let model = VariogramModel::exponential(2.0, 0.4).unwrap();
        let cov = covariance_from_model(&s, &model, 1e-10).unwrap();
        let l = cholesky_factor(&cov).unwrap();
        let recon = l.dot(&l.t());
        for (a, b) in recon.iter().zip(cov.iter()) {
            assert!((a - b).abs() <= 1e-12 * cov[[0, 0]].max(1.0));
        }
    }

    #[test]
    fn ensemble_shape_and_determinism() {
        let s = sample_positions(16, SamplingScheme::Uniform, 2).unwrap();
        let model = VariogramModel::exponential(1.0, 0.2).unwrap();
        let e1 = generate_ensemble(&s, &model, 5, 77).unwrap();
        let e2 = generate_ensemble(&s, &model, 5, 77).unwrap();
        assert_eq!(e1.realizations(), 5);
        assert_eq!(e1.len(), 16);
        assert_eq!(e1.signals(), e2.signals());
        let e3 = generate_ensemble(&s, &model, 5, 78).unwrap();
        assert_ne!(e1.signals(), e3.signals());
    }

    #[test]
    fn realizations_are_stable_under_ensemble_growth() {
        // Stream-per-realization: the first rows of a bigger ensemble are
        // bitwise the rows of a smaller one.
        let s = sample_positions(12, SamplingScheme::Uniform, 21).unwrap();
        let model = VariogramModel::exponential(1.0, 0.3).unwrap();
        let small = generate_ensemble(&s, &model, 3, 5).unwrap();
        let big = generate_ensemble(&s, &model, 8, 5).unwrap();
        for r in 0..3 {
            assert_eq!(small.signal(r), big.signal(r));
        }
    }

    #[test]
    fn ensemble_is_independent_of_the_thread_count() {
        let s = sample_positions(20, SamplingScheme::Uniform, 8).unwrap();
        let model = VariogramModel::exponential(1.0, 0.2).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| generate_ensemble(&s, &model, 16, 3).unwrap())
        };
        assert_eq!(run(1).signals(), run(4).signals());
    }

    #[test]
    fn degenerate_zero_covariance_yields_exactly_zero_fields() {
        let s = grid_sample(3, 0.25);
        let model = VariogramModel::nugget_only(0.0).unwrap();
        let e = generate_ensemble_with_jitter(&s, &model, 4, 1, 0.0).unwrap();
        assert!(e.signals().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn monte_carlo_covariance_matches_the_model() {
        let s = sample_positions(40, SamplingScheme::Uniform, 13).unwrap();
        let model = VariogramModel::exponential(1.0, 0.2).unwrap();
        let r = 20_000;
        let e = generate_ensemble(&s, &model, r, 99).unwrap();
        let cov = covariance_from_model(&s, &model, DEFAULT_COVARIANCE_JITTER).unwrap();

        // Sample means vanish and the sample covariance converges entrywise;
        // 0.05 is ~6 standard errors at R = 20000 for unit variance.
        let x = e.signals();
        for j in 0..s.len() {
            let mean = x.column(j).sum() / r as f64;
            assert!(mean.abs() < 0.05, "vertex {j} mean {mean}");
        }
        for i in 0..s.len() {
            for j in i..s.len() {
                let mut acc = 0.0;
                for rr in 0..r {
                    acc += x[[rr, i]] * x[[rr, j]];
                }
                let sample_cov = acc / r as f64;
                assert!(
                    (sample_cov - cov[[i, j]]).abs() < 0.05,
                    "cov[{i},{j}] sample {sample_cov} vs model {}",
                    cov[[i, j]]
                );
            }
        }
    }

    #[test]
    fn injected_signals_round_trip() {
        let model = VariogramModel::nugget_only(1.0).unwrap();
        let signals = ndarray::array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let e = FieldEnsemble::from_signals(signals.clone(), model, 0).unwrap();
        assert_eq!(e.realizations(), 2);
        assert_eq!(e.len(), 3);
        assert_eq!(e.signals(), &signals);
        assert!(FieldEnsemble::from_signals(Array2::zeros((0, 3)), model, 0).is_err());
    }
}
