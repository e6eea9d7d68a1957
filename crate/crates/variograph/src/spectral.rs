//! Graph Fourier transform and empirical power spectral densities.
//!
//! The eigendecomposition `L = U Λ Uᵀ` of a graph Laplacian provides the
//! graph Fourier basis: `x̂ = Uᵀ x` are the spectral coefficients of a
//! vertex signal and `|x̂_i|²` its energy at graph frequency `λ_i`.
//! Averaging those energies over an ensemble gives the empirical power
//! spectral density, indexed by the normalized frequency `λ_i / λ_max` so
//! spectra of different graphs can be compared on a common axis.
//!
//! Eigenvalues are sorted ascending and eigenvectors are sign-fixed (first
//! entry of nonnegligible magnitude made positive), so the decomposition
//! is deterministic.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView1};

use crate::field::FieldEnsemble;
use crate::graph::LaplacianView;
use crate::{Error, Result};

/// Relative floor below which an eigenvalue counts as numerically zero.
const EIGENVALUE_FLOOR: f64 = 1e-9;

/// Sorted, sign-fixed eigendecomposition of a symmetric PSD operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending eigenvalues; tiny negative roundoff clamped to 0.
    eigenvalues: Array1<f64>,
    /// Orthonormal eigenvectors, column `i` paired with `eigenvalues[i]`.
    eigenvectors: Array2<f64>,
    /// `λ_i / λ_max` (all zeros for the null operator).
    normalized_frequencies: Array1<f64>,
}

/// Eigendecomposition of a graph Laplacian.
pub fn decompose(laplacian: &LaplacianView) -> Result<SpectralDecomposition> {
    decompose_matrix(laplacian.matrix())
}

/// Eigendecomposition of any symmetric positive semidefinite matrix.
///
/// Rejects non-symmetric input and spectra with eigenvalues below the
/// numerical-zero floor.
pub fn decompose_matrix(matrix: &Array2<f64>) -> Result<SpectralDecomposition> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: matrix.ncols(),
        });
    }
    let scale = matrix.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1.0);
    let mut max_asymmetry = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_asymmetry = max_asymmetry.max((matrix[[i, j]] - matrix[[j, i]]).abs());
        }
    }
    if max_asymmetry > 1e-12 * scale {
        return Err(Error::NotSymmetric { max_asymmetry });
    }

    let dm = DMatrix::from_fn(n, n, |i, j| matrix[[i, j]]);
    let eig = SymmetricEigen::new(dm);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvalues = Array1::zeros(n);
    let mut eigenvectors = Array2::zeros((n, n));
    for (pos, &idx) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[idx];
        if lambda < -EIGENVALUE_FLOOR * scale {
            return Err(Error::InvalidArgument(format!(
                "matrix is not positive semidefinite (eigenvalue {lambda})"
            )));
        }
        eigenvalues[pos] = lambda.max(0.0);
        // Deterministic sign: first non-negligible entry made positive.
        let col = eig.eigenvectors.column(idx);
        let flip = col
            .iter()
            .find(|v| v.abs() > 1e-12)
            .map_or(false, |&v| v < 0.0);
        for i in 0..n {
            eigenvectors[[i, pos]] = if flip { -col[i] } else { col[i] };
        }
    }

    let lambda_max = eigenvalues[n - 1];
    let normalized_frequencies = if lambda_max > 0.0 {
        eigenvalues.mapv(|l| l / lambda_max)
    } else {
        Array1::zeros(n)
    };
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        normalized_frequencies,
    })
}

impl SpectralDecomposition {
    /// Number of vertices / frequencies.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Array2<f64> {
        &self.eigenvectors
    }

    pub fn normalized_frequencies(&self) -> &Array1<f64> {
        &self.normalized_frequencies
    }

    /// Graph Fourier transform `x̂ = Uᵀ x`.
    pub fn transform(&self, signal: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if signal.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: signal.len(),
            });
        }
        Ok(self.eigenvectors.t().dot(&signal))
    }
}

/// Mean and sample std of spectral energies over an ensemble, frequency by
/// frequency.
#[derive(Debug, Clone)]
pub struct PsdStatistics {
    eigenvalues: Array1<f64>,
    normalized_frequencies: Array1<f64>,
    mean: Array1<f64>,
    std: Array1<f64>,
}

impl PsdStatistics {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn normalized_frequencies(&self) -> &Array1<f64> {
        &self.normalized_frequencies
    }

    /// Mean energy `E|x̂_i|²` per frequency.
    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    /// Sample std of the energies per frequency (0 for one realization).
    pub fn std(&self) -> &Array1<f64> {
        &self.std
    }
}

/// Empirical PSD of an ensemble in a spectral basis.
pub fn empirical_psd(
    ensemble: &FieldEnsemble,
    basis: &SpectralDecomposition,
) -> Result<PsdStatistics> {
    let n = basis.len();
    if ensemble.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: ensemble.len(),
        });
    }
    let r = ensemble.realizations();
    // Energies per realization; Welford over realizations per frequency.
    let mut count = 0usize;
    let mut mean = Array1::<f64>::zeros(n);
    let mut m2 = Array1::<f64>::zeros(n);
    for rr in 0..r {
        let coeffs = basis.transform(ensemble.signal(rr))?;
        count += 1;
        for i in 0..n {
            let power = coeffs[i] * coeffs[i];
            let delta = power - mean[i];
            mean[i] += delta / count as f64;
            m2[i] += delta * (power - mean[i]);
        }
    }
    let std = if count > 1 {
        m2.mapv(|v| (v.max(0.0) / (count - 1) as f64).sqrt())
    } else {
        Array1::zeros(n)
    };
    Ok(PsdStatistics {
        eigenvalues: basis.eigenvalues().clone(),
        normalized_frequencies: basis.normalized_frequencies().clone(),
        mean,
        std,
    })
}

/// Decibel transform `10·log10(x)` for emission-time formatting.
pub fn to_decibels(power: f64) -> f64 {
    10.0 * power.log10()
}
