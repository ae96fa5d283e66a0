//! Network deconvolution on symmetric matrices.
//!
//! An observed matrix is treated as the sum of a direct-effect matrix and all
//! of its higher powers, `M = D + D^2 + ... = D (I - D)^-1`. Inverting that
//! map on the spectrum gives `D = U diag(l / (1 + l)) U^T`. The full matrix,
//! unit diagonal included, goes through the transform.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dcca::{max_asymmetry, CorrelationMatrix};
use crate::error::{Error, Result};

/// Distance from -1 (deconvolution) or +1 (convolution) below which the
/// eigenvalue map is treated as singular.
pub const SINGULAR_MARGIN: f64 = 1e-8;

const INPUT_SYMMETRY_TOLERANCE: f64 = 1e-9;
const EIGEN_MAX_ITER: usize = 10_000;

/// Eigenvalues sorted descending with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvectors: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
}

impl SpectralDecomposition {
    /// `U diag(f(l)) U^T`, symmetrized.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let u = &self.eigenvectors;
        let mapped = self.eigenvalues.map(f);
        let scaled = u * DMatrix::from_diagonal(&mapped);
        symmetrize(scaled * u.transpose())
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map_eigenvalues(|l| l)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(0.0_f64, |acc, l| acc.max(l.abs()))
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn check_square_symmetric(values: &DMatrix<f64>) -> Result<()> {
    if values.nrows() != values.ncols() {
        return Err(Error::InvalidInput(format!(
            "matrix is {}x{}, expected square",
            values.nrows(),
            values.ncols()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "matrix has non-finite entries".to_string(),
        ));
    }
    let scale = values.amax().max(1.0);
    let asym = max_asymmetry(values);
    if asym > INPUT_SYMMETRY_TOLERANCE * scale {
        return Err(Error::Asymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Symmetric eigendecomposition of an arbitrary real symmetric matrix.
pub fn symmetric_eigen(values: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    check_square_symmetric(values)?;
    let n = values.nrows();
    let eig =
        SymmetricEigen::try_new(values.clone(), f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| {
            Error::EigenNonConvergence {
                n,
                max_abs: values.amax(),
                frobenius: values.norm(),
            }
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvectors,
        eigenvalues,
    })
}

pub fn eigendecompose(matrix: &CorrelationMatrix) -> Result<SpectralDecomposition> {
    symmetric_eigen(matrix.values())
}

/// Deconvolved (direct-effect) matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectMatrix {
    codes: Vec<String>,
    #[serde(with = "crate::io::matrix_rows")]
    values: DMatrix<f64>,
}

impl DirectMatrix {
    /// Wrap an already-deconvolved matrix. Only shape and symmetry are
    /// checked; the spectral bound is the caller's concern.
    pub fn new(codes: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != codes.len() {
            return Err(Error::InvalidInput(format!(
                "matrix has {} rows but there are {} codes",
                values.nrows(),
                codes.len()
            )));
        }
        check_square_symmetric(&values)?;
        Ok(Self { codes, values })
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeconvolveOptions {
    /// Factor applied to the input before the transform. `1.0` leaves the
    /// matrix as observed; values below one pull eigenvalues away from -1.
    pub prescale: f64,
}

impl Default for DeconvolveOptions {
    fn default() -> Self {
        Self { prescale: 1.0 }
    }
}

/// `U diag(l / (1 + l)) U^T` on a raw symmetric matrix.
pub fn deconvolve_values(
    values: &DMatrix<f64>,
    options: DeconvolveOptions,
) -> Result<DMatrix<f64>> {
    if !(options.prescale.is_finite() && options.prescale > 0.0) {
        return Err(Error::InvalidInput(format!(
            "prescale must be positive, got {}",
            options.prescale
        )));
    }
    let scaled = if options.prescale == 1.0 {
        values.clone()
    } else {
        values * options.prescale
    };
    let spectral = symmetric_eigen(&scaled)?;
    // eigenvalues are sorted descending, so the last one is the smallest
    if let Some(&lowest) = spectral.eigenvalues.as_slice().last() {
        if lowest <= -1.0 + SINGULAR_MARGIN {
            return Err(Error::SingularEigenvalue { value: lowest });
        }
    }
    Ok(spectral.map_eigenvalues(|l| l / (1.0 + l)))
}

pub fn deconvolve(matrix: &CorrelationMatrix) -> Result<DirectMatrix> {
    deconvolve_with(matrix, DeconvolveOptions::default())
}

pub fn deconvolve_with(
    matrix: &CorrelationMatrix,
    options: DeconvolveOptions,
) -> Result<DirectMatrix> {
    let values = deconvolve_values(matrix.values(), options)?;
    Ok(DirectMatrix {
        codes: matrix.codes().to_vec(),
        values,
    })
}

/// Forward map `D (I - D)^-1`, computed by an LU solve rather than through
/// the spectrum so it can serve as an independent check on
/// [`deconvolve_values`].
pub fn convolve_values(direct: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square_symmetric(direct)?;
    let n = direct.nrows();
    let radius = symmetric_eigen(direct)?.spectral_radius();
    if radius >= 1.0 - SINGULAR_MARGIN {
        return Err(Error::SpectralRadius { radius });
    }
    let system = DMatrix::<f64>::identity(n, n) - direct;
    // D and (I - D)^-1 commute, so solving (I - D) X = D gives the same X.
    let solved = system
        .lu()
        .solve(direct)
        .ok_or(Error::SpectralRadius { radius })?;
    Ok(symmetrize(solved))
}

pub fn convolve(direct: &DirectMatrix) -> Result<DMatrix<f64>> {
    convolve_values(direct.values())
}
