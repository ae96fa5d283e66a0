//! Detrended cross-correlation coefficient (DCCC).
//!
//! Each series is integrated into a profile, the profile is cut into
//! overlapping boxes of `w` points (one per start position), a least-squares
//! line is removed from each box, and the residual second moments are
//! averaged over all box positions. The coefficient is the detrended
//! covariance over the geometric mean of the two detrended variances.
//!
//! Box-level moments divide by `w - 1` and the average over the `n - w + 1`
//! box positions divides by `n - w`. The second convention is shared by the
//! numerator and both variances, so it cancels in the coefficient.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;

/// Pre-clamp excess over 1 tolerated before a coefficient is rejected.
pub const CLAMP_TOLERANCE: f64 = 1e-6;

/// Symmetry tolerance accepted by [`CorrelationMatrix::new`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Smallest box with a nonzero detrended fluctuation; a line through two
/// points leaves no residual.
pub const MIN_BOX_SIZE: usize = 3;

/// Cumulative deviations of a series from its mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    values: Vec<f64>,
}

impl Profile {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn profile(series: &[f64]) -> Result<Profile> {
    if series.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "profile needs at least 2 points, got {}",
            series.len()
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "series has non-finite entries".to_string(),
        ));
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let mut acc = 0.0;
    let values = series
        .iter()
        .map(|v| {
            acc += v - mean;
            acc
        })
        .collect();
    Ok(Profile { values })
}

/// Detrended moments of one box position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DccaBoxStats {
    /// 1-based start position of the box.
    pub box_start: usize,
    pub detrended_var_i: f64,
    pub detrended_var_j: f64,
    pub detrended_cov: f64,
}

/// Residuals of the least-squares line through `values` against the local
/// index `0..values.len()`, written into `out`.
fn linear_residuals(values: &[f64], out: &mut [f64]) {
    let w = values.len() as f64;
    let x_mean = (w - 1.0) / 2.0;
    let y_mean = values.iter().sum::<f64>() / w;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (k, y) in values.iter().enumerate() {
        let dx = k as f64 - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }
    let slope = sxy / sxx;
    for (k, (y, r)) in values.iter().zip(out.iter_mut()).enumerate() {
        *r = (y - y_mean) - slope * (k as f64 - x_mean);
    }
}

fn box_moment(a: &[f64], b: &[f64]) -> f64 {
    let w = a.len();
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (w - 1) as f64
}

/// Detrended moments of the box starting at 1-based position `beta`.
pub fn box_detrend(
    profile_i: &Profile,
    profile_j: &Profile,
    w: usize,
    beta: usize,
) -> Result<DccaBoxStats> {
    let n = profile_i.len();
    if profile_j.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: profile_j.len(),
        });
    }
    if w < 2 || w > n {
        return Err(Error::BoxSize {
            box_size: w,
            len: n,
        });
    }
    if beta < 1 || beta > n - w + 1 {
        return Err(Error::InvalidInput(format!(
            "box start {beta} outside 1..={}",
            n - w + 1
        )));
    }
    let range = beta - 1..beta - 1 + w;
    let mut ri = vec![0.0; w];
    let mut rj = vec![0.0; w];
    linear_residuals(&profile_i.values[range.clone()], &mut ri);
    linear_residuals(&profile_j.values[range], &mut rj);
    Ok(DccaBoxStats {
        box_start: beta,
        detrended_var_i: box_moment(&ri, &ri),
        detrended_var_j: box_moment(&rj, &rj),
        detrended_cov: box_moment(&ri, &rj),
    })
}

/// Per-box residuals of one profile, computed once and reused for every
/// pair the series takes part in.
#[derive(Debug, Clone)]
pub struct DetrendedProfile {
    box_size: usize,
    len: usize,
    residuals: Vec<f64>,
}

impl DetrendedProfile {
    pub fn new(profile: &Profile, w: usize) -> Result<Self> {
        let n = profile.len();
        if w < 2 || w > n {
            return Err(Error::BoxSize {
                box_size: w,
                len: n,
            });
        }
        let boxes = n - w + 1;
        let mut residuals = vec![0.0; boxes * w];
        for (b, out) in residuals.chunks_exact_mut(w).enumerate() {
            linear_residuals(&profile.values[b..b + w], out);
        }
        Ok(Self {
            box_size: w,
            len: n,
            residuals,
        })
    }

    /// Number of box positions, `n - w + 1`.
    pub fn box_count(&self) -> usize {
        self.len - self.box_size + 1
    }

    pub fn box_residuals(&self, b: usize) -> &[f64] {
        &self.residuals[b * self.box_size..(b + 1) * self.box_size]
    }

    /// Average of the per-box moments with `other`, divided by `n - w`.
    pub fn covariance(&self, other: &DetrendedProfile) -> f64 {
        debug_assert_eq!(self.box_size, other.box_size);
        debug_assert_eq!(self.len, other.len);
        let total: f64 = self
            .residuals
            .chunks_exact(self.box_size)
            .zip(other.residuals.chunks_exact(self.box_size))
            .map(|(a, b)| box_moment(a, b))
            .sum();
        total / (self.len - self.box_size) as f64
    }

    pub fn variance(&self) -> f64 {
        self.covariance(self)
    }
}

fn coefficient(cov: f64, var_i: f64, var_j: f64) -> Result<f64> {
    if var_i <= 0.0 || var_j <= 0.0 {
        return Err(Error::ConstantSeries);
    }
    let r = cov / (var_i * var_j).sqrt();
    if !r.is_finite() || r.abs() > 1.0 + CLAMP_TOLERANCE {
        return Err(Error::CoefficientOutOfRange { value: r });
    }
    Ok(r.clamp(-1.0, 1.0))
}

fn check_series(series: &[f64], w: usize) -> Result<()> {
    let n = series.len();
    if w < MIN_BOX_SIZE || w >= n {
        return Err(Error::BoxSize {
            box_size: w,
            len: n,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "series has non-finite entries".to_string(),
        ));
    }
    if series.iter().all(|v| *v == series[0]) {
        return Err(Error::ConstantSeries);
    }
    Ok(())
}

fn detrended(series: &[f64], w: usize) -> Result<DetrendedProfile> {
    check_series(series, w)?;
    DetrendedProfile::new(&profile(series)?, w)
}

/// DCCC of two equal-length series at box size `w` (`3 <= w < n`).
pub fn dccc(series_i: &[f64], series_j: &[f64], w: usize) -> Result<f64> {
    if series_i.len() != series_j.len() {
        return Err(Error::LengthMismatch {
            left: series_i.len(),
            right: series_j.len(),
        });
    }
    let di = detrended(series_i, w)?;
    let dj = detrended(series_j, w)?;
    coefficient(di.covariance(&dj), di.variance(), dj.variance())
}

/// Symmetric correlation matrix over a set of asset codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    codes: Vec<String>,
    /// DCCA box size; `None` for a plain Pearson matrix.
    box_size: Option<usize>,
    #[serde(with = "crate::io::matrix_rows")]
    values: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn new(codes: Vec<String>, box_size: Option<usize>, values: DMatrix<f64>) -> Result<Self> {
        let n = codes.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{} but there are {n} codes",
                values.nrows(),
                values.ncols()
            )));
        }
        let asym = max_asymmetry(&values);
        if asym > SYMMETRY_TOLERANCE {
            return Err(Error::Asymmetric { asymmetry: asym });
        }
        for i in 0..n {
            if values[(i, i)] != 1.0 {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry for {} is {}, expected 1",
                    codes[i],
                    values[(i, i)]
                )));
            }
            for j in 0..n {
                let v = values[(i, j)];
                if v.is_nan() || v.abs() > 1.0 + 1e-9 {
                    return Err(Error::InvalidCorrelation {
                        left: codes[i].clone(),
                        right: codes[j].clone(),
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            codes,
            box_size,
            values,
        })
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn box_size(&self) -> Option<usize> {
        self.box_size
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

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

fn assemble(
    codes: &[String],
    pairs: &[(usize, usize)],
    entries: Vec<f64>,
    box_size: Option<usize>,
) -> Result<CorrelationMatrix> {
    let n = codes.len();
    let mut values = DMatrix::identity(n, n);
    for (&(i, j), v) in pairs.iter().zip(entries) {
        values[(i, j)] = v;
        values[(j, i)] = v;
    }
    CorrelationMatrix::new(codes.to_vec(), box_size, values)
}

fn pair_error(codes: &[String], i: usize, j: usize, e: Error) -> Error {
    Error::Pair {
        left: codes[i].clone(),
        right: codes[j].clone(),
        source: Box::new(e),
    }
}

/// DCCC for every pair of columns. Each unordered pair is evaluated once
/// and mirrored; the diagonal is exactly 1.
pub fn dccc_matrix(panel: &ReturnPanel, w: usize) -> Result<CorrelationMatrix> {
    let n = panel.n_assets();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 assets, got {n}"
        )));
    }
    if w < MIN_BOX_SIZE || panel.len() <= w {
        return Err(Error::BoxSize {
            box_size: w,
            len: panel.len(),
        });
    }
    let codes = panel.codes();
    let detrended: Vec<DetrendedProfile> = panel
        .columns()
        .par_iter()
        .enumerate()
        .map(|(k, col)| {
            detrended(col, w).map_err(|e| Error::InvalidInput(format!("asset {}: {e}", codes[k])))
        })
        .collect::<Result<_>>()?;
    let variances: Vec<f64> = detrended.iter().map(DetrendedProfile::variance).collect();

    let pairs = upper_pairs(n);
    let entries = pairs
        .par_iter()
        .map(|&(i, j)| {
            coefficient(
                detrended[i].covariance(&detrended[j]),
                variances[i],
                variances[j],
            )
            .map_err(|e| pair_error(codes, i, j, e))
        })
        .collect::<Result<Vec<f64>>>()?;
    assemble(codes, &pairs, entries, Some(w))
}

/// Plain Pearson correlation matrix, offered as an alternative input to
/// the spanning-tree baseline.
pub fn pearson_matrix(panel: &ReturnPanel) -> Result<CorrelationMatrix> {
    let n = panel.n_assets();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 assets, got {n}"
        )));
    }
    let codes = panel.codes();
    let centered: Vec<Vec<f64>> = panel
        .columns()
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / c.len() as f64;
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>())
        .collect();
    let pairs = upper_pairs(n);
    let entries = pairs
        .iter()
        .map(|&(i, j)| {
            let cov: f64 = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| a * b)
                .sum();
            coefficient(cov, norms[i], norms[j]).map_err(|e| pair_error(codes, i, j, e))
        })
        .collect::<Result<Vec<f64>>>()?;
    assemble(codes, &pairs, entries, None)
}
