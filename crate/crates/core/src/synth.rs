//! Deterministic synthetic return panels with planted correlation structure.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`, seeded with
//! `seed_from_u64`). Uniforms take the top 53 bits of each `u64` draw and
//! Gaussians use the Box-Muller transform, both cosine and sine outputs
//! consumed in that order. Factor and noise draws of [`generate_panel`] use
//! ChaCha streams 0 and 1 of the same seed.

use chrono::{Days, NaiveDate};
use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::dcca::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::ingest::{PricePanel, ReturnPanel};

/// Loading of every leaf on the hub in [`plant_hub`].
pub const HUB_LOADING: f64 = 0.7;

/// Price date preceding the first synthetic return.
pub fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid epoch")
}

/// `len` consecutive calendar days starting the day after [`epoch`].
pub fn synthetic_dates(len: usize) -> Vec<NaiveDate> {
    (1..=len as u64).map(|d| epoch() + Days::new(d)).collect()
}

/// Asset codes `X01, X02, ...`, zero-padded to a common width.
pub fn synthetic_codes(n: usize) -> Vec<String> {
    let width = n.to_string().len().max(2);
    (1..=n).map(|k| format!("X{k:0width$}")).collect()
}

/// Seeded standard-normal generator.
pub struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)`.
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Linear factor model `r_t = L z_t + s e_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSpec {
    pub n_assets: usize,
    pub length: usize,
    /// `n_assets x k` loadings.
    pub loadings: DMatrix<f64>,
    pub noise_scale: f64,
    pub seed: u64,
}

impl FactorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_assets == 0 {
            return Err(Error::InvalidInput("n_assets must be positive".to_string()));
        }
        if self.length < 4 {
            return Err(Error::InvalidInput(format!(
                "length must be at least 4, got {}",
                self.length
            )));
        }
        if self.loadings.nrows() != self.n_assets || self.loadings.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "loadings must be {} x k with k >= 1, got {} x {}",
                self.n_assets,
                self.loadings.nrows(),
                self.loadings.ncols()
            )));
        }
        if self.loadings.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("loadings must be finite".to_string()));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale > 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise_scale must be positive, got {}",
                self.noise_scale
            )));
        }
        Ok(())
    }
}

pub fn generate_panel(spec: &FactorSpec) -> Result<ReturnPanel> {
    spec.validate()?;
    let k = spec.loadings.ncols();
    let mut factors = GaussianStream::new(spec.seed, 0);
    let mut noise = GaussianStream::new(spec.seed, 1);
    let mut columns = vec![Vec::with_capacity(spec.length); spec.n_assets];
    let mut z = vec![0.0; k];
    for _ in 0..spec.length {
        z.iter_mut().for_each(|v| *v = factors.next_gaussian());
        for (a, col) in columns.iter_mut().enumerate() {
            let systematic: f64 = (0..k).map(|f| spec.loadings[(a, f)] * z[f]).sum();
            col.push(systematic + spec.noise_scale * noise.next_gaussian());
        }
    }
    ReturnPanel::new(
        synthetic_dates(spec.length),
        synthetic_codes(spec.n_assets),
        columns,
    )
}

fn check_chain(n: usize, rho: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("chain needs n >= 3, got {n}")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidInput(format!(
            "rho must lie in (0, 1), got {rho}"
        )));
    }
    Ok(())
}

fn check_length(length: usize) -> Result<()> {
    if length < 4 {
        return Err(Error::InvalidInput(format!(
            "length must be at least 4, got {length}"
        )));
    }
    Ok(())
}

/// Cross-sectional AR(1): asset `k + 1 = rho * asset k + sqrt(1 - rho^2) e`.
/// Population correlation between assets `i` and `j` is `rho^|i - j|`.
pub fn plant_chain(n: usize, rho: f64, length: usize, seed: u64) -> Result<ReturnPanel> {
    check_chain(n, rho)?;
    check_length(length)?;
    let innovation = (1.0 - rho * rho).sqrt();
    let mut g = GaussianStream::new(seed, 0);
    let mut columns = vec![Vec::with_capacity(length); n];
    for _ in 0..length {
        let mut prev = g.next_gaussian();
        columns[0].push(prev);
        for col in columns.iter_mut().skip(1) {
            prev = rho * prev + innovation * g.next_gaussian();
            col.push(prev);
        }
    }
    ReturnPanel::new(synthetic_dates(length), synthetic_codes(n), columns)
}

/// Analytic correlation matrix of [`plant_chain`].
pub fn chain_population_matrix(n: usize, rho: f64) -> Result<CorrelationMatrix> {
    check_chain(n, rho)?;
    let values = DMatrix::from_fn(n, n, |i, j| rho.powi(i.abs_diff(j) as i32));
    CorrelationMatrix::new(synthetic_codes(n), None, values)
}

/// Asset 1 is a common factor; every other asset is
/// `HUB_LOADING * asset 1 + independent unit noise`.
pub fn plant_hub(n: usize, length: usize, seed: u64) -> Result<ReturnPanel> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("hub needs n >= 3, got {n}")));
    }
    check_length(length)?;
    let mut g = GaussianStream::new(seed, 0);
    let mut columns = vec![Vec::with_capacity(length); n];
    for _ in 0..length {
        let hub = g.next_gaussian();
        columns[0].push(hub);
        for col in columns.iter_mut().skip(1) {
            col.push(HUB_LOADING * hub + g.next_gaussian());
        }
    }
    ReturnPanel::new(synthetic_dates(length), synthetic_codes(n), columns)
}

/// Analytic correlation matrix of [`plant_hub`].
pub fn hub_population_matrix(n: usize) -> Result<CorrelationMatrix> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("hub needs n >= 3, got {n}")));
    }
    let leaf_var = HUB_LOADING * HUB_LOADING + 1.0;
    let hub_leaf = HUB_LOADING / leaf_var.sqrt();
    let leaf_leaf = HUB_LOADING * HUB_LOADING / leaf_var;
    let values = DMatrix::from_fn(n, n, |i, j| match (i, j) {
        _ if i == j => 1.0,
        (0, _) | (_, 0) => hub_leaf,
        _ => leaf_leaf,
    });
    CorrelationMatrix::new(synthetic_codes(n), None, values)
}

/// Integrate log returns into a price panel starting at `base`, with the
/// base price dated the day before the first return.
pub fn prices_from_returns(panel: &ReturnPanel, base: f64) -> Result<PricePanel> {
    let first = *panel
        .dates()
        .first()
        .ok_or_else(|| Error::InvalidInput("empty return panel".to_string()))?;
    let mut dates = vec![first - Days::new(1)];
    dates.extend_from_slice(panel.dates());
    let mut level = vec![base.ln(); panel.n_assets()];
    let mut rows = vec![vec![Some(base); panel.n_assets()]];
    for t in 0..panel.len() {
        let row = level
            .iter_mut()
            .enumerate()
            .map(|(k, l)| {
                *l += panel.column(k)[t];
                Some(l.exp())
            })
            .collect();
        rows.push(row);
    }
    PricePanel::new(dates, panel.codes().to_vec(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn gaussian_moments() {
        let mut g = GaussianStream::new(3, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| g.next_gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.03, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn identical_loadings_are_nearly_collinear() {
        let spec = FactorSpec {
            n_assets: 2,
            length: 1000,
            loadings: DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
            noise_scale: 0.01,
            seed: 11,
        };
        let p = generate_panel(&spec).unwrap();
        assert!(pearson(p.column(0), p.column(1)) > 0.99);
    }

    #[test]
    fn orthogonal_loadings_are_uncorrelated() {
        let spec = FactorSpec {
            n_assets: 2,
            length: 1000,
            loadings: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            noise_scale: 0.1,
            seed: 5,
        };
        let p = generate_panel(&spec).unwrap();
        assert!(pearson(p.column(0), p.column(1)).abs() < 0.1);
    }

    #[test]
    fn seed_determinism() {
        let spec = FactorSpec {
            n_assets: 3,
            length: 50,
            loadings: DMatrix::from_element(3, 1, 0.5),
            noise_scale: 1.0,
            seed: 42,
        };
        assert_eq!(
            generate_panel(&spec).unwrap(),
            generate_panel(&spec).unwrap()
        );
        assert_eq!(plant_hub(4, 30, 9).unwrap(), plant_hub(4, 30, 9).unwrap());
        assert_ne!(plant_hub(4, 30, 9).unwrap(), plant_hub(4, 30, 10).unwrap());
    }

    #[test]
    fn chain_population_three() {
        let m = chain_population_matrix(3, 0.8).unwrap();
        assert!((m.get(0, 2) - 0.64).abs() < 1e-15);
    }

    #[test]
    fn chain_sample_matches_population() {
        let p = plant_chain(5, 0.7, 5000, 17).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let r = pearson(p.column(i), p.column(j));
                assert!((r - 0.7f64.powi(i.abs_diff(j) as i32)).abs() < 0.05);
            }
        }
        let p = plant_chain(4, 1e-3, 2000, 2).unwrap();
        assert!(pearson(p.column(0), p.column(1)).abs() < 0.1);
    }

    #[test]
    fn hub_leaves_are_symmetric() {
        let p = plant_hub(3, 4000, 8).unwrap();
        let a = pearson(p.column(0), p.column(1));
        let b = pearson(p.column(0), p.column(2));
        assert!((a - b).abs() < 0.05);
        let pop = hub_population_matrix(3).unwrap();
        assert!((a - pop.get(0, 1)).abs() < 0.05);
    }

    #[test]
    fn invalid_specs() {
        assert!(plant_chain(2, 0.5, 100, 1).is_err());
        assert!(plant_chain(3, 1.5, 100, 1).is_err());
        assert!(plant_hub(3, 3, 1).is_err());
    }

    #[test]
    fn prices_roundtrip_returns() {
        let r = plant_hub(3, 20, 1).unwrap();
        let p = prices_from_returns(&r, 100.0).unwrap();
        let back = crate::ingest::log_returns(&p).unwrap();
        assert_eq!(back.dates(), r.dates());
        for k in 0..3 {
            for (a, b) in back.column(k).iter().zip(r.column(k)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
