use super::{IndexName, IndexScores};
use crate::error::{Error, Result};
use crate::threshold::WeightedNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitsOptions {
    /// Stop once successive authority vectors differ by less than this in L2.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for HitsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

fn multiply(adj: &[Vec<(usize, f64)>], x: &[f64]) -> Vec<f64> {
    adj.iter()
        .map(|row| row.iter().map(|&(v, w)| w * x[v]).sum())
        .collect()
}

fn normalize(x: &mut [f64]) -> bool {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

/// Hub and authority vectors, both L2-normalized.
///
/// Starts from uniform hubs and alternates `a <- W h`, `h <- W a`. With a
/// symmetric weight matrix the authority iterate is power iteration on `W^2`.
pub fn hub_and_authority(
    net: &WeightedNetwork,
    options: HitsOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = net.node_count();
    if n == 0 {
        return Err(Error::InvalidInput("empty network".to_string()));
    }
    let adj = net.adjacency();
    let mut hubs = vec![1.0; n];
    let mut auth = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..options.max_iter {
        let mut next = multiply(&adj, &hubs);
        if !normalize(&mut next) {
            return Err(Error::HitsNonConvergence {
                iterations: 0,
                residual: f64::NAN,
            });
        }
        residual = next
            .iter()
            .zip(&auth)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        auth = next;
        hubs = multiply(&adj, &auth);
        normalize(&mut hubs);
        if residual < options.tol {
            return Ok((hubs, auth));
        }
    }
    Err(Error::HitsNonConvergence {
        iterations: options.max_iter,
        residual,
    })
}

/// HITS authority scores rescaled so the largest is 1.
pub fn authority(net: &WeightedNetwork, options: HitsOptions) -> Result<IndexScores> {
    let (_, mut auth) = hub_and_authority(net, options)?;
    let max = auth.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        auth.iter_mut().for_each(|v| *v /= max);
    }
    Ok(IndexScores {
        index: IndexName::Authority,
        codes: net.codes().to_vec(),
        scores: auth,
    })
}
