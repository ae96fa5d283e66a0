use crate::dcca::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::threshold::{DisjointSets, Edge, WeightedNetwork};

/// `sqrt(2 (1 - rho))`.
pub(crate) fn correlation_distance(rho: f64) -> f64 {
    (2.0 * (1.0 - rho).max(0.0)).sqrt()
}

/// Minimum spanning tree on correlation distances (Kruskal).
///
/// Candidate edges are ordered by `(distance, i, j)`, so equal distances
/// resolve towards lower indices. Tree edges carry the correlation, not the
/// distance, as their weight; a tree edge with correlation `<= 0` cannot be
/// represented and is an error.
pub fn mst(matrix: &CorrelationMatrix) -> Result<WeightedNetwork> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    let codes = matrix.codes();
    let mut candidates = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let rho = matrix.get(i, j);
            if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&rho) {
                return Err(Error::InvalidCorrelation {
                    left: codes[i].clone(),
                    right: codes[j].clone(),
                    value: rho,
                });
            }
            candidates.push((correlation_distance(rho), i, j));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut sets = DisjointSets::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    for (_, i, j) in candidates {
        if sets.union(i, j) {
            let rho = matrix.get(i, j);
            if rho <= 0.0 {
                return Err(Error::NonPositiveTreeEdge {
                    left: codes[i].clone(),
                    right: codes[j].clone(),
                    value: rho,
                });
            }
            edges.push(Edge {
                source: i,
                target: j,
                weight: rho,
            });
            if edges.len() == n - 1 {
                break;
            }
        }
    }
    WeightedNetwork::new(codes.to_vec(), edges)
}
