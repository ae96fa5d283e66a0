//! Row-maximum sparsification of a direct matrix.
//!
//! Every node's strongest off-diagonal tie is its row maximum; the smallest
//! of those is the cut. Keeping every entry at or above the cut leaves each
//! node with at least one edge, and any higher cut would strand the node that
//! defined it.

use serde::{Deserialize, Serialize};

use crate::deconv::DirectMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    #[serde(serialize_with = "crate::io::ser_f64")]
    pub weight: f64,
}

/// Undirected graph with strictly positive edge weights and no isolated
/// nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNetwork {
    codes: Vec<String>,
    edges: Vec<Edge>,
}

impl WeightedNetwork {
    /// Validates the edge list: `source < target`, indices in range, no
    /// duplicates, positive finite weights, every node touched. Edges are
    /// stored sorted by `(source, target)`.
    pub fn new(codes: Vec<String>, mut edges: Vec<Edge>) -> Result<Self> {
        let n = codes.len();
        let mut degree = vec![0usize; n];
        for e in &edges {
            if e.source >= e.target || e.target >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) is not an ordered pair of distinct nodes in 0..{n}",
                    e.source, e.target
                )));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "edge {}-{} has non-positive weight {}",
                    codes[e.source], codes[e.target], e.weight
                )));
            }
            degree[e.source] += 1;
            degree[e.target] += 1;
        }
        edges.sort_by_key(|e| (e.source, e.target));
        if let Some(w) = edges
            .windows(2)
            .find(|w| (w[0].source, w[0].target) == (w[1].source, w[1].target))
        {
            return Err(Error::InvalidInput(format!(
                "duplicate edge {}-{}",
                codes[w[0].source], codes[w[0].target]
            )));
        }
        if let Some(k) = degree.iter().position(|&d| d == 0) {
            return Err(Error::InvalidInput(format!(
                "node {} is isolated",
                codes[k]
            )));
        }
        Ok(Self { codes, edges })
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.codes.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut degree = vec![0; self.codes.len()];
        for e in &self.edges {
            degree[e.source] += 1;
            degree[e.target] += 1;
        }
        degree
    }

    /// Neighbour lists `(node, weight)` in ascending node order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.codes.len()];
        for e in &self.edges {
            adj[e.source].push((e.target, e.weight));
            adj[e.target].push((e.source, e.weight));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        adj
    }

    pub fn component_count(&self) -> usize {
        count_components(
            self.codes.len(),
            self.edges.iter().map(|e| (e.source, e.target)),
        )
    }
}

pub(crate) fn count_components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> usize {
    let mut dsu = DisjointSets::new(n);
    let mut components = n;
    for (a, b) in edges {
        if dsu.union(a, b) {
            components -= 1;
        }
    }
    components
}

/// Union-find with path halving.
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    #[serde(serialize_with = "crate::io::ser_f64_vec")]
    pub row_maxima: Vec<f64>,
    #[serde(serialize_with = "crate::io::ser_f64")]
    pub sigma_min: f64,
    /// Code of the node whose row maximum sets the cut.
    pub weakest_node: String,
    #[serde(serialize_with = "crate::io::ser_f64")]
    pub theta: f64,
    pub kept_edges: usize,
    pub total_pairs: usize,
    /// Connected components of the kept network. Non-isolation does not
    /// imply connectivity.
    pub components: usize,
}

pub fn threshold_network(direct: &DirectMatrix) -> Result<(WeightedNetwork, ThresholdReport)> {
    let n = direct.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    let codes = direct.codes();
    let row_maxima: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| direct.get(i, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let (weakest, sigma_min) =
        row_maxima
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );
    if sigma_min.is_nan() || sigma_min <= 0.0 {
        return Err(Error::NonPositiveThreshold {
            sigma_min,
            node: codes[weakest].clone(),
        });
    }

    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            // each row's maximum is read from the row itself, so use the
            // same orientation for the cut on both halves
            let upper = direct.get(i, j);
            let lower = direct.get(j, i);
            if upper >= sigma_min || lower >= sigma_min {
                edges.push(Edge {
                    source: i,
                    target: j,
                    weight: upper.max(lower),
                });
            }
        }
    }
    let total_pairs = n * (n - 1) / 2;
    let kept_edges = edges.len();
    let network = WeightedNetwork::new(codes.to_vec(), edges)
        .map_err(|e| Error::Invariant(format!("thresholded network: {e}")))?;
    let report = ThresholdReport {
        row_maxima,
        sigma_min,
        weakest_node: codes[weakest].clone(),
        theta: kept_edges as f64 / total_pairs as f64,
        kept_edges,
        total_pairs,
        components: network.component_count(),
    };
    Ok((network, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn direct(n: usize, off: &[(usize, usize, f64)]) -> DirectMatrix {
        let mut m = DMatrix::identity(n, n) * 0.5;
        for &(i, j, v) in off {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        DirectMatrix::new((0..n).map(|i| format!("N{}", i + 1)).collect(), m).unwrap()
    }

    #[test]
    fn three_node_hand_example() {
        let d = direct(3, &[(0, 1, 0.9), (0, 2, 0.5), (1, 2, 0.2)]);
        let (net, rep) = threshold_network(&d).unwrap();
        assert_eq!(rep.row_maxima, vec![0.9, 0.9, 0.5]);
        assert_eq!(rep.sigma_min, 0.5);
        assert_eq!(rep.weakest_node, "N3");
        let kept: Vec<_> = net
            .edges()
            .iter()
            .map(|e| (e.source, e.target, e.weight))
            .collect();
        assert_eq!(kept, vec![(0, 1, 0.9), (0, 2, 0.5)]);
        assert!((rep.theta - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(rep.components, 1);
    }

    #[test]
    fn equal_off_diagonals_keep_everything() {
        let d = direct(
            4,
            &[
                (0, 1, 0.3),
                (0, 2, 0.3),
                (0, 3, 0.3),
                (1, 2, 0.3),
                (1, 3, 0.3),
                (2, 3, 0.3),
            ],
        );
        let (net, rep) = threshold_network(&d).unwrap();
        assert_eq!(net.edges().len(), 6);
        assert_eq!(rep.theta, 1.0);
    }

    #[test]
    fn non_positive_cut_is_error() {
        let d = direct(3, &[(0, 1, 0.4), (0, 2, -0.1), (1, 2, -0.2)]);
        match threshold_network(&d) {
            Err(Error::NonPositiveThreshold { node, sigma_min }) => {
                assert_eq!(node, "N3");
                assert_eq!(sigma_min, -0.1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn disconnected_result_reports_components() {
        let d = direct(4, &[(0, 1, 0.9), (2, 3, 0.8), (0, 2, 0.1), (1, 3, 0.1)]);
        let (_, rep) = threshold_network(&d).unwrap();
        assert_eq!(rep.kept_edges, 2);
        assert_eq!(rep.components, 2);
    }

    #[test]
    fn network_validation() {
        let codes = vec!["A".to_string(), "B".to_string(), "C".to_string()];
        let e = |s, t, w| Edge {
            source: s,
            target: t,
            weight: w,
        };
        assert!(WeightedNetwork::new(codes.clone(), vec![e(0, 1, 1.0), e(1, 2, 1.0)]).is_ok());
        assert!(WeightedNetwork::new(codes.clone(), vec![e(0, 1, 1.0)]).is_err());
        assert!(WeightedNetwork::new(codes.clone(), vec![e(1, 0, 1.0), e(1, 2, 1.0)]).is_err());
        assert!(WeightedNetwork::new(codes.clone(), vec![e(0, 1, 0.0), e(1, 2, 1.0)]).is_err());
        assert!(
            WeightedNetwork::new(codes, vec![e(0, 1, 1.0), e(0, 1, 2.0), e(1, 2, 1.0)]).is_err()
        );
    }
}
