//! Closeness and betweenness over weighted shortest paths.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{IndexName, IndexScores};
use crate::error::{Error, Result};
use crate::threshold::WeightedNetwork;

/// Relative tolerance under which two path lengths count as equal.
pub const PATH_TIE_TOLERANCE: f64 = 1e-9;

/// How an edge weight (a similarity) becomes a path length.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EdgeLength {
    /// `1 / weight`.
    #[default]
    Reciprocal,
    /// `1 - weight`; needs every weight below 1.
    Complement,
}

impl EdgeLength {
    fn length(self, weight: f64) -> f64 {
        match self {
            EdgeLength::Reciprocal => 1.0 / weight,
            EdgeLength::Complement => 1.0 - weight,
        }
    }
}

fn length_adjacency(net: &WeightedNetwork, kind: EdgeLength) -> Result<Vec<Vec<(usize, f64)>>> {
    let adj: Vec<Vec<(usize, f64)>> = net
        .adjacency()
        .into_iter()
        .map(|list| list.into_iter().map(|(v, w)| (v, kind.length(w))).collect())
        .collect();
    if let Some((u, v, len)) = adj
        .iter()
        .enumerate()
        .flat_map(|(u, l)| l.iter().map(move |&(v, len)| (u, v, len)))
        .find(|(_, _, len)| !(len.is_finite() && *len > 0.0))
    {
        return Err(Error::InvalidInput(format!(
            "edge {}-{} has non-positive length {len}",
            net.codes()[u],
            net.codes()[v]
        )));
    }
    Ok(adj)
}

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= PATH_TIE_TOLERANCE * a.abs().max(b.abs())
}

#[derive(Clone, Copy, PartialEq)]
struct Queued {
    dist: f64,
    node: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path DAG from one source.
struct ShortestPaths {
    /// Nodes in the order they were settled (non-decreasing distance).
    settled: Vec<usize>,
    dist: Vec<f64>,
    /// Number of shortest paths from the source.
    count: Vec<f64>,
    preds: Vec<Vec<usize>>,
}

fn single_source(adj: &[Vec<(usize, f64)>], source: usize) -> ShortestPaths {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut count = vec![0.0; n];
    let mut preds = vec![Vec::new(); n];
    let mut done = vec![false; n];
    let mut settled = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();

    dist[source] = 0.0;
    count[source] = 1.0;
    heap.push(Reverse(Queued {
        dist: 0.0,
        node: source,
    }));
    while let Some(Reverse(Queued { node: v, .. })) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        settled.push(v);
        for &(w, len) in &adj[v] {
            if done[w] {
                continue;
            }
            let candidate = dist[v] + len;
            if dist[w].is_infinite() || (candidate < dist[w] && !same_length(candidate, dist[w])) {
                dist[w] = candidate;
                count[w] = count[v];
                preds[w].clear();
                preds[w].push(v);
                heap.push(Reverse(Queued {
                    dist: candidate,
                    node: w,
                }));
            } else if same_length(candidate, dist[w]) {
                count[w] += count[v];
                preds[w].push(v);
            }
        }
    }
    ShortestPaths {
        settled,
        dist,
        count,
        preds,
    }
}

pub fn closeness(net: &WeightedNetwork) -> IndexScores {
    closeness_with(net, EdgeLength::Reciprocal).expect("positive weights give positive lengths")
}

/// Closeness with Wasserman-Faust scaling for nodes that do not reach the
/// whole graph: `(r / (n - 1)) * (r / sum of distances)` where `r` counts
/// reachable nodes. On a connected graph this is `(n - 1) / sum`.
pub fn closeness_with(net: &WeightedNetwork, length: EdgeLength) -> Result<IndexScores> {
    let adj = length_adjacency(net, length)?;
    let n = adj.len();
    let scores = (0..n)
        .into_par_iter()
        .map(|s| {
            let sp = single_source(&adj, s);
            let reachable = sp.settled.len() - 1;
            let total: f64 = sp.settled.iter().map(|&v| sp.dist[v]).sum();
            if reachable == 0 || total <= 0.0 || n < 2 {
                0.0
            } else {
                let r = reachable as f64;
                (r / (n - 1) as f64) * (r / total)
            }
        })
        .collect();
    Ok(IndexScores {
        index: IndexName::Closeness,
        codes: net.codes().to_vec(),
        scores,
    })
}

pub fn betweenness(net: &WeightedNetwork) -> IndexScores {
    betweenness_with(net, EdgeLength::Reciprocal).expect("positive weights give positive lengths")
}

/// Brandes accumulation over unordered pairs.
pub fn betweenness_with(net: &WeightedNetwork, length: EdgeLength) -> Result<IndexScores> {
    let adj = length_adjacency(net, length)?;
    let n = adj.len();
    let per_source: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let sp = single_source(&adj, s);
            let mut delta = vec![0.0; n];
            for &w in sp.settled.iter().rev() {
                for &v in &sp.preds[w] {
                    delta[v] += sp.count[v] / sp.count[w] * (1.0 + delta[w]);
                }
            }
            delta[s] = 0.0;
            delta
        })
        .collect();
    let mut scores = vec![0.0; n];
    for delta in &per_source {
        for (acc, d) in scores.iter_mut().zip(delta) {
            *acc += d;
        }
    }
    // every unordered pair was visited from both ends
    for s in &mut scores {
        *s /= 2.0;
    }
    Ok(IndexScores {
        index: IndexName::Betweenness,
        codes: net.codes().to_vec(),
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::net;

    #[test]
    fn path_closeness() {
        let g = net(&["A", "B", "C"], &[(0, 1, 1.0), (1, 2, 1.0)]);
        let c = closeness(&g);
        assert!((c.scores[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.scores[1] - 1.0).abs() < 1e-15);
        assert!((c.scores[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn heavy_edge_is_short() {
        let c = closeness(&net(&["A", "B"], &[(0, 1, 2.0)]));
        assert_eq!(c.scores, vec![2.0, 2.0]);
    }

    #[test]
    fn disconnected_closeness_is_scaled() {
        // two components of two nodes each, unit lengths
        let g = net(&["A", "B", "C", "D"], &[(0, 1, 1.0), (2, 3, 1.0)]);
        let c = closeness(&g);
        for s in c.scores {
            assert!((s - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn star_betweenness() {
        let g = net(
            &["H", "A", "B", "C", "D"],
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)],
        );
        assert_eq!(betweenness(&g).scores, vec![6.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn path_betweenness() {
        let g = net(&["A", "B", "C"], &[(0, 1, 0.7), (1, 2, 0.3)]);
        assert_eq!(betweenness(&g).scores, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn square_splits_paths() {
        // 4-cycle: each opposite pair has two shortest paths
        let g = net(
            &["A", "B", "C", "D"],
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)],
        );
        assert_eq!(betweenness(&g).scores, vec![0.5; 4]);
    }

    #[test]
    fn complement_length_needs_weights_below_one() {
        let g = net(&["A", "B"], &[(0, 1, 1.0)]);
        assert!(closeness_with(&g, EdgeLength::Complement).is_err());
        let g = net(&["A", "B"], &[(0, 1, 0.75)]);
        let c = closeness_with(&g, EdgeLength::Complement).unwrap();
        assert_eq!(c.scores, vec![4.0, 4.0]);
    }
}
