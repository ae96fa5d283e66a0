//! Node-status indices on weighted networks and the spanning-tree baseline.

mod hits;
mod mst;
mod paths;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::threshold::WeightedNetwork;

pub use hits::{authority, HitsOptions};
pub use mst::mst;
pub use paths::{betweenness, betweenness_with, closeness, closeness_with, EdgeLength};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexName {
    WeightedDegree,
    Authority,
    Closeness,
    Betweenness,
}

impl IndexName {
    pub const ALL: [IndexName; 4] = [
        IndexName::WeightedDegree,
        IndexName::Authority,
        IndexName::Closeness,
        IndexName::Betweenness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IndexName::WeightedDegree => "weighted_degree",
            IndexName::Authority => "authority",
            IndexName::Closeness => "closeness",
            IndexName::Betweenness => "betweenness",
        }
    }
}

impl fmt::Display for IndexName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IndexName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IndexName::ALL
            .into_iter()
            .find(|i| i.as_str() == s || i.as_str().replace('_', "-") == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown index '{s}' (expected weighted_degree, authority, closeness or betweenness)"
                ))
            })
    }
}

/// One score per node, aligned with the network's codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexScores {
    pub index: IndexName,
    pub codes: Vec<String>,
    #[serde(serialize_with = "crate::io::ser_f64_vec")]
    pub scores: Vec<f64>,
}

impl IndexScores {
    pub fn get(&self, code: &str) -> Option<f64> {
        self.codes
            .iter()
            .position(|c| c == code)
            .map(|k| self.scores[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub code: String,
    #[serde(serialize_with = "crate::io::ser_f64")]
    pub score: f64,
    pub rank: usize,
}

/// Nodes ordered by descending score; rank 1 is the strongest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub index: IndexName,
    pub entries: Vec<RankEntry>,
}

impl Ranking {
    pub fn rank_of(&self, code: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.code == code).map(|e| e.rank)
    }
}

/// Sort by descending score, breaking exact ties by ascending code.
pub fn rank(scores: &IndexScores) -> Ranking {
    let mut order: Vec<usize> = (0..scores.codes.len()).collect();
    order.sort_by(|&a, &b| {
        scores.scores[b]
            .total_cmp(&scores.scores[a])
            .then_with(|| scores.codes[a].cmp(&scores.codes[b]))
    });
    let entries = order
        .into_iter()
        .enumerate()
        .map(|(pos, k)| RankEntry {
            code: scores.codes[k].clone(),
            score: scores.scores[k],
            rank: pos + 1,
        })
        .collect();
    Ranking {
        index: scores.index,
        entries,
    }
}

/// Sum of incident edge weights.
pub fn weighted_degree(net: &WeightedNetwork) -> IndexScores {
    let mut scores = vec![0.0; net.node_count()];
    for e in net.edges() {
        scores[e.source] += e.weight;
        scores[e.target] += e.weight;
    }
    IndexScores {
        index: IndexName::WeightedDegree,
        codes: net.codes().to_vec(),
        scores,
    }
}

/// Evaluate one index with default parameters (reciprocal edge lengths,
/// default HITS tolerance).
pub fn compute_index(net: &WeightedNetwork, index: IndexName) -> Result<IndexScores> {
    match index {
        IndexName::WeightedDegree => Ok(weighted_degree(net)),
        IndexName::Authority => authority(net, HitsOptions::default()),
        IndexName::Closeness => Ok(closeness(net)),
        IndexName::Betweenness => Ok(betweenness(net)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threshold::Edge;

    pub(crate) fn net(codes: &[&str], edges: &[(usize, usize, f64)]) -> WeightedNetwork {
        WeightedNetwork::new(
            codes.iter().map(|c| c.to_string()).collect(),
            edges
                .iter()
                .map(|&(source, target, weight)| Edge {
                    source,
                    target,
                    weight,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn triangle_degrees() {
        let g = net(&["A", "B", "C"], &[(0, 1, 0.3), (0, 2, 0.5), (1, 2, 0.2)]);
        let s = weighted_degree(&g);
        assert!((s.get("A").unwrap() - 0.8).abs() < 1e-15);
        assert!((s.get("B").unwrap() - 0.5).abs() < 1e-15);
        assert!((s.get("C").unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn single_edge_degree() {
        let s = weighted_degree(&net(&["A", "B"], &[(0, 1, 0.42)]));
        assert_eq!(s.scores, vec![0.42, 0.42]);
    }

    fn scores(pairs: &[(&str, f64)]) -> IndexScores {
        IndexScores {
            index: IndexName::Closeness,
            codes: pairs.iter().map(|p| p.0.to_string()).collect(),
            scores: pairs.iter().map(|p| p.1).collect(),
        }
    }

    #[test]
    fn rank_orders_and_breaks_ties_by_code() {
        let r = rank(&scores(&[("A", 2.0), ("B", 1.0)]));
        assert_eq!((r.rank_of("A"), r.rank_of("B")), (Some(1), Some(2)));
        let r = rank(&scores(&[("B", 1.0), ("A", 1.0)]));
        assert_eq!(r.entries[0].code, "A");
        assert_eq!(r.rank_of("B"), Some(2));
    }

    #[test]
    fn rank_ignores_input_order() {
        let a = rank(&scores(&[("C", 0.5), ("A", 1.0), ("B", 0.5), ("D", 3.0)]));
        let b = rank(&scores(&[("D", 3.0), ("B", 0.5), ("C", 0.5), ("A", 1.0)]));
        assert_eq!(a, b);
    }

    #[test]
    fn index_names_parse() {
        for i in IndexName::ALL {
            assert_eq!(i.as_str().parse::<IndexName>().unwrap(), i);
        }
        assert_eq!(
            "weighted-degree".parse::<IndexName>().unwrap(),
            IndexName::WeightedDegree
        );
        assert!("pagerank".parse::<IndexName>().is_err());
    }
}
