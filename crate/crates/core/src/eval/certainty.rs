use serde::{Deserialize, Serialize};

use super::stats::{density, DensityBin};
use crate::corpus::DocumentGraph;
use crate::model::{map_hierarchy, parent_counts, ChainSample, Hierarchy, ParentCounts};
use crate::{Error, NodeId, Result};

/// Bins of the certainty density.
pub const CERTAINTY_BINS: usize = 10;

/// How much more often the final parent was sampled than a uniform choice
/// among the in-neighbors would predict, relative to its sampled frequency.
///
/// With `r = n_p / n`, the score is `(r - 1/in_degree) / r`, floored at 0.
/// `n_p = 0` scores 0.
pub fn certainty_score(n: usize, n_p: usize, in_degree: usize) -> f64 {
    if n == 0 || n_p == 0 || in_degree == 0 {
        return 0.0;
    }
    let r = n_p as f64 / n as f64;
    ((r - 1.0 / in_degree as f64) / r).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCertainty {
    pub node: NodeId,
    pub id: String,
    pub parent: NodeId,
    pub samples: usize,
    pub parent_samples: usize,
    pub in_degree: usize,
    pub certainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertaintyReport {
    /// Every non-root node, ascending id.
    pub nodes: Vec<NodeCertainty>,
    pub density: Vec<DensityBin>,
}

impl CertaintyReport {
    pub fn get(&self, v: NodeId) -> Option<&NodeCertainty> {
        self.nodes
            .binary_search_by_key(&v, |n| n.node)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,id,parent,samples,parent_samples,in_degree,certainty\n");
        for n in &self.nodes {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                n.node,
                super::csv_field(&n.id),
                n.parent,
                n.samples,
                n.parent_samples,
                n.in_degree,
                n.certainty
            ));
        }
        out
    }
}

/// Certainty of every node's parent in the MAP hierarchy of `samples`.
pub fn certainty(samples: &[ChainSample], graph: &DocumentGraph) -> Result<CertaintyReport> {
    let map = map_hierarchy(samples, graph)?;
    certainty_with(&parent_counts(samples)?, &map, graph)
}

/// Certainty of the parents of `fin` under the sampled parent frequencies `counts`.
pub fn certainty_with(
    counts: &ParentCounts,
    fin: &Hierarchy,
    graph: &DocumentGraph,
) -> Result<CertaintyReport> {
    if counts.counts.len() != graph.len() || fin.len() != graph.len() {
        return Err(Error::InvalidParameter("node counts disagree".into()));
    }
    let nodes: Vec<NodeCertainty> = (0..graph.len())
        .filter_map(|v| fin.parent(v).map(|p| (v, p)))
        .map(|(v, p)| {
            let n_p = counts.counts[v].get(&p).copied().unwrap_or(0);
            let in_degree = graph.in_degree(v);
            NodeCertainty {
                node: v,
                id: graph.node(v).external_id.clone(),
                parent: p,
                samples: counts.samples,
                parent_samples: n_p,
                in_degree,
                certainty: certainty_score(counts.samples, n_p, in_degree),
            }
        })
        .collect();
    let values: Vec<f64> = nodes.iter().map(|n| n.certainty).collect();
    Ok(CertaintyReport {
        density: density(&values, CERTAINTY_BINS),
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NodeRecord;

    #[test]
    fn worked_example() {
        assert!((certainty_score(20, 15, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((certainty_score(10, 2, 10) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn forced_choice_is_zero() {
        assert_eq!(certainty_score(7, 7, 1), 0.0);
    }

    #[test]
    fn negative_raw_value_floors() {
        // r = 0.1 < 1/3
        assert_eq!(certainty_score(10, 1, 3), 0.0);
        assert_eq!(certainty_score(10, 0, 3), 0.0);
    }

    #[test]
    fn report_from_samples() {
        let nodes = (0..4).map(|i| NodeRecord::new(format!("n{i}"), vec![])).collect();
        let g = DocumentGraph::new(nodes, [(0, 1), (0, 2), (1, 3), (2, 3)], 0).unwrap();
        let sample = |p3| ChainSample {
            iteration: 0,
            log_likelihood: 0.0,
            average_depth: 0.0,
            parent: vec![None, Some(0), Some(0), Some(p3)],
            top_words: vec![Vec::new(); 4],
            levels: None,
        };
        let mut s = vec![sample(2); 15];
        s.extend(vec![sample(1); 5]);
        let r = certainty(&s, &g).unwrap();
        assert_eq!(r.nodes.len(), 3);
        let c = r.get(3).unwrap();
        assert_eq!((c.parent, c.samples, c.parent_samples, c.in_degree), (2, 20, 15, 2));
        assert!((c.certainty - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.get(1).unwrap().certainty, 0.0);
        assert!(r.to_csv().contains("0.3333333333333333"));
    }
}
