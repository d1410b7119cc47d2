use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::DocumentGraph;
use crate::model::Hierarchy;
use crate::{Error, NodeId, Result};

/// Hierarchies built without the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    /// Breadth-first tree from the root; ties go to the lowest parent id.
    Bfs,
    /// One uniformly random in-neighbor per node, repaired into a tree.
    RandomParent,
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bfs" => Ok(Self::Bfs),
            "random-parent" => Ok(Self::RandomParent),
            _ => Err(Error::InvalidParameter(format!("unknown baseline {s:?}"))),
        }
    }
}

/// `seed` is ignored for [`BaselineKind::Bfs`].
pub fn baseline_hierarchy(graph: &DocumentGraph, kind: BaselineKind, seed: u64) -> Result<Hierarchy> {
    match kind {
        BaselineKind::Bfs => Hierarchy::bfs(graph),
        BaselineKind::RandomParent => random_parent(graph, &mut ChaCha8Rng::seed_from_u64(seed)),
    }
}

/// Every non-root node first draws a parent among all its in-neighbors. Then,
/// in breadth-first order, a node whose parent chain misses the root redraws
/// among the in-neighbors whose chains reach it. The breadth-first parent is
/// always such a candidate.
fn random_parent(graph: &DocumentGraph, rng: &mut ChaCha8Rng) -> Result<Hierarchy> {
    let n = graph.len();
    let root = graph.root();
    let mut parent: Vec<Option<NodeId>> = (0..n)
        .map(|v| {
            if v == root {
                None
            } else {
                graph.predecessors(v).choose(rng).copied()
            }
        })
        .collect();
    let reaches_root = |parent: &[Option<NodeId>], v: NodeId| {
        let mut cur = v;
        for _ in 0..=n {
            match parent[cur] {
                None => return cur == root,
                Some(p) => cur = p,
            }
        }
        false
    };
    for v in graph.bfs_order() {
        if reaches_root(&parent, v) {
            continue;
        }
        let anchored: Vec<NodeId> = graph
            .predecessors(v)
            .iter()
            .copied()
            .filter(|&u| reaches_root(&parent, u))
            .collect();
        parent[v] = anchored.choose(rng).copied();
    }
    let h = Hierarchy::from_parents(root, parent)?;
    h.validate(graph)?;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NodeRecord;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DocumentGraph {
        let nodes = (0..n).map(|i| NodeRecord::new(format!("n{i}"), vec![])).collect();
        DocumentGraph::new(nodes, edges.iter().copied(), 0).unwrap()
    }

    #[test]
    fn star_is_unique() {
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 0)]);
        let b = baseline_hierarchy(&g, BaselineKind::Bfs, 0).unwrap();
        let r = baseline_hierarchy(&g, BaselineKind::RandomParent, 11).unwrap();
        assert_eq!(b, r);
    }

    #[test]
    fn diamond_bfs_takes_lowest_id() {
        let g = graph(4, &[(0, 2), (0, 1), (2, 3), (1, 3)]);
        let b = baseline_hierarchy(&g, BaselineKind::Bfs, 0).unwrap();
        assert_eq!(b.parent(3), Some(1));
    }

    #[test]
    fn cycles_are_repaired() {
        // 1 and 2 point at each other; many seeds must still produce trees
        let g = graph(4, &[(0, 1), (1, 2), (2, 1), (2, 3), (3, 2), (0, 3)]);
        for seed in 0..200 {
            baseline_hierarchy(&g, BaselineKind::RandomParent, seed).unwrap();
        }
    }

    #[test]
    fn kind_parses() {
        assert_eq!("random-parent".parse::<BaselineKind>().unwrap(), BaselineKind::RandomParent);
        assert!("dfs".parse::<BaselineKind>().is_err());
    }
}
