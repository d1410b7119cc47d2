//! Random walk with restart over the current hierarchy.
//!
//! A walker starts at the root and, at each node `u`, continues to one of
//! `u`'s tree children with probability `(1 - gamma) / deg(u)`. The log
//! weight of a node is the log probability of the walk reaching it; the final
//! hop from a candidate parent to the document is not included.

use std::collections::BTreeMap;

use super::Hierarchy;
use crate::corpus::DocumentGraph;
use crate::NodeId;

/// `ln((1 - gamma) / degree)`: the log probability of one step from a node
/// with `degree` children.
#[inline]
pub fn hop_log_weight(gamma: f64, degree: usize) -> f64 {
    ((1.0 - gamma) / degree as f64).ln()
}

/// Candidate parents of `target` with the log probability of the walk
/// reaching each of them.
///
/// Traverses the hierarchy from the root without ever entering `target`, so
/// nodes in `target`'s own subtree are never candidates. A node `u` is
/// recorded when the graph has an edge `u -> target`.
pub fn rwr_path_probs(
    hierarchy: &Hierarchy,
    graph: &DocumentGraph,
    target: NodeId,
    gamma: f64,
) -> BTreeMap<NodeId, f64> {
    let mut probs = BTreeMap::new();
    if target == hierarchy.root() {
        return probs;
    }
    let mut stack = vec![(hierarchy.root(), 0.0f64)];
    while let Some((u, w)) = stack.pop() {
        let kids = hierarchy.children(u);
        if !kids.is_empty() {
            let step = hop_log_weight(gamma, kids.len());
            for &v in kids.iter().rev() {
                if v != target {
                    stack.push((v, w + step));
                }
            }
        }
        if graph.has_edge(u, target) {
            probs.insert(u, w);
        }
    }
    probs
}

/// Log weight of every node reachable from the root, computed top-down.
/// Nodes not attached to the root get NaN.
pub fn rwr_node_weights(hierarchy: &Hierarchy, gamma: f64) -> Vec<f64> {
    let mut weights = vec![f64::NAN; hierarchy.len()];
    weights[hierarchy.root()] = 0.0;
    let mut stack = vec![hierarchy.root()];
    while let Some(u) = stack.pop() {
        let kids = hierarchy.children(u);
        if kids.is_empty() {
            continue;
        }
        let w = weights[u] + hop_log_weight(gamma, kids.len());
        for &v in kids {
            weights[v] = w;
            stack.push(v);
        }
    }
    weights
}

/// Log weight of the last node of `path` (root first), accumulated in the same
/// order as [`rwr_node_weights`] so the two agree bit for bit.
#[inline]
pub(crate) fn path_log_weight(hierarchy: &Hierarchy, path: &[NodeId], gamma: f64) -> f64 {
    let mut w = 0.0;
    for &u in &path[..path.len().saturating_sub(1)] {
        w += hop_log_weight(gamma, hierarchy.degree(u));
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NodeRecord;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DocumentGraph {
        let nodes = (0..n).map(|i| NodeRecord::new(format!("n{i:02}"), vec![])).collect();
        DocumentGraph::new(nodes, edges.iter().copied(), 0).unwrap()
    }

    #[test]
    fn root_only_parent() {
        let g = graph(2, &[(0, 1)]);
        let h = Hierarchy::bfs(&g).unwrap();
        let p = rwr_path_probs(&h, &g, 1, 0.5);
        assert_eq!(p.into_iter().collect::<Vec<_>>(), vec![(0, 0.0)]);
    }

    #[test]
    fn two_children_each_quarter() {
        // root 0 with children a=1, b=2; k=3 currently under a; edges a->k, b->k.
        let g = graph(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let h = Hierarchy::from_parents(0, vec![None, Some(0), Some(0), Some(1)]).unwrap();
        let p = rwr_path_probs(&h, &g, 3, 0.5);
        assert_eq!(p.len(), 2);
        assert!((p[&1] - 0.25f64.ln()).abs() < 1e-15);
        assert!((p[&2] - 0.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn own_subtree_is_never_a_candidate() {
        // 0 -> 1 -> 2 in the tree; the graph also has 2 -> 1.
        let g = graph(3, &[(0, 1), (1, 2), (2, 1)]);
        let h = Hierarchy::bfs(&g).unwrap();
        let p = rwr_path_probs(&h, &g, 1, 0.3);
        assert_eq!(p.keys().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn node_weights_agree_with_path_weights() {
        let g = graph(5, &[(0, 1), (0, 2), (1, 3), (3, 4), (0, 4)]);
        let h = Hierarchy::bfs(&g).unwrap();
        let w = rwr_node_weights(&h, 0.2);
        for v in 0..5 {
            assert_eq!(w[v], path_log_weight(&h, &h.path(v), 0.2));
        }
        // chain 0 -> 1 -> 3: two hops, deg(0) = 3, deg(1) = 1
        let expected = (0.8f64 / 3.0).ln() + 0.8f64.ln();
        assert!((w[3] - expected).abs() < 1e-15);
    }
}
