use std::collections::BTreeMap;

use super::{ChainSample, Hierarchy, SamplerState};
use crate::corpus::DocumentGraph;
use crate::{Error, NodeId, Result};

/// How often each node was sampled under each parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentCounts {
    pub samples: usize,
    /// `counts[v]` maps parent id to the number of samples with that parent.
    pub counts: Vec<BTreeMap<NodeId, usize>>,
}

impl ParentCounts {
    /// Parents of `v` by descending frequency, ties by ascending id.
    pub fn ranked(&self, v: NodeId) -> Vec<(NodeId, usize)> {
        let mut r: Vec<(NodeId, usize)> = self.counts[v].iter().map(|(&p, &c)| (p, c)).collect();
        r.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        r
    }

    /// Most frequent parent, ties by lowest id.
    pub fn mode(&self, v: NodeId) -> Option<NodeId> {
        self.ranked(v).first().map(|&(p, _)| p)
    }
}

pub fn parent_counts(samples: &[ChainSample]) -> Result<ParentCounts> {
    let n = samples
        .first()
        .ok_or_else(|| Error::InvalidParameter("no samples".into()))?
        .parent
        .len();
    let mut counts = vec![BTreeMap::new(); n];
    for s in samples {
        if s.parent.len() != n {
            return Err(Error::InvalidParameter("samples disagree on node count".into()));
        }
        for (v, p) in s.parent.iter().enumerate() {
            if let Some(p) = *p {
                *counts[v].entry(p).or_insert(0) += 1;
            }
        }
    }
    Ok(ParentCounts {
        samples: samples.len(),
        counts,
    })
}

/// Maximum a posteriori hierarchy: every node takes its most frequently
/// sampled parent.
///
/// Independent per-node modes can form cycles. Nodes that do not reach the
/// root are repaired in breadth-first order of the graph, taking their most
/// frequent sampled parent that already reaches the root and otherwise their
/// breadth-first parent.
pub fn map_hierarchy(samples: &[ChainSample], graph: &DocumentGraph) -> Result<Hierarchy> {
    let counts = parent_counts(samples)?;
    let n = graph.len();
    if counts.counts.len() != n {
        return Err(Error::InvalidParameter("samples do not match the graph".into()));
    }
    let root = graph.root();
    let mut parent: Vec<Option<NodeId>> = (0..n).map(|v| counts.mode(v)).collect();
    parent[root] = None;

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

    let bfs_parent = graph.bfs_parents();
    for v in graph.bfs_order() {
        if v == root || reaches_root(&parent, v) {
            continue;
        }
        let repaired = counts
            .ranked(v)
            .into_iter()
            .map(|(p, _)| p)
            .find(|&p| reaches_root(&parent, p))
            .or(bfs_parent[v]);
        parent[v] = repaired;
    }
    let h = Hierarchy::from_parents(root, parent)?;
    h.validate(graph)?;
    Ok(h)
}

impl SamplerState {
    /// Moves nodes one by one until the hierarchy equals `target`, keeping
    /// counts consistent. Nodes are placed in breadth-first order of
    /// `target`, so every move is acyclic.
    pub fn reparent_to(&mut self, target: &Hierarchy) -> Result<()> {
        target.validate(&self.graph)?;
        let mut queue = std::collections::VecDeque::from([target.root()]);
        while let Some(u) = queue.pop_front() {
            for &c in target.children(u) {
                self.move_subtree(c, u)?;
                queue.push_back(c);
            }
        }
        debug_assert_eq!(self.hierarchy.parents(), target.parents());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NodeRecord;

    fn sample(parent: Vec<Option<NodeId>>) -> ChainSample {
        ChainSample {
            iteration: 0,
            log_likelihood: 0.0,
            average_depth: 0.0,
            top_words: vec![Vec::new(); parent.len()],
            parent,
            levels: None,
        }
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> DocumentGraph {
        let nodes = (0..n).map(|i| NodeRecord::new(format!("n{i}"), vec![])).collect();
        DocumentGraph::new(nodes, edges.iter().copied(), 0).unwrap()
    }

    #[test]
    fn mode_wins() {
        // node 3 sampled under x=1 five times and y=2 fifteen times
        let g = graph(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let mut s = vec![sample(vec![None, Some(0), Some(0), Some(1)]); 5];
        s.extend(vec![sample(vec![None, Some(0), Some(0), Some(2)]); 15]);
        let h = map_hierarchy(&s, &g).unwrap();
        assert_eq!(h.parent(3), Some(2));
    }

    #[test]
    fn single_sample_is_verbatim() {
        let g = graph(4, &[(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)]);
        let p = vec![None, Some(0), Some(1), Some(2)];
        let h = map_hierarchy(&[sample(p.clone())], &g).unwrap();
        assert_eq!(h.parents(), &p[..]);
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let g = graph(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let s = vec![
            sample(vec![None, Some(0), Some(0), Some(2)]),
            sample(vec![None, Some(0), Some(0), Some(1)]),
        ];
        assert_eq!(map_hierarchy(&s, &g).unwrap().parent(3), Some(1));
    }

    #[test]
    fn two_cycle_is_repaired() {
        // a=1, b=2 can each be the other's parent; modes make them a 2-cycle.
        let g = graph(3, &[(0, 1), (0, 2), (1, 2), (2, 1)]);
        let s = vec![
            sample(vec![None, Some(2), Some(0)]),
            sample(vec![None, Some(2), Some(0)]),
            sample(vec![None, Some(0), Some(1)]),
            sample(vec![None, Some(0), Some(1)]),
            sample(vec![None, Some(2), Some(1)]),
        ];
        // modes: parent(1) = 2 (3 of 5), parent(2) = 1 (3 of 5)
        let h = map_hierarchy(&s, &g).unwrap();
        h.validate(&g).unwrap();
        assert_eq!(h.parent(1), Some(0));
        assert_eq!(h.parent(2), Some(1));
    }
}
