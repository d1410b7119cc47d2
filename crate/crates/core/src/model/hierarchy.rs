use serde::{Deserialize, Serialize};

use crate::corpus::DocumentGraph;
use crate::{Error, NodeId, Result};

/// A rooted tree over the graph's nodes, stored as a parent array with derived
/// children lists (ascending) and depths (root at depth 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHierarchy", into = "RawHierarchy")]
pub struct Hierarchy {
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawHierarchy {
    root: NodeId,
    parent: Vec<Option<NodeId>>,
}

impl TryFrom<RawHierarchy> for Hierarchy {
    type Error = Error;
    fn try_from(raw: RawHierarchy) -> Result<Self> {
        Hierarchy::from_parents(raw.root, raw.parent)
    }
}

impl From<Hierarchy> for RawHierarchy {
    fn from(h: Hierarchy) -> Self {
        RawHierarchy {
            root: h.root,
            parent: h.parent,
        }
    }
}

impl Hierarchy {
    /// Builds a hierarchy from a parent array, rejecting anything that is not
    /// a single tree rooted at `root`.
    pub fn from_parents(root: NodeId, parent: Vec<Option<NodeId>>) -> Result<Self> {
        let n = parent.len();
        if root >= n {
            return Err(Error::Invariant(format!("root {root} out of range")));
        }
        if parent[root].is_some() {
            return Err(Error::Invariant("root has a parent".into()));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            match *p {
                Some(p) if p >= n => {
                    return Err(Error::Invariant(format!("parent {p} of {v} out of range")))
                }
                Some(p) => children[p].push(v),
                None if v != root => {
                    return Err(Error::Invariant(format!("node {v} has no parent")))
                }
                None => {}
            }
        }
        let mut h = Self {
            root,
            parent,
            children,
            depth: vec![usize::MAX; n],
        };
        h.depth[root] = 0;
        let mut stack = vec![root];
        let mut visited = 0;
        while let Some(u) = stack.pop() {
            visited += 1;
            for &c in &h.children[u] {
                h.depth[c] = h.depth[u] + 1;
                stack.push(c);
            }
        }
        if visited != n {
            return Err(Error::Invariant(format!(
                "{} nodes do not reach the root (cycle)",
                n - visited
            )));
        }
        Ok(h)
    }

    /// Breadth-first tree of the graph, ties broken by lowest parent id.
    pub fn bfs(graph: &DocumentGraph) -> Result<Self> {
        Self::from_parents(graph.root(), graph.bfs_parents())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    pub fn children(&self, u: NodeId) -> &[NodeId] {
        &self.children[u]
    }

    /// Out-degree of `u` in the tree.
    pub fn degree(&self, u: NodeId) -> usize {
        self.children[u].len()
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v]
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Mean depth over non-root nodes; zero for a lone root.
    pub fn average_depth(&self) -> f64 {
        if self.len() <= 1 {
            return 0.0;
        }
        let total: usize = self.depth.iter().sum();
        total as f64 / (self.len() - 1) as f64
    }

    /// Root-to-`v` path, inclusive on both ends.
    pub fn path(&self, v: NodeId) -> Vec<NodeId> {
        let mut p = Vec::with_capacity(self.depth[v] + 1);
        self.path_into(v, &mut p);
        p
    }

    pub fn path_into(&self, v: NodeId, buf: &mut Vec<NodeId>) {
        buf.clear();
        let mut cur = Some(v);
        while let Some(u) = cur {
            buf.push(u);
            cur = self.parent[u];
        }
        buf.reverse();
    }

    /// Walks up from `v`; returns the path root..=v, or `None` when the walk
    /// ends at a detached node instead of the root.
    pub(crate) fn attached_path_into(&self, v: NodeId, buf: &mut Vec<NodeId>) -> bool {
        self.path_into(v, buf);
        buf.first() == Some(&self.root)
    }

    /// True when `a` is `v` or one of its ancestors.
    pub fn is_ancestor_or_self(&self, a: NodeId, v: NodeId) -> bool {
        let mut cur = Some(v);
        while let Some(u) = cur {
            if u == a {
                return true;
            }
            cur = self.parent[u];
        }
        false
    }

    /// Nodes of the subtree rooted at `v` in preorder (`v` first).
    pub fn subtree(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().rev());
        }
        out
    }

    /// Checks the tree invariants and that every tree edge is a graph edge.
    pub fn validate(&self, graph: &DocumentGraph) -> Result<()> {
        if self.len() != graph.len() || self.root != graph.root() {
            return Err(Error::Invariant("hierarchy does not match graph".into()));
        }
        let rebuilt = Self::from_parents(self.root, self.parent.clone())?;
        if rebuilt.depth != self.depth {
            return Err(Error::Invariant("stale depths".into()));
        }
        for (v, kids) in self.children.iter().enumerate() {
            let mut expected = rebuilt.children[v].clone();
            expected.sort_unstable();
            if *kids != expected {
                return Err(Error::Invariant(format!("stale children of {v}")));
            }
        }
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                if !graph.has_edge(p, v) {
                    return Err(Error::Invariant(format!(
                        "tree edge {p} -> {v} is not a graph edge"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Removes `v` from its parent's children. Depths inside the subtree are
    /// left stale until [`attach`](Self::attach).
    pub(crate) fn detach(&mut self, v: NodeId) -> NodeId {
        let p = self.parent[v].take().expect("cannot detach the root");
        let kids = &mut self.children[p];
        let pos = kids.binary_search(&v).expect("child list out of sync");
        kids.remove(pos);
        p
    }

    pub(crate) fn attach(&mut self, v: NodeId, p: NodeId) {
        debug_assert!(self.parent[v].is_none() && v != self.root);
        self.parent[v] = Some(p);
        let kids = &mut self.children[p];
        let pos = kids.binary_search(&v).unwrap_err();
        kids.insert(pos, v);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            let d = self.depth[self.parent[u].expect("attached")] + 1;
            self.depth[u] = d;
            stack.extend_from_slice(&self.children[u]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NodeRecord;

    #[test]
    fn rejects_cycles_and_orphans() {
        assert!(Hierarchy::from_parents(0, vec![None, Some(2), Some(1)]).is_err());
        assert!(Hierarchy::from_parents(0, vec![None, None]).is_err());
        assert!(Hierarchy::from_parents(0, vec![Some(1), None]).is_err());
    }

    #[test]
    fn depths_paths_and_subtrees() {
        // 0 -> 1 -> 2, 0 -> 3
        let h = Hierarchy::from_parents(0, vec![None, Some(0), Some(1), Some(0)]).unwrap();
        assert_eq!(h.depth(2), 2);
        assert_eq!(h.path(2), vec![0, 1, 2]);
        assert_eq!(h.subtree(1), vec![1, 2]);
        assert_eq!(h.children(0), &[1, 3]);
        assert!(h.is_ancestor_or_self(1, 2));
        assert!(!h.is_ancestor_or_self(3, 2));
        assert!((h.average_depth() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn detach_attach_moves_subtree() {
        let mut h = Hierarchy::from_parents(0, vec![None, Some(0), Some(1), Some(0)]).unwrap();
        let old = h.detach(1);
        assert_eq!(old, 0);
        let mut buf = Vec::new();
        assert!(!h.attached_path_into(2, &mut buf));
        h.attach(1, 3);
        assert_eq!(h.depth(2), 3);
        assert_eq!(h.path(2), vec![0, 3, 1, 2]);
        let again = Hierarchy::from_parents(0, h.parents().to_vec()).unwrap();
        assert_eq!(again, h);
    }

    #[test]
    fn validate_checks_graph_edges() {
        let nodes = (0..3).map(|i| NodeRecord::new(format!("n{i}"), vec![])).collect();
        let g = DocumentGraph::new(nodes, [(0, 1), (1, 2), (0, 2)], 0).unwrap();
        let h = Hierarchy::from_parents(0, vec![None, Some(0), Some(1)]).unwrap();
        assert!(h.validate(&g).is_ok());
        let h = Hierarchy::from_parents(0, vec![None, Some(2), Some(0)]).unwrap();
        assert!(h.validate(&g).is_err());
    }
}
