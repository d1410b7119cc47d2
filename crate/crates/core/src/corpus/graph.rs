use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::{Error, NodeId, Result, WordId};

/// One document: its identity, text as word ids, and optional category labels.
///
/// Categories are carried for evaluation only; the sampler never reads them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub external_id: String,
    pub title: String,
    pub tokens: Vec<WordId>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub categories: BTreeSet<String>,
}

impl NodeRecord {
    pub fn new(external_id: impl Into<String>, tokens: Vec<WordId>) -> Self {
        let external_id = external_id.into();
        Self {
            title: external_id.clone(),
            external_id,
            tokens,
            categories: BTreeSet::new(),
        }
    }
}

/// Rooted directed graph over documents with dense node ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct DocumentGraph {
    nodes: Vec<NodeRecord>,
    root: NodeId,
    out_edges: Vec<Vec<NodeId>>,
    in_edges: Vec<Vec<NodeId>>,
    index: HashMap<String, NodeId>,
    num_edges: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    root: NodeId,
    nodes: Vec<NodeRecord>,
    edges: Vec<(NodeId, NodeId)>,
}

impl TryFrom<RawGraph> for DocumentGraph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        DocumentGraph::new(raw.nodes, raw.edges, raw.root)
    }
}

impl From<DocumentGraph> for RawGraph {
    fn from(g: DocumentGraph) -> Self {
        let edges = g.edges().collect();
        RawGraph {
            root: g.root,
            nodes: g.nodes,
            edges,
        }
    }
}

impl DocumentGraph {
    /// Builds a graph from dense-indexed nodes. Self-loops are dropped and
    /// duplicate edges collapsed; out-of-range endpoints and duplicate external
    /// ids are errors.
    pub fn new<I>(nodes: Vec<NodeRecord>, edges: I, root: NodeId) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let n = nodes.len();
        if root >= n {
            return Err(Error::InvalidParameter(format!(
                "root {root} out of range for {n} nodes"
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.external_id.clone(), i).is_some() {
                return Err(Error::DuplicateNode(node.external_id.clone()));
            }
        }
        let mut out_edges = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u != v {
                out_edges[u].push(v);
            }
        }
        let mut in_edges = vec![Vec::new(); n];
        let mut num_edges = 0;
        for (u, targets) in out_edges.iter_mut().enumerate() {
            targets.sort_unstable();
            targets.dedup();
            num_edges += targets.len();
            for &v in targets.iter() {
                in_edges[v].push(u);
            }
        }
        Ok(Self {
            nodes,
            root,
            out_edges,
            in_edges,
            index,
            num_edges,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &NodeRecord {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn tokens(&self, id: NodeId) -> &[WordId] {
        &self.nodes[id].tokens
    }

    pub fn lookup(&self, external_id: &str) -> Option<NodeId> {
        self.index.get(external_id).copied()
    }

    /// Sorted successors of `u`.
    pub fn successors(&self, u: NodeId) -> &[NodeId] {
        &self.out_edges[u]
    }

    /// Sorted predecessors of `v`: the candidate parents of `v`.
    pub fn predecessors(&self, v: NodeId) -> &[NodeId] {
        &self.in_edges[v]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_edges[v].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_edges[u].binary_search(&v).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// All edges in `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_edges
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn total_tokens(&self) -> usize {
        self.nodes.iter().map(|n| n.tokens.len()).sum()
    }

    /// Largest word id in use, `None` for a corpus without tokens.
    pub fn max_word_id(&self) -> Option<WordId> {
        self.nodes
            .iter()
            .flat_map(|n| n.tokens.iter().copied())
            .max()
    }

    /// Breadth-first order from the root, children visited in ascending id.
    /// Unreachable nodes are absent.
    pub fn bfs_order(&self) -> Vec<NodeId> {
        self.bfs().0
    }

    /// BFS tree parents: the first discovering node, which is the lowest-id
    /// predecessor at minimal depth. `None` for the root and unreachable
    /// nodes.
    pub fn bfs_parents(&self) -> Vec<Option<NodeId>> {
        self.bfs().1
    }

    fn bfs(&self) -> (Vec<NodeId>, Vec<Option<NodeId>>) {
        let n = self.len();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        seen[self.root] = true;
        queue.push_back(self.root);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &self.out_edges[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        (order, parent)
    }

    /// True when every node is reachable from the root.
    pub fn is_rooted_connected(&self) -> bool {
        self.bfs_order().len() == self.len()
    }
}
