use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stats::{binned_means, mean_and_std_err, BinSummary};
use super::CertaintyReport;
use crate::corpus::DocumentGraph;
use crate::model::Hierarchy;
use crate::{Error, NodeId, Result};

/// `|a ∩ b| / |a ∪ b|`. Two empty sets score 1.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Category labels per document, keyed by external id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryReference {
    pub categories: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Deserialize)]
struct CategoryLine {
    id: String,
    #[serde(default)]
    categories: Vec<String>,
}

impl CategoryReference {
    /// JSON lines of `{"id": ..., "categories": [...]}`. Repeated ids merge.
    pub fn read(path: &Path) -> Result<Self> {
        let lines: Vec<CategoryLine> = super::read_json_lines(path)?;
        let mut categories: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for l in lines {
            categories.entry(l.id).or_default().extend(l.categories);
        }
        Ok(Self { categories })
    }

    /// Categories carried on the graph's own node records; every node is present.
    pub fn from_graph(graph: &DocumentGraph) -> Self {
        Self {
            categories: graph
                .nodes()
                .iter()
                .map(|n| (n.external_id.clone(), n.categories.clone()))
                .collect(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&BTreeSet<String>> {
        self.categories.get(id)
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeJaccard {
    pub node: NodeId,
    pub id: String,
    pub coefficient: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certainty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JaccardReport {
    pub nodes: Vec<NodeJaccard>,
    /// Non-root documents with no reference entry.
    pub missing: usize,
    /// Non-root documents whose reference set is empty.
    pub empty: usize,
    pub mean: Option<f64>,
    pub std_err: Option<f64>,
    /// Coefficient by certainty bin; empty without a certainty report.
    pub bins: Vec<BinSummary>,
}

impl JaccardReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,id,jaccard,certainty\n");
        for n in &self.nodes {
            let c = n.certainty.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                n.node,
                super::csv_field(&n.id),
                n.coefficient,
                c
            ));
        }
        out
    }
}

/// Agreement between each document's categories and the union of the
/// categories of all its ancestors in `hierarchy`.
pub fn jaccard_vs_reference(
    hierarchy: &Hierarchy,
    graph: &DocumentGraph,
    reference: &CategoryReference,
    certainty: Option<&CertaintyReport>,
    bins: usize,
) -> Result<JaccardReport> {
    hierarchy.validate(graph)?;
    if certainty.is_some() && bins == 0 {
        return Err(Error::InvalidParameter("bin count must be positive".into()));
    }
    let empty_set = BTreeSet::new();
    let cats = |v: NodeId| reference.get(&graph.node(v).external_id);
    let mut nodes = Vec::new();
    let (mut missing, mut empty) = (0, 0);
    for v in 0..graph.len() {
        if v == hierarchy.root() {
            continue;
        }
        let Some(c_d) = cats(v) else {
            missing += 1;
            continue;
        };
        if c_d.is_empty() {
            empty += 1;
            continue;
        }
        let mut c_pa = BTreeSet::new();
        let mut cur = hierarchy.parent(v);
        while let Some(a) = cur {
            c_pa.extend(cats(a).unwrap_or(&empty_set).iter().cloned());
            cur = hierarchy.parent(a);
        }
        nodes.push(NodeJaccard {
            node: v,
            id: graph.node(v).external_id.clone(),
            coefficient: jaccard(c_d, &c_pa),
            certainty: certainty.and_then(|r| r.get(v)).map(|c| c.certainty),
        });
    }
    let values: Vec<f64> = nodes.iter().map(|n| n.coefficient).collect();
    let (mean, std_err) = mean_and_std_err(&values);
    let bins = match certainty {
        Some(_) => {
            let pairs: Vec<(f64, f64)> = nodes
                .iter()
                .filter_map(|n| n.certainty.map(|c| (c, n.coefficient)))
                .collect();
            binned_means(&pairs, bins)
        }
        None => Vec::new(),
    };
    Ok(JaccardReport {
        nodes,
        missing,
        empty,
        mean,
        std_err,
        bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NodeRecord;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn set_arithmetic() {
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard(&set(&["a"]), &set(&["b"])), 0.0);
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["b", "c", "d"])), 0.25);
    }

    #[test]
    fn ancestors_are_unioned() {
        let mut nodes: Vec<NodeRecord> =
            ["r", "a", "b"].iter().map(|i| NodeRecord::new(*i, vec![])).collect();
        nodes[0].categories = set(&["x"]);
        nodes[1].categories = set(&["y"]);
        nodes[2].categories = set(&["x", "y", "z"]);
        let g = DocumentGraph::new(nodes, [(0, 1), (1, 2)], 0).unwrap();
        let h = Hierarchy::bfs(&g).unwrap();
        let r = jaccard_vs_reference(&h, &g, &CategoryReference::from_graph(&g), None, 10).unwrap();
        assert_eq!(r.nodes.len(), 2);
        assert_eq!(r.nodes[0].coefficient, 0.0);
        assert!((r.nodes[1].coefficient - 2.0 / 3.0).abs() < 1e-15);
        assert!(r.bins.is_empty());
    }

    #[test]
    fn absent_and_empty_are_counted() {
        let nodes = ["r", "a", "b"].iter().map(|i| NodeRecord::new(*i, vec![])).collect();
        let g = DocumentGraph::new(nodes, [(0, 1), (0, 2)], 0).unwrap();
        let h = Hierarchy::bfs(&g).unwrap();
        let mut reference = CategoryReference::default();
        reference.categories.insert("a".into(), BTreeSet::new());
        let r = jaccard_vs_reference(&h, &g, &reference, None, 10).unwrap();
        assert_eq!((r.nodes.len(), r.missing, r.empty), (0, 1, 1));
        assert_eq!(r.mean, None);
    }

    #[test]
    fn reads_json_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cats.jsonl");
        std::fs::write(&p, "{\"id\":\"a\",\"categories\":[\"x\",\"y\"]}\n\n{\"id\":\"b\",\"categories\":[]}\n")
            .unwrap();
        let r = CategoryReference::read(&p).unwrap();
        assert_eq!(r.get("a"), Some(&set(&["x", "y"])));
        assert_eq!(r.get("b"), Some(&BTreeSet::new()));
    }
}
