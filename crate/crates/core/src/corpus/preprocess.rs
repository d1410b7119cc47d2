use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::DocumentGraph;
use crate::{Error, NodeId, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RedirectReport {
    pub removed_nodes: usize,
    pub rewritten_edges: usize,
    /// Edges dropped because their source was a redirect page, their final
    /// target is absent, or the rewrite produced a self-loop.
    pub dropped_edges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub kept: usize,
    pub dropped: usize,
}

/// Resolves every redirect source to its final target.
fn close_redirects(redirects: &[(String, String)]) -> Result<HashMap<&str, &str>> {
    let map: HashMap<&str, &str> = redirects
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let mut resolved: HashMap<&str, &str> = HashMap::with_capacity(map.len());
    let mut sources: Vec<&str> = map.keys().copied().collect();
    sources.sort_unstable();
    for &start in &sources {
        let mut chain = vec![start];
        let mut cur = start;
        let fin = loop {
            if let Some(&done) = resolved.get(cur) {
                break done;
            }
            match map.get(cur) {
                Some(&next) => {
                    if let Some(pos) = chain.iter().position(|&c| c == next) {
                        let mut cycle: Vec<String> =
                            chain[pos..].iter().map(|s| s.to_string()).collect();
                        cycle.push(next.to_string());
                        return Err(Error::RedirectCycle(cycle));
                    }
                    chain.push(next);
                    cur = next;
                }
                None => break cur,
            }
        };
        for c in chain {
            if map.contains_key(c) {
                resolved.insert(c, fin);
            }
        }
    }
    Ok(resolved)
}

/// Rewrites edges that point at redirect pages to the final target and removes
/// the redirect pages themselves.
pub fn resolve_redirects(
    graph: &DocumentGraph,
    redirects: &[(String, String)],
) -> Result<(DocumentGraph, RedirectReport)> {
    let resolved = close_redirects(redirects)?;
    let mut report = RedirectReport::default();
    if resolved.is_empty() {
        return Ok((graph.clone(), report));
    }

    let is_redirect = |id: NodeId| resolved.contains_key(graph.node(id).external_id.as_str());
    let final_of = |id: NodeId| -> Option<NodeId> {
        match resolved.get(graph.node(id).external_id.as_str()) {
            Some(target) => graph.lookup(target).filter(|&t| !is_redirect(t)),
            None => Some(id),
        }
    };

    let root = final_of(graph.root())
        .ok_or_else(|| Error::MissingRoot(graph.node(graph.root()).external_id.clone()))?;

    let mut new_id = vec![None; graph.len()];
    let mut nodes = Vec::new();
    for (id, node) in graph.nodes().iter().enumerate() {
        if is_redirect(id) {
            report.removed_nodes += 1;
        } else {
            new_id[id] = Some(nodes.len());
            nodes.push(node.clone());
        }
    }

    let mut edges = Vec::with_capacity(graph.num_edges());
    for (u, v) in graph.edges() {
        let target = final_of(v);
        match (new_id[u], target.and_then(|t| new_id[t])) {
            (Some(nu), Some(nv)) if nu != nv => {
                if target != Some(v) {
                    report.rewritten_edges += 1;
                }
                edges.push((nu, nv));
            }
            _ => report.dropped_edges += 1,
        }
    }
    let root = new_id[root].expect("root is not a redirect");
    Ok((DocumentGraph::new(nodes, edges, root)?, report))
}

/// Keeps only the nodes reachable from the root along directed edges.
pub fn extract_root_component(graph: &DocumentGraph) -> (DocumentGraph, ComponentReport) {
    let n = graph.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([graph.root()]);
    seen[graph.root()] = true;
    while let Some(u) = queue.pop_front() {
        for &v in graph.successors(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    let kept = seen.iter().filter(|&&s| s).count();
    let report = ComponentReport {
        kept,
        dropped: n - kept,
    };
    if kept == n {
        return (graph.clone(), report);
    }
    let mut new_id = vec![usize::MAX; n];
    let mut nodes = Vec::with_capacity(kept);
    for (id, node) in graph.nodes().iter().enumerate() {
        if seen[id] {
            new_id[id] = nodes.len();
            nodes.push(node.clone());
        }
    }
    let edges = graph
        .edges()
        .filter(|&(u, v)| seen[u] && seen[v])
        .map(|(u, v)| (new_id[u], new_id[v]));
    let g = DocumentGraph::new(nodes, edges, new_id[graph.root()])
        .expect("subgraph of a valid graph is valid");
    (g, report)
}
