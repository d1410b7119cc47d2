use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::DocumentGraph;
use crate::model::Hierarchy;
use crate::{Error, Result};

/// Graph over external ids, compared as undirected.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl SimpleGraph {
    /// Edge endpoints are added to the node set.
    pub fn new<I, J, S>(nodes: I, edges: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut g = Self {
            nodes: nodes.into_iter().map(Into::into).collect(),
            edges: BTreeSet::new(),
        };
        for (u, v) in edges {
            let (u, v) = (u.into(), v.into());
            g.nodes.insert(u.clone());
            g.nodes.insert(v.clone());
            g.edges.insert((u, v));
        }
        g
    }

    /// Tree edges of `hierarchy`, labelled by the external ids of `graph`.
    pub fn from_hierarchy(hierarchy: &Hierarchy, graph: &DocumentGraph) -> Self {
        let id = |v| graph.node(v).external_id.clone();
        Self::new(
            (0..hierarchy.len()).map(id),
            (0..hierarchy.len()).filter_map(|v| hierarchy.parent(v).map(|p| (id(p), id(v)))),
        )
    }

    pub fn from_document_graph(graph: &DocumentGraph) -> Self {
        let id = |v| graph.node(v).external_id.clone();
        Self::new((0..graph.len()).map(id), graph.edges().map(|(u, v)| (id(u), id(v))))
    }
}

/// Symmetric adjacency lists over a shared node indexing, self-loops dropped.
fn adjacency(g: &SimpleGraph, index: &BTreeMap<&str, usize>) -> Vec<Vec<usize>> {
    let mut adj = vec![BTreeSet::new(); index.len()];
    for (u, v) in &g.edges {
        let (i, j) = (index[u.as_str()], index[v.as_str()]);
        if i != j {
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    adj.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// `y = (I + ε²D − εA) x`.
fn apply(adj: &[Vec<usize>], eps: f64, x: &[f64], y: &mut [f64]) {
    for (i, nb) in adj.iter().enumerate() {
        let s: f64 = nb.iter().map(|&j| x[j]).sum();
        y[i] = (1.0 + eps * eps * nb.len() as f64) * x[i] - eps * s;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients for `(I + ε²D − εA) x = b`. The matrix is symmetric and
/// strictly diagonally dominant for `ε·max_degree < 1`, hence positive definite.
fn solve(adj: &[Vec<usize>], eps: f64, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let stop = rr * 1e-30;
    for _ in 0..(10 * n + 100) {
        if rr <= stop {
            break;
        }
        apply(adj, eps, &p, &mut ap);
        let step = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let next = dot(&r, &r);
        let beta = next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = next;
    }
    x
}

/// Columns of `S = (I + ε²D − εA)^{-1}` summed per seed group, square-rooted
/// after clamping round-off negatives to zero. Node `i` belongs to group
/// `i % groups`.
fn root_affinities(adj: &[Vec<usize>], eps: f64, groups: usize) -> Vec<Vec<f64>> {
    let n = adj.len();
    (0..groups)
        .map(|g| {
            let seed: Vec<f64> = (0..n).map(|i| (i % groups == g) as u8 as f64).collect();
            solve(adj, eps, &seed).into_iter().map(|s| s.max(0.0).sqrt()).collect()
        })
        .collect()
}

/// Similarity `1 / (1 + d)` where `d` is the Matusita distance between the
/// belief-propagation affinity matrices of `a` and `b` on their union node set.
///
/// Both graphs use `ε = 1 / (1 + Δ)` with `Δ` the largest undirected degree in
/// either. `groups` seeds columns jointly (`None`: one column per node).
pub fn graph_similarity(a: &SimpleGraph, b: &SimpleGraph, groups: Option<usize>) -> Result<f64> {
    let union: BTreeSet<&str> = a.nodes.iter().chain(&b.nodes).map(String::as_str).collect();
    if union.is_empty() {
        return Err(Error::InvalidParameter("both graphs are empty".into()));
    }
    let index: BTreeMap<&str, usize> = union.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let n = index.len();
    let groups = groups.unwrap_or(n);
    if groups == 0 {
        return Err(Error::InvalidParameter("group count must be positive".into()));
    }
    let groups = groups.min(n);
    let adj_a = adjacency(a, &index);
    let adj_b = adjacency(b, &index);
    let max_degree = adj_a.iter().chain(&adj_b).map(Vec::len).max().unwrap_or(0);
    let eps = 1.0 / (1.0 + max_degree as f64);
    let sa = root_affinities(&adj_a, eps, groups);
    let sb = root_affinities(&adj_b, eps, groups);
    let d2: f64 = sa
        .iter()
        .zip(&sb)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)))
        .sum();
    Ok(1.0 / (1.0 + d2.sqrt()))
}
