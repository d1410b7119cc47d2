//! Synthetic corpora sampled from the model's generative story.
#![allow(dead_code)]

use std::sync::Arc;

use hdtm::corpus::{DocumentGraph, NodeRecord};
use hdtm::NodeId;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

/// A generated corpus together with the tree that produced it.
pub struct Planted {
    pub graph: Arc<DocumentGraph>,
    pub vocab_size: usize,
    pub parents: Vec<Option<NodeId>>,
}

#[derive(Debug, Clone)]
pub struct PlantSpec {
    pub nodes: usize,
    pub tokens_per_doc: usize,
    /// Words owned by each node's topic.
    pub words_per_topic: usize,
    /// Probability mass of a topic on its own words; the rest is spread
    /// uniformly over the vocabulary.
    pub purity: f64,
    /// Dirichlet concentration of the per-document level proportions.
    pub alpha: f64,
    /// Graph edges beyond the planted tree.
    pub extra_edges: usize,
    /// Upper bound on node depth in the planted tree.
    pub max_depth: usize,
}

impl Default for PlantSpec {
    fn default() -> Self {
        Self {
            nodes: 50,
            tokens_per_doc: 200,
            words_per_topic: 10,
            purity: 0.9,
            alpha: 1.0,
            extra_edges: 50,
            max_depth: 6,
        }
    }
}

/// Random recursive tree: node `i` picks a parent uniformly among earlier
/// nodes whose depth is below `max_depth`.
pub fn random_tree(n: usize, max_depth: usize, rng: &mut impl Rng) -> Vec<Option<NodeId>> {
    let mut parents = vec![None; n];
    let mut depth = vec![0usize; n];
    for i in 1..n {
        let eligible: Vec<usize> = (0..i).filter(|&u| depth[u] < max_depth).collect();
        let p = eligible[rng.random_range(0..eligible.len())];
        parents[i] = Some(p);
        depth[i] = depth[p] + 1;
    }
    parents
}

fn path_of(parents: &[Option<NodeId>], v: NodeId) -> Vec<NodeId> {
    let mut p = vec![v];
    let mut cur = v;
    while let Some(u) = parents[cur] {
        p.push(u);
        cur = u;
    }
    p.reverse();
    p
}

/// Samples a corpus: each node's topic concentrates on its own block of
/// words, each document mixes the topics on its planted root path, and the
/// graph holds the tree edges plus random distractor edges (never into the
/// root).
pub fn plant(spec: &PlantSpec, seed: u64) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.nodes;
    let parents = random_tree(n, spec.max_depth, &mut rng);
    let vocab = n * spec.words_per_topic;

    let mut nodes = Vec::with_capacity(n);
    for d in 0..n {
        let path = path_of(&parents, d);
        let theta: Vec<f64> = if path.len() == 1 {
            vec![1.0]
        } else {
            let gamma = Gamma::new(spec.alpha, 1.0).unwrap();
            let g: Vec<f64> = path.iter().map(|_| gamma.sample(&mut rng)).collect();
            let total: f64 = g.iter().sum();
            g.into_iter().map(|x| x / total).collect()
        };
        let tokens = (0..spec.tokens_per_doc)
            .map(|_| {
                let level = pick(&theta, &mut rng);
                let topic = path[level];
                if rng.random::<f64>() < spec.purity {
                    (topic * spec.words_per_topic + rng.random_range(0..spec.words_per_topic))
                        as u32
                } else {
                    rng.random_range(0..vocab) as u32
                }
            })
            .collect();
        nodes.push(NodeRecord::new(format!("d{d:04}"), tokens));
    }

    let edges = with_extra_edges(&parents, spec.extra_edges, &mut rng);
    Planted {
        graph: Arc::new(DocumentGraph::new(nodes, edges, 0).unwrap()),
        vocab_size: vocab,
        parents,
    }
}

/// Tree edges plus up to `extra` distinct random edges (never into the root),
/// shuffled.
fn with_extra_edges(parents: &[Option<NodeId>], extra: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let n = parents.len();
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (parents[v].unwrap(), v)).collect();
    let available = (n.saturating_sub(1) * n.saturating_sub(1)).saturating_sub(edges.len());
    let target = edges.len() + extra.min(available);
    while edges.len() < target {
        let u = rng.random_range(0..n);
        let v = rng.random_range(1..n);
        if u != v && !edges.contains(&(u, v)) {
            edges.push((u, v));
        }
    }
    edges.shuffle(rng);
    edges
}

fn pick(p: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// Random document graph without a planted structure: a random tree plus
/// extra edges, `tokens` uniform words from `0..vocab` per document.
pub fn random_graph(n: usize, extra_edges: usize, tokens: usize, vocab: usize, seed: u64) -> Arc<DocumentGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parents = random_tree(n, n, &mut rng);
    let nodes = (0..n)
        .map(|d| {
            let words = (0..tokens).map(|_| rng.random_range(0..vocab) as u32).collect();
            NodeRecord::new(format!("d{d:04}"), words)
        })
        .collect();
    let edges = with_extra_edges(&parents, extra_edges, &mut rng);
    Arc::new(DocumentGraph::new(nodes, edges, 0).unwrap())
}
