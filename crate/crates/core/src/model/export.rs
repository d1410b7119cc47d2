use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChainSample, CountTables, DiagnosticRecord, Hierarchy, SamplerState};
use crate::corpus::{DocumentGraph, Vocabulary};
use crate::{Error, NodeId, Result, WordId};

/// The `m` most frequent words of node `v`, by count descending then word id.
pub fn top_words(counts: &CountTables, v: NodeId, m: usize) -> Vec<(WordId, u32)> {
    let mut words: Vec<(WordId, u32)> = counts.node_words(v).collect();
    words.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    words.truncate(m);
    words
}

/// CSV with header `iteration,log_likelihood,avg_depth`. Floats use the
/// shortest representation that round-trips exactly.
pub fn diagnostics_csv(records: &[DiagnosticRecord]) -> String {
    let mut out = String::from("iteration,log_likelihood,avg_depth\n");
    for r in records {
        writeln!(out, "{},{},{}", r.iteration, r.log_likelihood, r.avg_depth).unwrap();
    }
    out
}

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticRecord]) -> Result<()> {
    std::fs::write(path, diagnostics_csv(records)).map_err(|e| Error::io(path, e))
}

/// On-disk form of one collected sample. `top_words` is keyed by external
/// node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFile {
    pub iteration: usize,
    pub log_likelihood: f64,
    pub parent: Vec<Option<NodeId>>,
    pub top_words: BTreeMap<String, Vec<(String, u32)>>,
}

impl SampleFile {
    pub fn new(sample: &ChainSample, graph: &DocumentGraph, vocab: &Vocabulary) -> Self {
        let top_words = sample
            .top_words
            .iter()
            .enumerate()
            .map(|(v, words)| {
                let named = words
                    .iter()
                    .map(|&(w, c)| (word_name(vocab, w), c))
                    .collect();
                (graph.node(v).external_id.clone(), named)
            })
            .collect();
        Self {
            iteration: sample.iteration,
            log_likelihood: sample.log_likelihood,
            parent: sample.parent.clone(),
            top_words,
        }
    }

    /// Sample with node-indexed top words, for reloading into evaluation.
    pub fn to_sample(&self, graph: &DocumentGraph, vocab: &Vocabulary) -> ChainSample {
        let mut top = vec![Vec::new(); graph.len()];
        for (id, words) in &self.top_words {
            if let Some(v) = graph.lookup(id) {
                top[v] = words
                    .iter()
                    .filter_map(|(w, c)| vocab.id(w).map(|w| (w, *c)))
                    .collect();
            }
        }
        let h = Hierarchy::from_parents(graph.root(), self.parent.clone()).ok();
        ChainSample {
            iteration: self.iteration,
            log_likelihood: self.log_likelihood,
            average_depth: h.map_or(0.0, |h| h.average_depth()),
            parent: self.parent.clone(),
            top_words: top,
            levels: None,
        }
    }
}

fn word_name(vocab: &Vocabulary, w: WordId) -> String {
    vocab.word(w).map_or_else(|| format!("#{w}"), str::to_owned)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopWord {
    pub word: String,
    pub count: u32,
    /// Smoothed probability `(count + eta) / (total + W * eta)`.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapNode {
    pub id: String,
    pub title: String,
    pub parent: Option<NodeId>,
    pub depth: usize,
    pub top_words: Vec<TopWord>,
}

/// MAP hierarchy with the leading words of every node's topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapExport {
    pub root: NodeId,
    pub parent: Vec<Option<NodeId>>,
    pub nodes: Vec<MapNode>,
}

impl MapExport {
    /// `state` must already carry the MAP hierarchy; its counts provide the
    /// topic words.
    pub fn new(state: &SamplerState, vocab: &Vocabulary, m: usize) -> Self {
        let h = state.hierarchy();
        let g = state.graph();
        let eta = state.hyperparameters().eta;
        let w_eta = state.vocab_size() as f64 * eta;
        let nodes = (0..h.len())
            .map(|v| {
                let total = state.counts().total(v) as f64;
                MapNode {
                    id: g.node(v).external_id.clone(),
                    title: g.node(v).title.clone(),
                    parent: h.parent(v),
                    depth: h.depth(v),
                    top_words: top_words(state.counts(), v, m)
                        .into_iter()
                        .map(|(w, c)| TopWord {
                            word: word_name(vocab, w),
                            count: c,
                            probability: (c as f64 + eta) / (total + w_eta),
                        })
                        .collect(),
                }
            })
            .collect();
        Self {
            root: h.root(),
            parent: h.parents().to_vec(),
            nodes,
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph hierarchy {\n  node [shape=box];\n");
        for (v, n) in self.nodes.iter().enumerate() {
            let words: Vec<&str> = n.top_words.iter().map(|t| t.word.as_str()).collect();
            let label = format!("{}\\n{}", escape(&n.title), escape(&words.join(" ")));
            writeln!(out, "  n{v} [label=\"{label}\"];").unwrap();
        }
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                writeln!(out, "  n{p} -> n{v};").unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

/// DOT rendering of a bare hierarchy labelled with node titles.
pub fn hierarchy_dot(hierarchy: &Hierarchy, graph: &DocumentGraph) -> String {
    let mut out = String::from("digraph hierarchy {\n");
    for v in 0..hierarchy.len() {
        writeln!(out, "  n{v} [label=\"{}\"];", escape(&graph.node(v).title)).unwrap();
    }
    for (v, p) in hierarchy.parents().iter().enumerate() {
        if let Some(p) = p {
            writeln!(out, "  n{p} -> n{v};").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_words_order() {
        let mut c = CountTables::new(1);
        for w in [5, 5, 2, 2, 9, 9, 9, 1] {
            c.increment(0, w);
        }
        assert_eq!(top_words(&c, 0, 3), vec![(9, 3), (2, 2), (5, 2)]);
    }

    #[test]
    fn csv_round_trips_floats() {
        let r = DiagnosticRecord {
            iteration: 3,
            log_likelihood: -1234.000000000001,
            avg_depth: 1.0 / 3.0,
        };
        let csv = diagnostics_csv(&[r]);
        let line = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1].parse::<f64>().unwrap(), r.log_likelihood);
        assert_eq!(fields[2].parse::<f64>().unwrap(), r.avg_depth);
        assert!(csv.starts_with("iteration,log_likelihood,avg_depth\n"));
    }
}
