use std::collections::BTreeMap;

use crate::corpus::DocumentGraph;
use crate::model::Hierarchy;
use crate::{Error, NodeId, Result, WordId};

/// Term frequencies after mixing each document with its children.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagated {
    pub alpha: f64,
    /// `freqs[d][w]`: adjusted frequency of `w` in `d`; zeros are omitted.
    pub freqs: Vec<BTreeMap<WordId, f64>>,
    /// `lengths[d]`: sum of `freqs[d]`.
    pub lengths: Vec<f64>,
}

fn raw_counts(tokens: &[WordId]) -> BTreeMap<WordId, f64> {
    let mut m = BTreeMap::new();
    for &w in tokens {
        *m.entry(w).or_insert(0.0) += 1.0;
    }
    m
}

/// `f'(w;d) = (1+α) f(w;d) + (1−α)/|Ch(d)| · Σ_{c ∈ Ch(d)} f(w;c)`, where `f`
/// is the unpropagated count and `Ch(d)` the children of `d` in `sitemap`.
/// Leaves keep `(1+α) f`. The adjusted length is `Σ_w f'(w;d)`.
///
/// `alpha` must lie in `[-1, 1]` so every weight is non-negative.
pub fn term_propagation(graph: &DocumentGraph, sitemap: &Hierarchy, alpha: f64) -> Result<Propagated> {
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [-1, 1], got {alpha}")));
    }
    if sitemap.len() != graph.len() {
        return Err(Error::InvalidParameter("hierarchy does not match the graph".into()));
    }
    let raw: Vec<BTreeMap<WordId, f64>> = (0..graph.len()).map(|d| raw_counts(graph.tokens(d))).collect();
    let freqs: Vec<BTreeMap<WordId, f64>> = (0..graph.len())
        .map(|d| {
            let mut f: BTreeMap<WordId, f64> = raw[d].iter().map(|(&w, &c)| (w, (1.0 + alpha) * c)).collect();
            let children = sitemap.children(d);
            if !children.is_empty() && alpha < 1.0 {
                let share = (1.0 - alpha) / children.len() as f64;
                for &c in children {
                    for (&w, &n) in &raw[c] {
                        *f.entry(w).or_insert(0.0) += share * n;
                    }
                }
            }
            f.retain(|_, v| *v > 0.0);
            f
        })
        .collect();
    let lengths = freqs.iter().map(|f| f.values().sum()).collect();
    Ok(Propagated { alpha, freqs, lengths })
}

/// Dirichlet-smoothed word distributions over propagated frequencies:
/// `p(w;d) = (f'(w;d) + μ p(w|C)) / (|d|' + μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub mu: f64,
    /// Corpus-wide term distribution `p(w|C)`, dense over the vocabulary.
    pub background: Vec<f64>,
    pub propagated: Propagated,
}

/// `background` is the relative frequency of each word over all tokens of
/// `graph`; `vocab_size` bounds the word ids.
pub fn dirichlet_smooth(
    propagated: Propagated,
    graph: &DocumentGraph,
    vocab_size: usize,
    mu: f64,
) -> Result<Smoothed> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    let mut background = vec![0.0; vocab_size];
    let mut total = 0usize;
    for d in 0..graph.len() {
        for &w in graph.tokens(d) {
            let slot = background
                .get_mut(w as usize)
                .ok_or_else(|| Error::InvalidParameter(format!("word {w} outside vocabulary")))?;
            *slot += 1.0;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::InvalidParameter("corpus has no tokens".into()));
    }
    for p in &mut background {
        *p /= total as f64;
    }
    Ok(Smoothed {
        mu,
        background,
        propagated,
    })
}

impl Smoothed {
    pub fn prob(&self, d: NodeId, w: WordId) -> f64 {
        let f = self.propagated.freqs[d].get(&w).copied().unwrap_or(0.0);
        (f + self.mu * self.background[w as usize]) / (self.propagated.lengths[d] + self.mu)
    }

    /// Dense distribution of `d` over the vocabulary.
    pub fn distribution(&self, d: NodeId) -> Vec<f64> {
        let denom = self.propagated.lengths[d] + self.mu;
        let mut p: Vec<f64> = self.background.iter().map(|b| self.mu * b).collect();
        for (&w, &f) in &self.propagated.freqs[d] {
            p[w as usize] += f;
        }
        p.iter_mut().for_each(|x| *x /= denom);
        p
    }

    /// The `k` most probable words of `d`, ties by ascending id.
    pub fn top_words(&self, d: NodeId, k: usize) -> Vec<(WordId, f64)> {
        let mut p: Vec<(WordId, f64)> = self
            .distribution(d)
            .into_iter()
            .enumerate()
            .map(|(w, p)| (w as WordId, p))
            .collect();
        p.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        p.truncate(k);
        p
    }
}
