use rustc_hash::FxHashMap;

use crate::{Error, NodeId, Result, WordId};

/// Collapsed sufficient statistics of the sampler.
///
/// `node_word[v][w]` counts tokens of word `w` assigned to node `v`'s topic,
/// `node_total[v]` is their sum, and `doc_levels[d][k]` counts document `d`'s
/// tokens at level `k` of its path. Zero entries are removed so that two
/// tables with the same tallies compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTables {
    node_word: Vec<FxHashMap<WordId, u32>>,
    node_total: Vec<u64>,
    doc_levels: Vec<Vec<u32>>,
}

impl CountTables {
    pub fn new(nodes: usize) -> Self {
        Self {
            node_word: vec![FxHashMap::default(); nodes],
            node_total: vec![0; nodes],
            doc_levels: vec![Vec::new(); nodes],
        }
    }

    #[inline]
    pub fn get(&self, v: NodeId, w: WordId) -> u32 {
        self.node_word[v].get(&w).copied().unwrap_or(0)
    }

    #[inline]
    pub fn total(&self, v: NodeId) -> u64 {
        self.node_total[v]
    }

    /// Non-zero `(word, count)` entries of node `v`, in arbitrary order.
    pub fn node_words(&self, v: NodeId) -> impl Iterator<Item = (WordId, u32)> + '_ {
        self.node_word[v].iter().map(|(&w, &c)| (w, c))
    }

    pub fn doc_levels(&self, d: NodeId) -> &[u32] {
        &self.doc_levels[d]
    }

    pub(crate) fn doc_levels_mut(&mut self, d: NodeId) -> &mut Vec<u32> {
        &mut self.doc_levels[d]
    }

    pub fn num_nodes(&self) -> usize {
        self.node_total.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.node_total.iter().sum()
    }

    #[inline]
    pub fn increment(&mut self, v: NodeId, w: WordId) {
        *self.node_word[v].entry(w).or_insert(0) += 1;
        self.node_total[v] += 1;
    }

    /// Panics if the count is already zero; the sampler only removes tokens
    /// it previously added.
    #[inline]
    pub fn decrement(&mut self, v: NodeId, w: WordId) {
        let slot = self
            .node_word[v]
            .get_mut(&w)
            .unwrap_or_else(|| panic!("decrement of empty count ({v}, {w})"));
        *slot -= 1;
        if *slot == 0 {
            self.node_word[v].remove(&w);
        }
        self.node_total[v] -= 1;
    }

    /// Applies per-node batches of signed changes, one node per task.
    /// `deltas[v]` is the batch addressed to node `v`. Fails without partial
    /// effects on the offending node if any count would become negative.
    pub(crate) fn apply_node_deltas(&mut self, deltas: &[Vec<(WordId, i64)>]) -> Result<()> {
        use rayon::prelude::*;
        assert_eq!(deltas.len(), self.node_word.len());
        self.node_word
            .par_iter_mut()
            .zip(self.node_total.par_iter_mut())
            .zip(deltas.par_iter())
            .enumerate()
            .try_for_each(|(v, ((words, total), batch))| {
                let mut sorted = batch.clone();
                sorted.sort_unstable_by_key(|&(w, _)| w);
                let mut updates: Vec<(WordId, i64)> = Vec::with_capacity(sorted.len());
                let mut next_total = *total as i64;
                for (w, d) in sorted {
                    next_total += d;
                    match updates.last_mut() {
                        Some(u) if u.0 == w => u.1 += d,
                        _ => updates.push((w, words.get(&w).copied().unwrap_or(0) as i64 + d)),
                    }
                }
                if next_total < 0 || updates.iter().any(|&(_, c)| c < 0) {
                    return Err(Error::NegativeCount { node: v });
                }
                for (w, c) in updates {
                    if c == 0 {
                        words.remove(&w);
                    } else {
                        words.insert(w, c as u32);
                    }
                }
                *total = next_total as u64;
                Ok(())
            })
    }

    /// Applies a signed change, refusing to go below zero.
    pub fn apply_delta(&mut self, v: NodeId, w: WordId, delta: i64) -> Result<()> {
        if delta == 0 {
            return Ok(());
        }
        let cur = self.get(v, w) as i64;
        let next = cur + delta;
        if next < 0 || (self.node_total[v] as i64) + delta < 0 {
            return Err(Error::NegativeCount { node: v });
        }
        if next == 0 {
            self.node_word[v].remove(&w);
        } else {
            self.node_word[v].insert(w, next as u32);
        }
        self.node_total[v] = (self.node_total[v] as i64 + delta) as u64;
        Ok(())
    }
}
