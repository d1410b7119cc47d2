use std::sync::Arc;

use rand::Rng;

use super::{CountTables, Hierarchy, Hyperparameters};
use crate::corpus::DocumentGraph;
use crate::special::LnGammaTable;
use crate::{Error, NodeId, Result, WordId};

/// Precomputed `ln Γ` tables shared by every copy of a state.
#[derive(Debug)]
pub(crate) struct LogTables {
    /// `ln Γ(n + η)`
    pub eta: LnGammaTable,
    /// `ln Γ(n + Wη)`
    pub w_eta: LnGammaTable,
    /// `ln Γ(n + 1) = ln n!`
    pub fact: LnGammaTable,
}

impl LogTables {
    fn new(graph: &DocumentGraph, vocab_size: usize, eta: f64) -> Self {
        let total = graph.total_tokens();
        let max_doc = graph.nodes().iter().map(|n| n.tokens.len()).max().unwrap_or(0);
        Self {
            eta: LnGammaTable::new(eta, total + 1),
            w_eta: LnGammaTable::new(vocab_size as f64 * eta, total + 1),
            fact: LnGammaTable::new(1.0, max_doc + graph.len() + 1),
        }
    }
}

/// Complete state of the collapsed sampler: hierarchy, per-token levels and
/// the count tables they imply.
///
/// Levels are 0-based indices into the document's root path: level 0 is the
/// root and level `depth(d)` is the document itself.
#[derive(Debug, Clone)]
pub struct SamplerState {
    pub(crate) graph: Arc<DocumentGraph>,
    pub(crate) hp: Hyperparameters,
    pub(crate) vocab_size: usize,
    pub(crate) hierarchy: Hierarchy,
    pub(crate) levels: Vec<Vec<u16>>,
    pub(crate) counts: CountTables,
    pub(crate) tables: Arc<LogTables>,
}

fn check_inputs(graph: &DocumentGraph, vocab_size: usize, hp: &Hyperparameters) -> Result<()> {
    hp.validate()?;
    if let Some(max) = graph.max_word_id() {
        if max as usize >= vocab_size {
            return Err(Error::InvalidParameter(format!(
                "word id {max} outside vocabulary of size {vocab_size}"
            )));
        }
    }
    if !graph.is_rooted_connected() {
        return Err(Error::InvalidParameter(
            "graph has nodes unreachable from the root".into(),
        ));
    }
    Ok(())
}

impl SamplerState {
    /// Initial state: breadth-first hierarchy, each token's level uniform over
    /// its document's path. Randomness is drawn document by document in id
    /// order.
    pub fn init<R: Rng + ?Sized>(
        graph: Arc<DocumentGraph>,
        vocab_size: usize,
        hp: Hyperparameters,
        rng: &mut R,
    ) -> Result<Self> {
        check_inputs(&graph, vocab_size, &hp)?;
        let hierarchy = Hierarchy::bfs(&graph)?;
        let levels = (0..graph.len())
            .map(|d| {
                let depth = hierarchy.depth(d);
                graph
                    .tokens(d)
                    .iter()
                    .map(|_| {
                        if depth == 0 {
                            0
                        } else {
                            rng.random_range(0..=depth) as u16
                        }
                    })
                    .collect()
            })
            .collect();
        Self::assemble(graph, vocab_size, hp, hierarchy, levels)
    }

    /// Rebuilds a state from a hierarchy and level assignments, recounting all
    /// tables.
    pub fn from_parts(
        graph: Arc<DocumentGraph>,
        vocab_size: usize,
        hp: Hyperparameters,
        hierarchy: Hierarchy,
        levels: Vec<Vec<u16>>,
    ) -> Result<Self> {
        check_inputs(&graph, vocab_size, &hp)?;
        hierarchy.validate(&graph)?;
        if levels.len() != graph.len() {
            return Err(Error::Invariant("level array length mismatch".into()));
        }
        for (d, ls) in levels.iter().enumerate() {
            if ls.len() != graph.tokens(d).len() {
                return Err(Error::Invariant(format!("level count mismatch for {d}")));
            }
            if ls.iter().any(|&l| l as usize > hierarchy.depth(d)) {
                return Err(Error::Invariant(format!("level out of range in {d}")));
            }
        }
        Self::assemble(graph, vocab_size, hp, hierarchy, levels)
    }

    fn assemble(
        graph: Arc<DocumentGraph>,
        vocab_size: usize,
        hp: Hyperparameters,
        hierarchy: Hierarchy,
        levels: Vec<Vec<u16>>,
    ) -> Result<Self> {
        let tables = Arc::new(LogTables::new(&graph, vocab_size, hp.eta));
        let mut state = Self {
            graph,
            hp,
            vocab_size,
            hierarchy,
            levels,
            counts: CountTables::new(0),
            tables,
        };
        state.counts = state.recount();
        Ok(state)
    }

    pub fn graph(&self) -> &DocumentGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> &Arc<DocumentGraph> {
        &self.graph
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hp
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    pub fn levels(&self, d: NodeId) -> &[u16] {
        &self.levels[d]
    }

    pub fn all_levels(&self) -> &[Vec<u16>] {
        &self.levels
    }

    pub fn counts(&self) -> &CountTables {
        &self.counts
    }

    /// Node whose topic generated token `n` of document `d`.
    pub fn token_node(&self, d: NodeId, n: usize) -> NodeId {
        let mut v = d;
        for _ in 0..(self.hierarchy.depth(d) - self.levels[d][n] as usize) {
            v = self.hierarchy.parent(v).expect("level within path");
        }
        v
    }

    /// Count tables recomputed from scratch from the hierarchy and levels.
    pub fn recount(&self) -> CountTables {
        let n = self.graph.len();
        let mut counts = CountTables::new(n);
        let mut path = Vec::new();
        for d in 0..n {
            self.hierarchy.path_into(d, &mut path);
            for (&w, &l) in self.graph.tokens(d).iter().zip(&self.levels[d]) {
                counts.increment(path[l as usize], w);
            }
            *counts.doc_levels_mut(d) = level_histogram(&self.levels[d], path.len());
        }
        counts
    }

    /// Tree invariant, hierarchy ⊆ graph, level bounds and exact count
    /// consistency.
    pub fn check_invariants(&self) -> Result<()> {
        self.hierarchy.validate(&self.graph)?;
        for d in 0..self.graph.len() {
            let depth = self.hierarchy.depth(d);
            if self.levels[d].iter().any(|&l| l as usize > depth) {
                return Err(Error::Invariant(format!("level bound violated in {d}")));
            }
        }
        if self.counts.total_tokens() != self.graph.total_tokens() as u64 {
            return Err(Error::Invariant("token count not conserved".into()));
        }
        if self.counts != self.recount() {
            return Err(Error::Invariant("count tables disagree with a recount".into()));
        }
        Ok(())
    }

    pub(crate) fn word_count(&self, v: NodeId, w: WordId) -> u32 {
        self.counts.get(v, w)
    }
}

/// Tokens per level for a path with `levels` entries.
pub(crate) fn level_histogram(levels: &[u16], path_len: usize) -> Vec<u32> {
    let mut h = vec![0u32; path_len];
    for &l in levels {
        h[l as usize] += 1;
    }
    h
}
