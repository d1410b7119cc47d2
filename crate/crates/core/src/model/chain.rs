use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::export::top_words;
use super::{GibbsConfig, Hyperparameters, SamplerState};
use crate::corpus::DocumentGraph;
use crate::{NodeId, Result, WordId};

/// One hierarchy collected from the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSample {
    /// 1-based sweep index at which the sample was taken.
    pub iteration: usize,
    pub log_likelihood: f64,
    pub average_depth: f64,
    pub parent: Vec<Option<NodeId>>,
    /// Per node, most frequent `(word, count)` pairs.
    pub top_words: Vec<Vec<(WordId, u32)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<Vec<u16>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub iteration: usize,
    pub log_likelihood: f64,
    pub avg_depth: f64,
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub samples: Vec<ChainSample>,
    pub diagnostics: Vec<DiagnosticRecord>,
    pub final_state: SamplerState,
}

/// A sampler that can advance its state by one full sweep.
pub trait Sweep {
    fn sweep(&mut self) -> Result<()>;
    fn state(&self) -> &SamplerState;

    fn log_likelihood(&self) -> f64 {
        self.state().log_likelihood()
    }
}

/// Serial collapsed Gibbs sampler driven by one seeded generator.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    state: SamplerState,
    rng: ChaCha8Rng,
}

impl GibbsSampler {
    /// Seeds the generator and draws the initial state from it.
    pub fn new(
        graph: Arc<DocumentGraph>,
        vocab_size: usize,
        hp: Hyperparameters,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = SamplerState::init(graph, vocab_size, hp, &mut rng)?;
        Ok(Self { state, rng })
    }

    pub fn from_parts(state: SamplerState, rng: ChaCha8Rng) -> Self {
        Self { state, rng }
    }

    pub fn into_parts(self) -> (SamplerState, ChaCha8Rng) {
        (self.state, self.rng)
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }

    pub fn state_mut(&mut self) -> &mut SamplerState {
        &mut self.state
    }

    /// Path step for every non-root document in ascending id order. Returns
    /// the number of documents that changed parent.
    pub fn sweep_paths(&mut self) -> usize {
        let root = self.state.hierarchy.root();
        let mut moves = 0;
        for d in 0..self.state.graph.len() {
            if d != root {
                let draw = self.state.sample_path(d, &mut self.rng);
                moves += (draw.chosen != draw.previous) as usize;
            }
        }
        moves
    }

    /// Level step for every token, document-major.
    pub fn sweep_levels(&mut self) {
        for d in 0..self.state.graph.len() {
            self.state.sample_doc_levels(d, &mut self.rng);
        }
    }
}

impl Sweep for GibbsSampler {
    fn sweep(&mut self) -> Result<()> {
        self.sweep_paths();
        self.sweep_levels();
        Ok(())
    }

    fn state(&self) -> &SamplerState {
        &self.state
    }
}

pub(crate) fn collect_sample(
    state: &SamplerState,
    iteration: usize,
    log_likelihood: f64,
    config: &GibbsConfig,
) -> ChainSample {
    let h = state.hierarchy();
    ChainSample {
        iteration,
        log_likelihood,
        average_depth: h.average_depth(),
        parent: h.parents().to_vec(),
        top_words: (0..h.len())
            .map(|v| top_words(state.counts(), v, config.top_words))
            .collect(),
        levels: config.keep_levels.then(|| state.all_levels().to_vec()),
    }
}

/// Runs `config.iterations` sweeps of any sampler, recording one diagnostic
/// per sweep and collecting samples on the configured schedule.
///
/// `on_sweep` sees every diagnostic as it is produced.
pub fn run_chain<S: Sweep>(
    sampler: &mut S,
    config: &GibbsConfig,
    mut on_sweep: impl FnMut(&DiagnosticRecord, Option<&ChainSample>),
) -> Result<(Vec<ChainSample>, Vec<DiagnosticRecord>)> {
    config.validate()?;
    let mut samples = Vec::with_capacity(config.expected_samples());
    let mut diagnostics = Vec::with_capacity(config.iterations);
    for t in 1..=config.iterations {
        sampler.sweep()?;
        let state = sampler.state();
        let ll = sampler.log_likelihood();
        let record = DiagnosticRecord {
            iteration: t,
            log_likelihood: ll,
            avg_depth: state.hierarchy().average_depth(),
        };
        let sample = config.collects(t).then(|| collect_sample(state, t, ll, config));
        on_sweep(&record, sample.as_ref());
        diagnostics.push(record);
        samples.extend(sample);
    }
    Ok((samples, diagnostics))
}

/// Serial chain from a fresh state seeded with `config.seed`.
pub fn run_gibbs(
    graph: Arc<DocumentGraph>,
    vocab_size: usize,
    hp: Hyperparameters,
    config: &GibbsConfig,
) -> Result<ChainOutput> {
    config.validate()?;
    let mut sampler = GibbsSampler::new(graph, vocab_size, hp, config.seed)?;
    let (samples, diagnostics) = run_chain(&mut sampler, config, |_, _| {})?;
    Ok(ChainOutput {
        samples,
        diagnostics,
        final_state: sampler.state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NodeRecord;

    fn small_graph() -> Arc<DocumentGraph> {
        let nodes = vec![
            NodeRecord::new("r", vec![0, 1, 2, 0]),
            NodeRecord::new("a", vec![1, 1, 3]),
            NodeRecord::new("b", vec![2, 2, 0]),
            NodeRecord::new("c", vec![3, 3, 1, 2]),
            NodeRecord::new("d", vec![0, 3]),
        ];
        let edges = [(0, 1), (0, 2), (1, 3), (2, 3), (0, 3), (3, 4), (1, 4)];
        Arc::new(DocumentGraph::new(nodes, edges, 0).unwrap())
    }

    #[test]
    fn one_iteration_one_sample() {
        let cfg = GibbsConfig::new(1, 0, 1, 7).unwrap();
        let out = run_gibbs(small_graph(), 4, Hyperparameters::default(), &cfg).unwrap();
        assert_eq!(out.samples.len(), 1);
        assert_eq!(out.diagnostics.len(), 1);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let cfg = GibbsConfig::new(30, 10, 5, 42).unwrap();
        let a = run_gibbs(small_graph(), 4, Hyperparameters::default(), &cfg).unwrap();
        let b = run_gibbs(small_graph(), 4, Hyperparameters::default(), &cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.diagnostics, b.diagnostics);
        assert_eq!(a.samples.len(), 4);
    }

    #[test]
    fn sweeps_preserve_invariants() {
        let mut s = GibbsSampler::new(small_graph(), 4, Hyperparameters::with_gamma(0.3).unwrap(), 3)
            .unwrap();
        for _ in 0..50 {
            s.sweep().unwrap();
            s.state().check_invariants().unwrap();
            let ll = s.log_likelihood();
            assert!(ll.is_finite() && ll <= 0.0);
        }
    }
}
