use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::checkpoint::Checkpoint;
use super::messages::{route_messages, Barrier, Phase, VertexMessage};
use super::{distributed_rwr, owner};
use crate::corpus::DocumentGraph;
use crate::model::{Hierarchy, Hyperparameters, SamplerState, Sweep};
use crate::{Error, NodeId, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelConfig {
    pub workers: usize,
    /// Write a checkpoint once every this many barriers (at the end of the
    /// iteration in which the count is reached).
    pub checkpoint_every: u64,
    pub checkpoint_dir: Option<PathBuf>,
    /// Attempts per iteration before a worker failure is reported.
    pub max_attempts: usize,
}

impl Default for ParallelConfig {
    fn default() -> Self {
        Self {
            workers: 1,
            checkpoint_every: 50,
            checkpoint_dir: None,
            max_attempts: 3,
        }
    }
}

impl ParallelConfig {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be >= 1".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::InvalidParameter("checkpoint interval must be >= 1".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidParameter("max attempts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParallelStats {
    pub iterations: usize,
    pub barriers: u64,
    pub moves_applied: u64,
    /// Moves dropped at the global update because they would close a cycle.
    pub moves_rejected: u64,
    pub messages: u64,
    pub retries: u64,
    pub checkpoints: u64,
}

/// Where a worker is about to run; passed to the fault hook.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultSite {
    pub iteration: usize,
    pub worker: usize,
    pub phase: Phase,
    /// 1-based attempt of the current iteration.
    pub attempt: usize,
}

/// Returns `true` to make the worker at the given site fail.
pub type FaultHook = Arc<dyn Fn(&FaultSite) -> bool + Send + Sync>;

/// State visible at a barrier: the global state and every worker's private
/// copy (empty outside the sampling phases).
pub struct BarrierView<'a> {
    pub barrier: Barrier,
    pub global: &'a SamplerState,
    pub workers: &'a [SamplerState],
}

type BarrierHook = Box<dyn FnMut(&BarrierView<'_>) -> Result<()> + Send>;

struct WorkerSlot {
    state: SamplerState,
    rng: ChaCha8Rng,
    /// `(doc, new parent)` in the order the worker made the moves.
    moves: Vec<(NodeId, NodeId)>,
}

/// Parallel sampler over a fixed pool of workers.
pub struct ParallelSampler {
    state: SamplerState,
    rngs: Vec<ChaCha8Rng>,
    docs: Vec<Vec<NodeId>>,
    config: ParallelConfig,
    seed: u64,
    iteration: usize,
    barrier: u64,
    last_checkpoint: u64,
    stats: ParallelStats,
    weights: Option<Vec<f64>>,
    fault: Option<FaultHook>,
    on_barrier: Option<BarrierHook>,
}

impl std::fmt::Debug for ParallelSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParallelSampler")
            .field("config", &self.config)
            .field("iteration", &self.iteration)
            .field("barrier", &self.barrier)
            .field("stats", &self.stats)
            .finish_non_exhaustive()
    }
}

fn worker_rngs(seed: u64, first: ChaCha8Rng, workers: usize) -> Vec<ChaCha8Rng> {
    let mut rngs = vec![first];
    for k in 1..workers {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(k as u64);
        rngs.push(r);
    }
    rngs
}

fn partition(n: usize, workers: usize) -> Vec<Vec<NodeId>> {
    let mut docs = vec![Vec::new(); workers];
    for d in 0..n {
        docs[owner(d, workers)].push(d);
    }
    docs
}

impl ParallelSampler {
    /// Initial state drawn exactly as by the serial sampler with the same
    /// seed; worker 0 continues that stream.
    pub fn new(
        graph: Arc<DocumentGraph>,
        vocab_size: usize,
        hp: Hyperparameters,
        seed: u64,
        config: ParallelConfig,
    ) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = SamplerState::init(graph, vocab_size, hp, &mut rng)?;
        let rngs = worker_rngs(seed, rng, config.workers);
        Ok(Self::assemble(state, rngs, seed, config, 0, 0))
    }

    /// Continues a chain from a checkpoint written with the same worker
    /// count.
    pub fn resume(
        graph: Arc<DocumentGraph>,
        checkpoint: &Checkpoint,
        config: ParallelConfig,
    ) -> Result<Self> {
        config.validate()?;
        if checkpoint.rngs.len() != config.workers {
            return Err(Error::InvalidParameter(format!(
                "checkpoint has {} workers, config has {}",
                checkpoint.rngs.len(),
                config.workers
            )));
        }
        let hierarchy = Hierarchy::from_parents(graph.root(), checkpoint.parent.clone())?;
        let state = SamplerState::from_parts(
            graph,
            checkpoint.vocab_size,
            checkpoint.hyperparameters,
            hierarchy,
            checkpoint.levels.clone(),
        )?;
        let rngs = checkpoint
            .rngs
            .iter()
            .map(|r| r.restore(checkpoint.seed))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(
            state,
            rngs,
            checkpoint.seed,
            config,
            checkpoint.iteration,
            checkpoint.barrier,
        ))
    }

    fn assemble(
        state: SamplerState,
        rngs: Vec<ChaCha8Rng>,
        seed: u64,
        config: ParallelConfig,
        iteration: usize,
        barrier: u64,
    ) -> Self {
        let docs = partition(state.graph().len(), config.workers);
        Self {
            state,
            rngs,
            docs,
            seed,
            iteration,
            barrier,
            last_checkpoint: barrier / config.checkpoint_every,
            config,
            stats: ParallelStats {
                iterations: iteration,
                barriers: barrier,
                ..ParallelStats::default()
            },
            weights: None,
            fault: None,
            on_barrier: None,
        }
    }

    pub fn with_fault_hook(mut self, hook: FaultHook) -> Self {
        self.fault = Some(hook);
        self
    }

    /// Calls `hook` after every barrier; an error aborts the sweep.
    pub fn with_barrier_hook(
        mut self,
        hook: impl FnMut(&BarrierView<'_>) -> Result<()> + Send + 'static,
    ) -> Self {
        self.on_barrier = Some(Box::new(hook));
        self
    }

    pub fn stats(&self) -> &ParallelStats {
        &self.stats
    }

    pub fn config(&self) -> &ParallelConfig {
        &self.config
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn rngs(&self) -> &[ChaCha8Rng] {
        &self.rngs
    }

    pub fn into_state(self) -> SamplerState {
        self.state
    }

    /// Random-walk weights of the current global hierarchy.
    pub fn node_weights(&mut self) -> &[f64] {
        if self.weights.is_none() {
            let gamma = self.state.hyperparameters().gamma;
            self.weights = Some(distributed_rwr(
                self.state.hierarchy(),
                gamma,
                self.config.workers,
            ));
        }
        self.weights.as_deref().expect("just computed")
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(
            self.seed,
            *self.state.hyperparameters(),
            self.state.vocab_size(),
            self.iteration,
            self.barrier,
            self.state.hierarchy().parents().to_vec(),
            self.state.all_levels().to_vec(),
            &self.rngs,
        )
    }

    fn barrier(&mut self, barrier: &mut u64, phase: Phase, workers: &[SamplerState]) -> Result<()> {
        *barrier += 1;
        if let Some(hook) = self.on_barrier.as_mut() {
            let view = BarrierView {
                barrier: Barrier {
                    index: *barrier,
                    iteration: self.iteration + 1,
                    phase,
                },
                global: &self.state,
                workers,
            };
            hook(&view)?;
        }
        Ok(())
    }

    fn run_workers(
        &self,
        slots: &mut [WorkerSlot],
        phase: Phase,
        attempt: usize,
    ) -> std::result::Result<(), usize> {
        let iteration = self.iteration + 1;
        let fault = self.fault.clone();
        let root = self.state.hierarchy().root();
        let failed: Vec<usize> = slots
            .par_iter_mut()
            .zip(self.docs.par_iter())
            .enumerate()
            .filter_map(|(worker, (slot, docs))| {
                let outcome = catch_unwind(AssertUnwindSafe(|| {
                    let site = FaultSite {
                        iteration,
                        worker,
                        phase,
                        attempt,
                    };
                    if fault.as_ref().is_some_and(|f| f(&site)) {
                        panic!("injected fault at {site:?}");
                    }
                    match phase {
                        Phase::PathSample => {
                            for &d in docs.iter().filter(|&&d| d != root) {
                                let draw = slot.state.sample_path(d, &mut slot.rng);
                                if draw.chosen != draw.previous {
                                    slot.moves.push((d, draw.chosen));
                                }
                            }
                        }
                        Phase::LevelSample => {
                            for &d in docs {
                                slot.state.sample_doc_levels(d, &mut slot.rng);
                            }
                        }
                        _ => unreachable!("workers only run sampling phases"),
                    }
                }));
                outcome.is_err().then_some(worker)
            })
            .collect();
        match failed.first() {
            Some(&w) => Err(w),
            None => Ok(()),
        }
    }

    /// One attempt at an iteration. `Ok(None)` signals a worker failure; the
    /// global state is untouched in that case.
    fn attempt(&mut self, attempt: usize) -> Result<Option<()>> {
        let mut barrier = self.barrier;
        self.node_weights();
        self.barrier(&mut barrier, Phase::RwrPropagate, &[])?;

        let mut slots: Vec<WorkerSlot> = self
            .rngs
            .iter()
            .map(|rng| WorkerSlot {
                state: self.state.clone(),
                rng: rng.clone(),
                moves: Vec::new(),
            })
            .collect();
        for phase in [Phase::PathSample, Phase::LevelSample] {
            if self.run_workers(&mut slots, phase, attempt).is_err() {
                return Ok(None);
            }
            let views: Vec<SamplerState> = if self.on_barrier.is_some() {
                slots.iter().map(|s| s.state.clone()).collect()
            } else {
                Vec::new()
            };
            self.barrier(&mut barrier, phase, &views)?;
        }

        self.global_update(&slots)?;
        self.rngs = slots.into_iter().map(|s| s.rng).collect();
        self.weights = None;
        // propagated now so the diagnostic and the next iteration share it
        self.node_weights();
        self.iteration += 1;
        self.barrier(&mut barrier, Phase::PathGlobalUpdate, &[])?;
        self.barrier = barrier;
        self.stats.iterations = self.iteration;
        self.stats.barriers = barrier;
        self.maybe_checkpoint()?;
        Ok(Some(()))
    }

    fn global_update(&mut self, slots: &[WorkerSlot]) -> Result<()> {
        let n = self.state.graph().len();
        let mut path = Vec::new();
        let old_paths: Vec<Vec<NodeId>> = (0..n)
            .map(|d| {
                self.state.hierarchy().path_into(d, &mut path);
                path.clone()
            })
            .collect();

        for slot in slots {
            for &(d, p) in &slot.moves {
                let h = &mut self.state.hierarchy;
                if h.is_ancestor_or_self(d, p) {
                    self.stats.moves_rejected += 1;
                    continue;
                }
                if h.parent(d) != Some(p) {
                    h.detach(d);
                    h.attach(d, p);
                    self.stats.moves_applied += 1;
                }
            }
        }

        let graph = self.state.graph.clone();
        let mut messages = Vec::new();
        let mut local_path = Vec::new();
        let mut new_levels = vec![Vec::new(); n];
        for (k, docs) in self.docs.iter().enumerate() {
            let local = &slots[k].state;
            for &d in docs {
                local.hierarchy().path_into(d, &mut local_path);
                self.state.hierarchy().path_into(d, &mut path);
                let local_depth = local_path.len() - 1;
                let depth = path.len() - 1;
                let mut levels = Vec::with_capacity(local.levels(d).len());
                for (n_tok, (&w, &l)) in graph.tokens(d).iter().zip(local.levels(d)).enumerate() {
                    let l = l as usize;
                    let node = local_path[l];
                    let new_level = match path.iter().position(|&v| v == node) {
                        Some(j) => j,
                        None if l >= local_depth => depth,
                        None => l.min(depth - 1),
                    };
                    levels.push(new_level as u16);
                    let from = old_paths[d][self.state.levels[d][n_tok] as usize];
                    let to = path[new_level];
                    if from != to {
                        messages.push(VertexMessage { target: from, word: w, delta: -1 });
                        messages.push(VertexMessage { target: to, word: w, delta: 1 });
                    }
                }
                new_levels[d] = levels;
            }
        }

        let net: i64 = messages.iter().map(|m| m.delta as i64).sum();
        if net != 0 {
            return Err(Error::Invariant(format!("count messages do not conserve tokens ({net})")));
        }
        self.stats.messages += messages.len() as u64;
        let inbox = route_messages(messages, n)?;
        self.state.counts.apply_node_deltas(&inbox)?;
        for (d, levels) in new_levels.into_iter().enumerate() {
            let depth = self.state.hierarchy().depth(d);
            *self.state.counts.doc_levels_mut(d) =
                crate::model::level_histogram(&levels, depth + 1);
            self.state.levels[d] = levels;
        }
        Ok(())
    }

    fn maybe_checkpoint(&mut self) -> Result<()> {
        let Some(dir) = self.config.checkpoint_dir.clone() else {
            return Ok(());
        };
        let epoch = self.barrier / self.config.checkpoint_every;
        if epoch > self.last_checkpoint {
            self.checkpoint().save(&dir)?;
            self.last_checkpoint = epoch;
            self.stats.checkpoints += 1;
        }
        Ok(())
    }
}

impl Sweep for ParallelSampler {
    /// One full iteration. A failing worker aborts the attempt; the iteration
    /// is re-run from the last completed iteration with the same random
    /// streams, up to `max_attempts` times.
    fn sweep(&mut self) -> Result<()> {
        for attempt in 1..=self.config.max_attempts {
            if self.attempt(attempt)?.is_some() {
                return Ok(());
            }
            self.stats.retries += 1;
        }
        Err(Error::WorkerFailure {
            attempts: self.config.max_attempts,
        })
    }

    fn state(&self) -> &SamplerState {
        &self.state
    }

    fn log_likelihood(&self) -> f64 {
        let weights = match &self.weights {
            Some(w) => w.clone(),
            None => distributed_rwr(
                self.state.hierarchy(),
                self.state.hyperparameters().gamma,
                self.config.workers,
            ),
        };
        self.state.log_likelihood_with_weights(&weights)
    }
}
