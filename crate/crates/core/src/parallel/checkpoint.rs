use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::Hyperparameters;
use crate::{Error, NodeId, Result};

const FORMAT: &str = "hdtm-checkpoint";
const VERSION: u32 = 1;

/// Position of one worker's random stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub stream: u64,
    /// Word offset in the stream, as a decimal string (128-bit).
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self {
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self, seed: u64) -> Result<ChaCha8Rng> {
        let pos: u128 = self
            .word_pos
            .parse()
            .map_err(|_| Error::Format(format!("bad word position {:?}", self.word_pos)))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(pos);
        Ok(rng)
    }
}

/// Everything needed to continue a parallel chain after the barrier at which
/// it was written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub hyperparameters: Hyperparameters,
    pub vocab_size: usize,
    pub iteration: usize,
    pub barrier: u64,
    pub parent: Vec<Option<NodeId>>,
    pub levels: Vec<Vec<u16>>,
    pub rngs: Vec<RngState>,
}

impl Checkpoint {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        seed: u64,
        hyperparameters: Hyperparameters,
        vocab_size: usize,
        iteration: usize,
        barrier: u64,
        parent: Vec<Option<NodeId>>,
        levels: Vec<Vec<u16>>,
        rngs: &[ChaCha8Rng],
    ) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            seed,
            hyperparameters,
            vocab_size,
            iteration,
            barrier,
            parent,
            levels,
            rngs: rngs.iter().map(RngState::capture).collect(),
        }
    }

    pub fn file_name(barrier: u64) -> String {
        format!("checkpoint-{barrier:010}.json")
    }

    /// Writes atomically into `dir` and returns the file path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(Self::file_name(self.barrier));
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_vec(self)?).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let c: Self = serde_json::from_slice(&bytes)?;
        if c.format != FORMAT {
            return Err(Error::Format(format!("not a checkpoint: {:?}", c.format)));
        }
        if c.version != VERSION {
            return Err(Error::Format(format!("checkpoint version {} unsupported", c.version)));
        }
        Ok(c)
    }

    /// Most recent checkpoint in `dir`, if any.
    pub fn latest(dir: &Path) -> Result<Option<PathBuf>> {
        let mut names: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("checkpoint-") && n.ends_with(".json"))
            })
            .collect();
        names.sort();
        Ok(names.pop())
    }
}
