//! The hierarchical document topic model and its serial collapsed Gibbs
//! sampler.
//!
//! Each node of the document graph owns one topic. A document's tokens are
//! assigned to levels of its root path (level 0 is the root, level
//! `depth(d)` is the document itself), and the sampler alternates between
//! re-drawing each document's parent and re-drawing each token's level.
//!
//! The topic-proportion parameter `alpha` is validated and recorded but does
//! not enter any sampling equation: with topic proportions integrated out, the
//! level distribution is governed by the random-walk prior and the empirical
//! level counts of the document.

mod chain;
mod counts;
mod export;
mod hierarchy;
mod level;
mod likelihood;
mod map;
mod params;
mod path;
mod rwr;
mod state;

pub use chain::{run_chain, run_gibbs, ChainOutput, ChainSample, DiagnosticRecord, GibbsSampler, Sweep};
pub use counts::CountTables;
pub use export::{
    diagnostics_csv, hierarchy_dot, top_words, write_diagnostics_csv, MapExport, MapNode, SampleFile,
    TopWord,
};
pub use hierarchy::Hierarchy;
pub use level::normalize_log_weights;
pub use map::{map_hierarchy, parent_counts, ParentCounts};
pub use params::{GibbsConfig, Hyperparameters};
pub use path::{sample_log_categorical, Detached, PathDraw};
pub use rwr::{hop_log_weight, rwr_node_weights, rwr_path_probs};
pub use state::SamplerState;
pub(crate) use state::level_histogram;
