//! Hierarchical document topic model.
//!
//! Infers a rooted hierarchy over the nodes of a document graph together with
//! one topic per node. Every tree edge is an edge of the input graph, and each
//! document's words are a mixture of the topics on its root path. Inference is a
//! collapsed Gibbs sampler whose path prior is a random walk with restart from
//! the root.
//!
//! Modules:
//!
//! - [`corpus`]: ingestion and preprocessing of document graphs.
//! - [`model`]: sampler state, path and level sampling, likelihood, the serial
//!   chain driver and MAP estimation.
//! - [`parallel`]: a bulk-synchronous, vertex-centric version of the sampler.
//! - [`eval`]: certainty, Jaccard, model precision, baselines and graph
//!   similarity.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod parallel;
pub mod special;

pub use error::{Error, Result};

/// Dense node index, `0..N`.
pub type NodeId = usize;

/// Dense vocabulary index, `0..W`.
pub type WordId = u32;
