//! Document graph ingestion and preprocessing.
//!
//! A [`DocumentGraph`] is immutable once built: node ids are dense and ordered
//! by external id, edges are deduplicated, and there are no self-loops. The
//! preprocessing steps ([`resolve_redirects`], [`extract_root_component`])
//! each return a new graph.

mod graph;
mod load;
mod preprocess;
mod vocab;

pub use graph::{DocumentGraph, NodeRecord};
pub use load::{load_graph, read_edge_list, read_redirects, tokenize, Corpus, LoadReport};
pub use preprocess::{extract_root_component, resolve_redirects, ComponentReport, RedirectReport};
pub use vocab::Vocabulary;
