//! Evaluation: certainty of sampled parents, category agreement with a
//! reference, word-intrusion precision, the term-propagation baseline,
//! non-model baseline hierarchies and graph similarity.

mod baseline;
mod certainty;
mod intrusion;
mod jaccard;
mod precision;
mod propagation;
mod similarity;
mod stats;

pub use baseline::{baseline_hierarchy, BaselineKind};
pub use certainty::{certainty, certainty_score, certainty_with, CertaintyReport, NodeCertainty};
pub use intrusion::{generate_intrusion_tasks, sibling_groupings, IntrusionTask, MAX_MEMBERS, MIN_GROUPING};
pub use jaccard::{
    jaccard, jaccard_vs_reference, CategoryReference, JaccardReport, NodeJaccard,
};
pub use precision::{model_precision, Judgment, JudgmentSet, PrecisionReport, TaskPrecision};
pub use propagation::{dirichlet_smooth, term_propagation, Propagated, Smoothed};
pub use similarity::{graph_similarity, SimpleGraph};
pub use stats::{density, BinSummary, BoxSummary, DensityBin};

use std::io::BufRead;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::{Error, Result};

/// Reads one JSON value per non-blank line.
pub(crate) fn read_json_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

/// Quotes a CSV field when it holds a delimiter, quote or newline.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
