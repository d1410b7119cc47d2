use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, NodeId, Result, WordId};

/// Phases of one parallel iteration, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    RwrPropagate,
    PathSample,
    LevelSample,
    PathGlobalUpdate,
}

impl Phase {
    pub const ORDER: [Phase; 4] = [
        Phase::RwrPropagate,
        Phase::PathSample,
        Phase::LevelSample,
        Phase::PathGlobalUpdate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::RwrPropagate => "rwr-propagate",
            Phase::PathSample => "path-sample",
            Phase::LevelSample => "level-sample",
            Phase::PathGlobalUpdate => "path-global-update",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A completed barrier: the phase that just finished and the running count
/// of barriers (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Barrier {
    pub index: u64,
    pub iteration: usize,
    pub phase: Phase,
}

/// A count change addressed to one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexMessage {
    pub target: NodeId,
    pub word: WordId,
    pub delta: i32,
}

/// Groups messages into one inbox per vertex, preserving send order.
pub fn route_messages(
    messages: impl IntoIterator<Item = VertexMessage>,
    vertices: usize,
) -> Result<Vec<Vec<(WordId, i64)>>> {
    let mut inbox = vec![Vec::new(); vertices];
    for m in messages {
        inbox
            .get_mut(m.target)
            .ok_or(Error::UnknownVertex(m.target))?
            .push((m.word, m.delta as i64));
    }
    Ok(inbox)
}
