//! Bulk-synchronous, vertex-centric version of the sampler.
//!
//! Each iteration runs four phases separated by barriers:
//!
//! 1. `rwr-propagate`: random-walk weights flow from the root down the
//!    hierarchy as messages, one superstep per level.
//! 2. `path-sample`: every worker re-draws the parents of the documents it
//!    owns against a private copy of the global state.
//! 3. `level-sample`: every worker re-draws the levels of its documents'
//!    tokens on the same private copy.
//! 4. `path-global-update`: structural moves are replayed into the global
//!    hierarchy (rejecting any that would close a cycle), token levels are
//!    remapped onto the merged hierarchy, and count changes are delivered to
//!    the affected nodes as messages.
//!
//! Worker 0 draws from the serial sampler's random stream, so a single worker
//! reproduces the serial chain exactly.

mod checkpoint;
mod messages;
mod rwr;
mod sampler;

pub use checkpoint::{Checkpoint, RngState};
pub use messages::{route_messages, Barrier, Phase, VertexMessage};
pub use rwr::distributed_rwr;
pub use sampler::{
    BarrierView, FaultHook, FaultSite, ParallelConfig, ParallelSampler, ParallelStats,
};

use crate::NodeId;

/// Worker that owns vertex `v`.
pub fn owner(v: NodeId, workers: usize) -> usize {
    // splitmix64 finalizer
    let mut z = (v as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z % workers as u64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ownership_covers_all_workers() {
        let mut seen = [0usize; 4];
        for v in 0..1000 {
            seen[owner(v, 4)] += 1;
        }
        assert!(seen.iter().all(|&c| c > 200));
        assert!((0..50).all(|v| owner(v, 1) == 0));
    }
}
