use std::collections::BTreeMap;

use rayon::prelude::*;

use super::owner;
use crate::model::{hop_log_weight, Hierarchy};
use crate::special::log_sum_exp;
use crate::NodeId;

/// Random-walk log weight of every node, computed by message passing.
///
/// In each superstep the active vertices, partitioned over `workers`, send
/// their weight plus the log hop probability to each child. A vertex that
/// receives messages combines them with log-sum-exp and becomes active in the
/// next superstep. The result equals
/// [`rwr_node_weights`](crate::model::rwr_node_weights) bit for bit.
pub fn distributed_rwr(hierarchy: &Hierarchy, gamma: f64, workers: usize) -> Vec<f64> {
    let workers = workers.max(1);
    let mut weights = vec![f64::NAN; hierarchy.len()];
    weights[hierarchy.root()] = 0.0;
    let mut active = vec![hierarchy.root()];
    while !active.is_empty() {
        let outgoing: Vec<Vec<(NodeId, f64)>> = (0..workers)
            .into_par_iter()
            .map(|k| {
                let mut out = Vec::new();
                for &u in active.iter().filter(|&&u| owner(u, workers) == k) {
                    let kids = hierarchy.children(u);
                    if kids.is_empty() {
                        continue;
                    }
                    let w = weights[u] + hop_log_weight(gamma, kids.len());
                    out.extend(kids.iter().map(|&c| (c, w)));
                }
                out
            })
            .collect();
        let mut inbox: BTreeMap<NodeId, Vec<f64>> = BTreeMap::new();
        for (target, w) in outgoing.into_iter().flatten() {
            inbox.entry(target).or_default().push(w);
        }
        active = inbox.keys().copied().collect();
        for (target, received) in inbox {
            weights[target] = log_sum_exp(&received);
        }
    }
    weights
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rwr_node_weights;

    #[test]
    fn matches_serial_weights() {
        // 0 -> {1, 2, 3}, 1 -> {4, 5}, 5 -> 6
        let h = Hierarchy::from_parents(
            0,
            vec![None, Some(0), Some(0), Some(0), Some(1), Some(1), Some(5)],
        )
        .unwrap();
        for workers in [1, 2, 3] {
            let d = distributed_rwr(&h, 0.3, workers);
            let s = rwr_node_weights(&h, 0.3);
            assert_eq!(d, s);
        }
    }
}
