use rand::Rng;

use super::path::{sample_categorical, sample_log_categorical_with};
use super::rwr::hop_log_weight;
use super::state::SamplerState;
use crate::NodeId;

/// Probabilities proportional to `exp(log_weights)`.
pub fn normalize_log_weights(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = log_weights.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Per-document quantities reused for every token of one level sweep.
struct DocContext {
    path: Vec<NodeId>,
    /// `hops[k]`: probability of the step into level `k` (one at the root).
    hops: Vec<f64>,
}

/// Running products below this are folded into a log offset. Above it every
/// direct weight stays a normal float.
const RESCALE_BELOW: f64 = 1e-200;

impl SamplerState {
    fn doc_context(&self, d: NodeId) -> DocContext {
        let path = self.hierarchy.path(d);
        let gamma = self.hp.gamma;
        let hops = (0..path.len())
            .map(|k| {
                if k == 0 {
                    1.0
                } else {
                    hop_log_weight(gamma, self.hierarchy.degree(path[k - 1])).exp()
                }
            })
            .collect();
        DocContext { path, hops }
    }

    /// Fills `out` with the level conditional of token `n` of `d` (its own
    /// assignment excluded). Returns `true` when `out` holds direct
    /// probabilities and `false` when the prefix product came close to
    /// underflow and `out` holds log weights instead.
    fn fill_level_weights(
        &self,
        d: NodeId,
        n: usize,
        ctx: &DocContext,
        out: &mut Vec<f64>,
        force_log: bool,
    ) -> bool {
        let w = self.graph.tokens(d)[n];
        let cur = self.levels[d][n] as usize;
        let hist = self.counts.doc_levels(d);
        let levels = ctx.path.len();
        let l_f = levels as f64;
        let eta = self.hp.eta;
        let w_eta = self.vocab_size as f64 * eta;
        let mut linear = !force_log;
        out.clear();
        // ge: tokens of d other than n at level >= k
        let mut ge: u32 = hist.iter().sum::<u32>() - 1;
        // prefix product of hop and continue factors, as acc * exp(offset)
        let mut acc = 1.0f64;
        let mut offset = 0.0f64;
        for k in 0..levels {
            let own = (k == cur) as u32;
            let h = hist[k] - own;
            let v = ctx.path[k];
            let nw = self.word_count(v, w) - own;
            let nt = self.counts.total(v) - own as u64;
            let ge_f = ge as f64;
            let word = (nw as f64 + eta) / (nt as f64 + w_eta);
            let stop = (h as f64 + 1.0) / (ge_f + l_f);
            acc *= ctx.hops[k];
            let p = acc * word * stop;
            out.push(if linear { p } else { offset + p.ln() });
            let gt = ge - h;
            acc *= (gt as f64 + 1.0) / (ge_f + l_f);
            if acc < RESCALE_BELOW {
                if linear {
                    linear = false;
                    for x in out.iter_mut() {
                        *x = x.ln();
                    }
                }
                offset += acc.ln();
                acc = 1.0;
            }
            ge = gt;
        }
        linear
    }

    /// Unnormalized log conditional of every level for token `n` of `d`,
    /// excluding the token's own current assignment.
    pub fn level_log_weights(&self, d: NodeId, n: usize) -> Vec<f64> {
        let ctx = self.doc_context(d);
        let mut out = Vec::new();
        self.fill_level_weights(d, n, &ctx, &mut out, true);
        out
    }

    /// Redraws the level of every token of `d` in order. The root's tokens are
    /// fixed at level 0 and draw no randomness.
    pub fn sample_doc_levels<R: Rng + ?Sized>(&mut self, d: NodeId, rng: &mut R) {
        if d == self.hierarchy.root() {
            return;
        }
        let ctx = self.doc_context(d);
        let mut weights = Vec::with_capacity(ctx.path.len());
        let mut scratch = Vec::with_capacity(ctx.path.len());
        for n in 0..self.levels[d].len() {
            let new = if self.fill_level_weights(d, n, &ctx, &mut weights, false) {
                sample_categorical(&weights, rng)
            } else {
                sample_log_categorical_with(&weights, &mut scratch, rng)
            };
            let cur = self.levels[d][n] as usize;
            if new != cur {
                let w = self.graph.tokens(d)[n];
                self.counts.decrement(ctx.path[cur], w);
                self.counts.increment(ctx.path[new], w);
                let hist = self.counts.doc_levels_mut(d);
                hist[cur] -= 1;
                hist[new] += 1;
                self.levels[d][n] = new as u16;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocumentGraph, NodeRecord};
    use crate::model::{Hierarchy, Hyperparameters};
    use std::sync::Arc;

    #[test]
    fn normalization() {
        let p = normalize_log_weights(&[0.0, 0.0, 2f64.ln()]);
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
        let p = normalize_log_weights(&[-1e4, -1e4 + 3f64.ln()]);
        assert!((p[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn weights_match_joint_ratios() {
        let nodes = vec![
            NodeRecord::new("a", vec![0, 1]),
            NodeRecord::new("b", vec![1, 2, 2]),
            NodeRecord::new("c", vec![2, 0, 1, 1]),
        ];
        let g = Arc::new(DocumentGraph::new(nodes, [(0, 1), (1, 2)], 0).unwrap());
        let h = Hierarchy::bfs(&g).unwrap();
        let levels = vec![vec![0, 0], vec![1, 0, 1], vec![2, 1, 0, 2]];
        let hp = Hyperparameters::with_gamma(0.3).unwrap();
        let base = SamplerState::from_parts(g.clone(), 3, hp, h.clone(), levels.clone()).unwrap();
        let (d, n) = (2, 1);
        let weights = base.level_log_weights(d, n);
        let joint: Vec<f64> = (0..3)
            .map(|k| {
                let mut ls = levels.clone();
                ls[d][n] = k;
                SamplerState::from_parts(g.clone(), 3, hp, h.clone(), ls)
                    .unwrap()
                    .log_likelihood()
            })
            .collect();
        for k in 1..3 {
            let a = weights[k] - weights[0];
            let b = joint[k] - joint[0];
            assert!((a - b).abs() < 1e-10, "level {k}: {a} vs {b}");
        }
    }
}
