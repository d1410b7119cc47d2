use super::rwr::{hop_log_weight, rwr_node_weights};
use super::state::SamplerState;

impl SamplerState {
    /// Log joint probability of the words, hierarchy and levels with all
    /// multinomials integrated out.
    ///
    /// The sum is the Dirichlet-multinomial word term over nodes, the random
    /// walk weight of every non-root node's parent, and each document's level
    /// term. The result does not depend on the iteration order of the count
    /// tables.
    pub fn log_likelihood(&self) -> f64 {
        let weights = rwr_node_weights(&self.hierarchy, self.hp.gamma);
        self.log_likelihood_with_weights(&weights)
    }

    /// [`log_likelihood`](Self::log_likelihood) with externally computed node
    /// weights.
    pub fn log_likelihood_with_weights(&self, node_weights: &[f64]) -> f64 {
        self.word_log_likelihood() + self.path_log_prior(node_weights) + self.level_log_prior()
    }

    pub fn word_log_likelihood(&self) -> f64 {
        let t = &self.tables;
        let mut total = 0.0;
        let mut freq: Vec<u64> = Vec::new();
        for v in 0..self.counts.num_nodes() {
            let n = self.counts.total(v);
            if n == 0 {
                continue;
            }
            total -= t.w_eta.rising(0, n);
            for (_, c) in self.counts.node_words(v) {
                let c = c as usize;
                if c >= freq.len() {
                    freq.resize(c + 1, 0);
                }
                freq[c] += 1;
            }
        }
        let base = t.eta.get(0);
        for (c, &m) in freq.iter().enumerate().skip(1) {
            if m > 0 {
                total += m as f64 * (t.eta.get(c as u64) - base);
            }
        }
        total
    }

    pub fn path_log_prior(&self, node_weights: &[f64]) -> f64 {
        self.hierarchy
            .parents()
            .iter()
            .flatten()
            .map(|&p| node_weights[p])
            .sum()
    }

    pub fn level_log_prior(&self) -> f64 {
        let t = &self.tables;
        let gamma = self.hp.gamma;
        let mut total = 0.0;
        let mut path = Vec::new();
        for d in 0..self.graph.len() {
            let hist = self.counts.doc_levels(d);
            let levels = hist.len() as u64;
            if levels <= 1 {
                continue;
            }
            self.hierarchy.path_into(d, &mut path);
            let mut hop_cum = 0.0;
            let mut ge: u64 = hist.iter().map(|&h| h as u64).sum();
            let lg_l = t.fact.get(levels - 1);
            for k in 0..hist.len() {
                if k > 0 {
                    hop_cum += hop_log_weight(gamma, self.hierarchy.degree(path[k - 1]));
                }
                let h = hist[k] as u64;
                total += h as f64 * hop_cum;
                if ge > 0 {
                    let gt = ge - h;
                    total += t.fact.get(h) + t.fact.get(gt) + lg_l - t.fact.get(ge + levels - 1);
                }
                ge -= h;
            }
        }
        total
    }
}
