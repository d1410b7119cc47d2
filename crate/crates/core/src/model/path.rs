use rand::Rng;

use super::rwr::path_log_weight;
use super::state::{level_histogram, SamplerState};
use crate::{NodeId, WordId};

/// Draws an index with probability proportional to `exp(log_weights[i])`.
///
/// A single entry is returned without consuming randomness.
pub fn sample_log_categorical<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> usize {
    sample_log_categorical_with(log_weights, &mut Vec::new(), rng)
}

/// [`sample_log_categorical`] reusing `scratch` for the cumulative weights.
pub(crate) fn sample_log_categorical_with<R: Rng + ?Sized>(
    log_weights: &[f64],
    scratch: &mut Vec<f64>,
    rng: &mut R,
) -> usize {
    assert!(!log_weights.is_empty(), "empty categorical");
    if log_weights.len() == 1 {
        return 0;
    }
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(max.is_finite(), "categorical without finite weight");
    scratch.clear();
    let mut total = 0.0;
    for &x in log_weights {
        let p = (x - max).exp();
        total += p;
        scratch.push(total);
    }
    let u = rng.random::<f64>() * total;
    let i = scratch.partition_point(|&c| c <= u);
    if i < scratch.len() {
        return i;
    }
    // u rounded up to the total: last entry with positive mass
    (1..scratch.len())
        .rev()
        .find(|&j| scratch[j] > scratch[j - 1])
        .unwrap_or(0)
}

/// Draws an index with probability proportional to the positive finite
/// `weights[i]`. A single entry draws no randomness.
pub(crate) fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    if weights.len() == 1 {
        return 0;
    }
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &p) in weights.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Outcome of one path step.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDraw {
    pub doc: NodeId,
    pub previous: NodeId,
    pub chosen: NodeId,
    /// Candidate parents with their normalized posterior probabilities.
    pub candidates: Vec<(NodeId, f64)>,
}

/// A document temporarily cut out of the hierarchy together with its subtree.
///
/// While detached, the document's own tokens are removed from the count
/// tables. Dropping the guard without calling [`attach`](Self::attach)
/// restores the previous parent.
pub struct Detached<'a> {
    state: &'a mut SamplerState,
    doc: NodeId,
    old_parent: NodeId,
    old_path: Vec<NodeId>,
    /// `(word, count)` of the document's tokens per old level, sorted by word.
    groups: Vec<Vec<(WordId, u32)>>,
    done: bool,
}

impl SamplerState {
    /// Cuts `doc` (not the root) out of the hierarchy.
    pub fn detach(&mut self, doc: NodeId) -> Detached<'_> {
        assert_ne!(doc, self.hierarchy.root(), "the root has no parent");
        let old_path = self.hierarchy.path(doc);
        let mut groups: Vec<Vec<(WordId, u32)>> = vec![Vec::new(); old_path.len()];
        for (&w, &l) in self.graph.tokens(doc).iter().zip(&self.levels[doc]) {
            self.counts.decrement(old_path[l as usize], w);
            groups[l as usize].push((w, 1));
        }
        for g in &mut groups {
            *g = coalesce(std::mem::take(g));
        }
        let old_parent = self.hierarchy.detach(doc);
        Detached {
            state: self,
            doc,
            old_parent,
            old_path,
            groups,
            done: false,
        }
    }

    /// One path step for `doc`: detach, score every candidate parent, draw,
    /// reattach.
    pub fn sample_path<R: Rng + ?Sized>(&mut self, doc: NodeId, rng: &mut R) -> PathDraw {
        let detached = self.detach(doc);
        let previous = detached.old_parent;
        let post = detached.posterior();
        let chosen = if post.len() == 1 {
            post[0].0
        } else {
            let logs: Vec<f64> = post.iter().map(|&(_, l)| l).collect();
            post[sample_log_categorical(&logs, rng)].0
        };
        detached.attach(chosen);
        let logs: Vec<f64> = post.iter().map(|&(_, l)| l).collect();
        let probs = super::normalize_log_weights(&logs);
        PathDraw {
            doc,
            previous,
            chosen,
            candidates: post.iter().map(|&(u, _)| u).zip(probs).collect(),
        }
    }
}

impl SamplerState {
    /// Moves `doc` and its subtree under `parent` without sampling, with the
    /// same level remapping as a sampled move.
    pub fn move_subtree(&mut self, doc: NodeId, parent: NodeId) -> crate::Result<()> {
        use crate::Error;
        if doc == self.hierarchy.root() {
            return Err(Error::Invariant("the root cannot move".into()));
        }
        if !self.graph.has_edge(parent, doc) {
            return Err(Error::Invariant(format!("{parent} -> {doc} is not a graph edge")));
        }
        if self.hierarchy.is_ancestor_or_self(doc, parent) {
            return Err(Error::Invariant(format!(
                "moving {doc} under {parent} would create a cycle"
            )));
        }
        if self.hierarchy.parent(doc) != Some(parent) {
            self.detach(doc).attach(parent);
        }
        Ok(())
    }
}

fn coalesce(mut entries: Vec<(WordId, u32)>) -> Vec<(WordId, u32)> {
    entries.sort_unstable_by_key(|&(w, _)| w);
    let mut out: Vec<(WordId, u32)> = Vec::with_capacity(entries.len());
    for (w, c) in entries {
        match out.last_mut() {
            Some(last) if last.0 == w => last.1 += c,
            _ => out.push((w, c)),
        }
    }
    out
}

impl Detached<'_> {
    pub fn doc(&self) -> NodeId {
        self.doc
    }

    pub fn previous_parent(&self) -> NodeId {
        self.old_parent
    }

    /// Graph predecessors of the document that are still attached to the
    /// root, ascending. Never empty: the previous parent always qualifies.
    pub fn candidates(&self) -> Vec<NodeId> {
        let h = &self.state.hierarchy;
        let mut buf = Vec::new();
        self.state
            .graph
            .predecessors(self.doc)
            .iter()
            .copied()
            .filter(|&u| h.attached_path_into(u, &mut buf))
            .collect()
    }

    /// Log prior of attaching under `u`: the random walk's log probability of
    /// reaching `u` in the hierarchy without the document. `None` if `u` is
    /// inside the detached subtree.
    pub fn prior(&self, u: NodeId) -> Option<f64> {
        let mut path = Vec::new();
        self.state
            .hierarchy
            .attached_path_into(u, &mut path)
            .then(|| path_log_weight(&self.state.hierarchy, &path, self.state.hp.gamma))
    }

    /// Log predictive probability of the document's own tokens if it were
    /// attached under `u`, with levels remapped onto the new path.
    pub fn path_log_likelihood(&self, u: NodeId) -> f64 {
        let anc = self.state.hierarchy.path(u);
        self.ancestor_terms(&anc, &mut Vec::new()) + self.own_term()
    }

    fn own_term(&self) -> f64 {
        self.node_term(self.doc, &self.groups[self.old_path.len() - 1])
    }

    /// Terms of the tokens that land on the candidate path `anc`. Unmerged
    /// `(level, node)` terms are shared between candidates through `cache`.
    fn ancestor_terms(&self, anc: &[NodeId], cache: &mut Vec<(usize, NodeId, f64)>) -> f64 {
        let old_depth = self.old_path.len() - 1;
        let new_depth = anc.len();
        let mut total = 0.0;
        for (m, &v) in anc.iter().enumerate().take(old_depth) {
            if m + 1 < new_depth || m + 1 == old_depth {
                let term = match cache.iter().find(|&&(cm, cv, _)| cm == m && cv == v) {
                    Some(&(_, _, t)) => t,
                    None => {
                        let t = self.node_term(v, &self.groups[m]);
                        cache.push((m, v, t));
                        t
                    }
                };
                total += term;
            } else {
                let merged: Vec<(WordId, u32)> =
                    coalesce(self.groups[m..old_depth].iter().flatten().copied().collect());
                total += self.node_term(v, &merged);
            }
        }
        total
    }

    fn node_term(&self, v: NodeId, group: &[(WordId, u32)]) -> f64 {
        if group.is_empty() {
            return 0.0;
        }
        let st = &*self.state;
        let t = &st.tables;
        let x: u64 = group.iter().map(|&(_, c)| c as u64).sum();
        let mut s = -t.w_eta.rising(st.counts.total(v), x);
        for &(w, c) in group {
            s += t.eta.rising(st.word_count(v, w) as u64, c as u64);
        }
        s
    }

    /// `(candidate, unnormalized log posterior)` for every candidate.
    pub fn posterior(&self) -> Vec<(NodeId, f64)> {
        let st = &*self.state;
        let own = self.own_term();
        let mut cache = Vec::new();
        let mut anc = Vec::new();
        self.candidates()
            .into_iter()
            .map(|u| {
                st.hierarchy.path_into(u, &mut anc);
                let prior = path_log_weight(&st.hierarchy, &anc, st.hp.gamma);
                (u, prior + (self.ancestor_terms(&anc, &mut cache) + own))
            })
            .collect()
    }

    /// Reattaches under `parent`, moving the whole subtree and remapping
    /// levels so that tokens above the document keep their relative level
    /// (clipped to the new path) and tokens at or below it keep their node.
    pub fn attach(mut self, parent: NodeId) {
        self.attach_inner(parent);
    }

    fn attach_inner(&mut self, parent: NodeId) {
        self.done = true;
        let d = self.doc;
        let st = &mut *self.state;
        st.hierarchy.attach(d, parent);
        let new_path = st.hierarchy.path(d);
        let old_depth = self.old_path.len() - 1;
        let new_depth = new_path.len() - 1;
        let remap = |l: usize| {
            if l >= old_depth {
                l - old_depth + new_depth
            } else {
                l.min(new_depth - 1)
            }
        };

        for (n, &w) in st.graph.tokens(d).iter().enumerate() {
            let l = remap(st.levels[d][n] as usize);
            st.levels[d][n] = l as u16;
            st.counts.increment(new_path[l], w);
        }
        *st.counts.doc_levels_mut(d) = level_histogram(&st.levels[d], new_depth + 1);

        if parent == self.old_parent {
            return;
        }
        let mut path = Vec::new();
        for e in st.hierarchy.subtree(d).into_iter().skip(1) {
            st.hierarchy.path_into(e, &mut path);
            for (n, &w) in st.graph.tokens(e).iter().enumerate() {
                let l = st.levels[e][n] as usize;
                let l2 = remap(l);
                if l < old_depth {
                    let from = self.old_path[l];
                    let to = path[l2];
                    if from != to {
                        st.counts.decrement(from, w);
                        st.counts.increment(to, w);
                    }
                }
                st.levels[e][n] = l2 as u16;
            }
            *st.counts.doc_levels_mut(e) = level_histogram(&st.levels[e], path.len());
        }
    }
}

impl Drop for Detached<'_> {
    fn drop(&mut self) {
        if !self.done {
            let p = self.old_parent;
            self.attach_inner(p);
        }
    }
}
