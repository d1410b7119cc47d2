use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::DocumentGraph;
use crate::model::Hierarchy;
use crate::{Error, NodeId, Result};

/// Smallest sibling grouping a task may be drawn from.
pub const MIN_GROUPING: usize = 4;
/// Most grouping members shown in one task.
pub const MAX_MEMBERS: usize = 7;

/// One document-intrusion question: members of a sibling grouping plus one
/// document from outside it, in shuffled order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntrusionTask {
    pub task_id: usize,
    /// Parent whose children form the grouping.
    pub grouping_parent: String,
    pub members: Vec<String>,
    pub intruder: String,
    /// External ids in presentation order.
    pub presented: Vec<String>,
    /// Titles aligned with `presented`.
    pub titles: Vec<String>,
}

/// Children lists of size at least `min`, keyed by their parent.
pub fn sibling_groupings(hierarchy: &Hierarchy, min: usize) -> Vec<(NodeId, &[NodeId])> {
    (0..hierarchy.len())
        .map(|u| (u, hierarchy.children(u)))
        .filter(|(_, c)| c.len() >= min)
        .collect()
}

/// Draws `count` tasks. Each picks a document uniformly among those whose
/// sibling grouping (itself and its siblings) has at least [`MIN_GROUPING`]
/// members, then up to [`MAX_MEMBERS`] members including it, and one intruder
/// uniformly from the documents outside the grouping.
pub fn generate_intrusion_tasks<R: Rng + ?Sized>(
    hierarchy: &Hierarchy,
    graph: &DocumentGraph,
    count: usize,
    rng: &mut R,
) -> Result<Vec<IntrusionTask>> {
    hierarchy.validate(graph)?;
    let eligible: Vec<NodeId> = (0..hierarchy.len())
        .filter(|&v| {
            hierarchy
                .parent(v)
                .is_some_and(|p| hierarchy.children(p).len() >= MIN_GROUPING)
        })
        .collect();
    if eligible.is_empty() {
        return Err(Error::NoGrouping(MIN_GROUPING));
    }
    let id = |v: NodeId| graph.node(v).external_id.clone();
    let mut tasks = Vec::with_capacity(count);
    for task_id in 0..count {
        let &pick = eligible.choose(rng).expect("nonempty");
        let parent = hierarchy.parent(pick).expect("eligible nodes have parents");
        let group = hierarchy.children(parent);
        let outside: Vec<NodeId> = (0..hierarchy.len())
            .filter(|&v| hierarchy.parent(v) != Some(parent))
            .collect();
        let &intruder = outside
            .choose(rng)
            .ok_or_else(|| Error::InvalidParameter("no document outside the grouping".into()))?;
        let others: Vec<NodeId> = group.iter().copied().filter(|&v| v != pick).collect();
        let mut members = vec![pick];
        members.extend(others.choose_multiple(rng, MAX_MEMBERS - 1).copied());
        let mut shown = members.clone();
        shown.push(intruder);
        shown.shuffle(rng);
        tasks.push(IntrusionTask {
            task_id,
            grouping_parent: id(parent),
            members: members.iter().map(|&v| id(v)).collect(),
            intruder: id(intruder),
            presented: shown.iter().map(|&v| id(v)).collect(),
            titles: shown.iter().map(|&v| graph.node(v).title.clone()).collect(),
        });
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NodeRecord;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DocumentGraph {
        let nodes = (0..n).map(|i| NodeRecord::new(format!("n{i}"), vec![])).collect();
        DocumentGraph::new(nodes, edges.iter().copied(), 0).unwrap()
    }

    #[test]
    fn star_with_ten_children() {
        // root has 10 children; child 1 has one child outside the grouping
        let mut edges: Vec<(usize, usize)> = (1..=10).map(|c| (0, c)).collect();
        edges.push((1, 11));
        let g = graph(12, &edges);
        let h = Hierarchy::bfs(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tasks = generate_intrusion_tasks(&h, &g, 20, &mut rng).unwrap();
        for t in &tasks {
            assert_eq!(t.members.len(), 7);
            assert_eq!(t.presented.len(), 8);
            assert_eq!(t.grouping_parent, "n0");
            assert!(t.intruder == "n0" || t.intruder == "n11");
            assert!(t.presented.contains(&t.intruder));
        }
    }

    #[test]
    fn grouping_of_five() {
        let g = graph(7, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 6)]);
        let h = Hierarchy::bfs(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = &generate_intrusion_tasks(&h, &g, 1, &mut rng).unwrap()[0];
        assert_eq!(t.members.len(), 5);
        assert_eq!(t.titles.len(), 6);
    }

    #[test]
    fn small_groupings_are_an_error() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let h = Hierarchy::bfs(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            generate_intrusion_tasks(&h, &g, 1, &mut rng),
            Err(Error::NoGrouping(4))
        ));
    }

    #[test]
    fn seeded_runs_agree() {
        let edges: Vec<(usize, usize)> = (1..=6).map(|c| (0, c)).chain([(1, 7), (1, 8)]).collect();
        let g = graph(9, &edges);
        let h = Hierarchy::bfs(&g).unwrap();
        let a = generate_intrusion_tasks(&h, &g, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate_intrusion_tasks(&h, &g, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
