mod common;

use std::collections::BTreeSet;

use hdtm::corpus::{DocumentGraph, NodeRecord};
use hdtm::eval::{
    baseline_hierarchy, certainty, dirichlet_smooth, generate_intrusion_tasks, jaccard_vs_reference,
    term_propagation, BaselineKind, CategoryReference, MAX_MEMBERS,
};
use hdtm::model::{map_hierarchy, run_gibbs, GibbsConfig, Hierarchy, Hyperparameters};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every page repeats the six general words 0..6 several times and adds a
/// few words private to its branch.
fn site_with_general_words(seed: u64) -> (DocumentGraph, Hierarchy) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 30;
    let parents = common::random_tree(n, 4, &mut rng);
    let nodes = (0..n)
        .map(|d| {
            let mut words: Vec<u32> = (0..6).flat_map(|w| std::iter::repeat_n(w, 3)).collect();
            words.extend((0..8).map(|_| 6 + d as u32 * 4 + rng.random_range(0..4)));
            NodeRecord::new(format!("p{d}"), words)
        })
        .collect();
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (parents[v].unwrap(), v)).collect();
    let g = DocumentGraph::new(nodes, edges, 0).unwrap();
    let h = Hierarchy::from_parents(0, parents).unwrap();
    (g, h)
}

#[test]
fn propagated_root_top_words_are_the_general_words() {
    for seed in 0..5 {
        let (g, h) = site_with_general_words(seed);
        let vocab = 6 + 30 * 4;
        for alpha in [0.0, 0.5, 1.0] {
            let smoothed = dirichlet_smooth(term_propagation(&g, &h, alpha).unwrap(), &g, vocab, 100.0).unwrap();
            let top: BTreeSet<u32> = smoothed.top_words(0, 6).into_iter().map(|(w, _)| w).collect();
            assert_eq!(top, (0..6).collect(), "seed {seed}, alpha {alpha}");
        }
    }
}

#[test]
fn evaluation_pipeline_on_planted_corpus() {
    let planted = common::plant(&common::PlantSpec { nodes: 30, ..Default::default() }, 3);
    let g = &planted.graph;
    let cfg = GibbsConfig::new(200, 100, 5, 3).unwrap();
    let out = run_gibbs(g.clone(), planted.vocab_size, Hyperparameters::default(), &cfg).unwrap();
    let map = map_hierarchy(&out.samples, g).unwrap();
    map.validate(g).unwrap();

    let report = certainty(&out.samples, g).unwrap();
    assert_eq!(report.nodes.len(), g.len() - 1);
    assert!(report.nodes.iter().all(|c| (0.0..=1.0).contains(&c.certainty)));
    let binned: usize = report.density.iter().map(|b| b.count).sum();
    assert_eq!(binned, g.len() - 1);

    // the planted tree as reference: a document's categories are its own id
    // and every planted ancestor's id
    let truth = Hierarchy::from_parents(0, planted.parents.clone()).unwrap();
    let reference = CategoryReference {
        categories: (0..g.len())
            .map(|v| {
                let id = g.node(v).external_id.clone();
                let cats = truth.path(v).into_iter().map(|u| g.node(u).external_id.clone()).collect();
                (id, cats)
            })
            .collect(),
    };
    let j = jaccard_vs_reference(&truth, g, &reference, None, 10).unwrap();
    assert!(j.nodes.iter().all(|n| (0.0..=1.0).contains(&n.coefficient)));
    let jm = jaccard_vs_reference(&map, g, &reference, Some(&report), 10).unwrap();
    assert!(jm.nodes.iter().all(|n| n.certainty.is_some()));

    let bfs = baseline_hierarchy(g, BaselineKind::Bfs, 0).unwrap();
    assert_eq!(bfs, Hierarchy::bfs(g).unwrap());

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    if let Ok(tasks) = generate_intrusion_tasks(&map, g, 20, &mut rng) {
        for t in tasks {
            assert!(t.members.len() < MAX_MEMBERS + 1);
            assert!(!t.members.contains(&t.intruder));
            assert_eq!(t.presented.len(), t.members.len() + 1);
        }
    }
}
