use proptest::prelude::*;

use biaslens::analogy::{classify_pair, pair_score, PairConfig, PairLabel};
use biaslens::embeddings::EmbeddingTable;
use biaslens::graph::{betweenness, swap_candidates, CharacterGraph};
use biaslens::{Execution, GenderLabel};

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..12).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..30)))
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a != b && !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    adj
}

proptest! {
    #[test]
    fn betweenness_is_nonnegative_and_mode_free((n, edges) in graph_strategy()) {
        let adj = adjacency(n, &edges);
        let seq = betweenness(&adj, Execution::Sequential);
        let par = betweenness(&adj, Execution::Parallel);
        prop_assert_eq!(&seq, &par);
        prop_assert!(seq.iter().all(|&c| c >= 0.0));
        // No node lies on more pairs than exist among the others.
        let bound = ((n - 1) * (n - 2)) as f64 / 2.0;
        prop_assert!(seq.iter().all(|&c| c <= bound + 1e-9));
    }

    #[test]
    fn betweenness_follows_relabelling((n, edges) in graph_strategy(), shift in 1usize..11) {
        let adj = adjacency(n, &edges);
        let perm = |v: usize| (v + shift) % n;
        let moved: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (perm(a), perm(b))).collect();
        let before = betweenness(&adj, Execution::Sequential);
        let after = betweenness(&adjacency(n, &moved), Execution::Sequential);
        for v in 0..n {
            prop_assert!((before[v] - after[perm(v)]).abs() < 1e-9);
        }
    }

    #[test]
    fn swap_candidates_grow_with_epsilon((n, edges) in graph_strategy(), e1 in 0.0f64..5.0, e2 in 0.0f64..5.0) {
        let nodes = (0..n)
            .map(|i| (format!("c{i}"), if i % 2 == 0 { GenderLabel::Male } else { GenderLabel::Female }))
            .collect();
        let g = CharacterGraph::from_parts(nodes, edges, Execution::Sequential);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let small = swap_candidates(&g, lo);
        let large = swap_candidates(&g, hi);
        prop_assert!(small.iter().all(|p| large.contains(p)));
        prop_assert!(large.iter().all(|p| p.difference <= hi));
    }

    #[test]
    fn score_stays_in_range(
        rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 4),
        tau1 in 0.0f64..2.0,
    ) {
        let mut t = EmbeddingTable::new(4).unwrap();
        for (w, r) in ["he", "she", "x", "y"].iter().zip(&rows) {
            t.insert(w, r).unwrap();
        }
        if let Ok(s) = pair_score("x", "y", &t) {
            prop_assert!((0.0..=2.0 + 1e-12).contains(&s));
            let cfg = PairConfig { tau1, ..PairConfig::default() };
            let (d_h, d_w, label) = classify_pair("x", "y", &t, &cfg).unwrap();
            let specific = d_h < cfg.tau1 || d_w < cfg.tau2;
            prop_assert_eq!(label == PairLabel::GenderSpecific, specific);
        }
    }
}
