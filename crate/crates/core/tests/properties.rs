use amrseq::smatch::{brute_force_smatch, smatch_score};
use amrseq::synth::{corrupt, random_graph, reentrant_edge_labels, rename_variables, tree_part};
use amrseq::{delinearize, emit_penman, graph_triples, linearize, parse_penman, repair_brackets, Target};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn linearization_roundtrip_unique_labels(seed in any::<u64>()) {
        let g = random_graph(&mut rng(seed), 12, true);
        let back = delinearize(&linearize(&g)).unwrap();
        prop_assert!(back.isomorphic(&g), "{}", linearize(&g));
    }

    #[test]
    fn linearization_with_duplicate_labels_only_moves_reentrancies(seed in any::<u64>()) {
        let g = random_graph(&mut rng(seed), 12, false);
        let back = delinearize(&linearize(&g)).unwrap();
        prop_assert_eq!(back.node_count(), g.node_count());
        prop_assert_eq!(back.edges().len(), g.edges().len());
        prop_assert_eq!(back.constant_count(), g.constant_count());
        prop_assert!(tree_part(&back).isomorphic(&tree_part(&g)));
        prop_assert_eq!(reentrant_edge_labels(&back), reentrant_edge_labels(&g));
    }

    #[test]
    fn token_count_identity(seed in any::<u64>()) {
        let g = random_graph(&mut rng(seed), 12, false);
        let t = linearize(&g);
        let expected = 2 + g.node_count() + g.constant_count() + 2 * g.edges().len() + 2 * g.reentrancy_count();
        prop_assert_eq!(t.len(), expected);
        prop_assert!(t.is_balanced());
    }

    #[test]
    fn repair_is_total_and_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, 12, false);
        let bad = corrupt(&mut r, &linearize(&g));
        let fixed = repair_brackets(&bad);
        prop_assert!(fixed.is_balanced());
        prop_assert!(delinearize(&fixed).is_ok(), "{}", fixed);
        prop_assert_eq!(repair_brackets(&fixed), fixed);
    }

    #[test]
    fn repair_leaves_balanced_output_alone(seed in any::<u64>()) {
        let t = linearize(&random_graph(&mut rng(seed), 12, false));
        prop_assert_eq!(repair_brackets(&t), t);
    }

    #[test]
    fn penman_roundtrip(seed in any::<u64>()) {
        let g = random_graph(&mut rng(seed), 12, false);
        let back = parse_penman(&emit_penman(&g)).unwrap();
        prop_assert!(back.isomorphic(&g), "{}", emit_penman(&g));
    }

    #[test]
    fn triple_count_identity(seed in any::<u64>()) {
        let g = random_graph(&mut rng(seed), 12, false);
        let var_edges = g.edges().iter().filter(|e| matches!(e.target, Target::Node(_))).count();
        prop_assert_eq!(graph_triples(&g).len(), g.node_count() + g.constant_count() + 1 + var_edges);
        prop_assert_eq!(graph_triples(&g), graph_triples(&g));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hill_climbing_never_beats_the_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_graph(&mut r, 6, false);
        let b = random_graph(&mut r, 6, false);
        let hill = smatch_score(&a, &b, 8, seed);
        let exact = brute_force_smatch(&a, &b).unwrap();
        prop_assert!(hill.matched <= exact.matched);
    }

    #[test]
    fn smatch_self_score_and_renaming(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_graph(&mut r, 8, false);
        let b = random_graph(&mut r, 8, false);
        prop_assert_eq!(smatch_score(&a, &a, 8, 0).f1, 1.0);
        let renamed = smatch_score(&rename_variables(&a, &mut r), &rename_variables(&b, &mut r), 8, 3);
        let plain = smatch_score(&a, &b, 8, 3);
        prop_assert_eq!(renamed.matched, plain.matched);
    }

    #[test]
    fn dropping_an_edge_never_raises_the_match(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gold = random_graph(&mut r, 6, false);
        let mut pred = gold.clone();
        let k = pred.edges().len();
        prop_assume!(k > 0);
        let drop = (seed as usize) % k;
        let edges: Vec<_> = pred.edges().iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, e)| e.clone()).collect();
        match amrseq::AmrGraph::from_parts(pred.nodes().to_vec(), edges, pred.root()) {
            Ok(p) => pred = p,
            Err(_) => return Ok(()),
        }
        let before = brute_force_smatch(&gold, &gold).unwrap().matched;
        let after = brute_force_smatch(&pred, &gold).unwrap().matched;
        prop_assert!(after <= before);
    }
}
