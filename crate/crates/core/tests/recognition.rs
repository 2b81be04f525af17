mod common;

use linkage_area::graph::{is_partial_two_tree, sp_decompose};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn series_parallel_graphs_are_recognized(seed in any::<u64>(), depth in 1u32..6) {
        let g = common::random_sp(&mut ChaCha8Rng::seed_from_u64(seed), depth);
        prop_assert!(is_partial_two_tree(&g));
        let tree = sp_decompose(&g, "s", "t").unwrap();
        prop_assert!(tree.reproduces(&g));
        prop_assert_eq!(tree.tree.edge_count(), g.edge_count());
    }

    #[test]
    fn subdivided_k4_is_rejected(seed in any::<u64>()) {
        let g = common::random_subdivided_k4(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(!is_partial_two_tree(&g));
    }
}
