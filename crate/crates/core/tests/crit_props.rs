mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankmedian::{empirical_risk, CritTree, GrowConfig, RankingRule};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn leaves_partition_the_training_set(seed in any::<u64>(), depth in 0usize..5, min_leaf in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = common::mixed_dataset(4, 60, 5, &mut rng);
        let t = common::grow(&data, depth, min_leaf);
        prop_assert!(t.depth() <= depth);
        let total: usize = t.leaves().map(|l| l.count).sum();
        prop_assert_eq!(total, data.len());
        let weight: f64 = t.leaves().map(|l| l.weight).sum();
        prop_assert!((weight - 1.0).abs() < 1e-12);
        for l in t.leaves() {
            prop_assert!(l.count >= min_leaf);
        }
        let mut hits = vec![0usize; t.nodes().len()];
        for r in data.records() {
            hits[t.leaf_index(&r.features)] += 1;
        }
        for (i, node) in t.nodes().iter().enumerate() {
            if node.is_leaf() {
                prop_assert_eq!(hits[i], node.count);
            }
        }
    }

    #[test]
    fn training_risk_and_dispersion_bounds(seed in any::<u64>(), depth in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = common::numeric_dataset(4, 2, 80, &mut rng);
        let t = common::grow(&data, depth, 3);
        prop_assert!((t.training_risk() - empirical_risk(&t, &data).unwrap()).abs() < 1e-9);
        prop_assert!(t.dispersion() <= t.root().weighted_impurity() + 1e-12);
        // Per leaf, γ ≤ L ≤ 2γ in the strictly transitive case; the mean cost is never below γ.
        for l in t.leaves() {
            prop_assert!(l.cost + 1e-12 >= l.impurity);
        }
        for v in t.variable_importance() {
            prop_assert!(v >= 0.0);
        }
        let imp: f64 = t.variable_importance().iter().sum();
        prop_assert!((imp - (t.root().weighted_impurity() - t.dispersion())).abs() < 1e-9);
    }

    #[test]
    fn pruning_is_monotone_in_lambda(seed in any::<u64>(), l1 in 0.0f64..0.3, l2 in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = common::numeric_dataset(4, 2, 80, &mut rng);
        let t = common::grow(&data, 4, 2);
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let a = t.prune(lo).unwrap();
        let b = t.prune(hi).unwrap();
        prop_assert!(b.leaf_count() <= a.leaf_count());
        prop_assert!(b.dispersion() + 1e-12 >= a.dispersion());
        let seq = t.pruning_sequence();
        prop_assert!(seq.iter().any(|s| s.leaves == a.leaf_count() && (s.dispersion - a.dispersion()).abs() < 1e-12));
    }

    #[test]
    fn json_round_trip_is_lossless(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = common::mixed_dataset(3, 50, 12, &mut rng);
        let t = CritTree::grow(&data, &GrowConfig::new(3, 2)).unwrap();
        let back: CritTree = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        prop_assert_eq!(&back, &t);
        for r in data.records() {
            prop_assert_eq!(back.predict(&r.features), t.predict(&r.features));
        }
    }

    #[test]
    fn growth_is_deterministic_with_feature_subsampling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = common::numeric_dataset(4, 4, 60, &mut rng);
        let mut cfg = GrowConfig::new(3, 3);
        cfg.max_features = Some(2);
        cfg.seed = seed;
        prop_assert_eq!(CritTree::grow(&data, &cfg).unwrap(), CritTree::grow(&data, &cfg).unwrap());
    }
}
