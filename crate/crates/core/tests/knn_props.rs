mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankmedian::{empirical_risk, pseudo_median, DistanceSpec, KnnModel, RankingRule, RankingSample};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prediction_is_pseudo_median_of_neighbors(seed in any::<u64>(), k in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = common::numeric_dataset(4, 2, 40, &mut rng);
        let queries = common::numeric_dataset(4, 2, 10, &mut rng);
        let model = KnnModel::fit(data.clone(), k, DistanceSpec::euclidean()).unwrap();
        for q in queries.records() {
            let nb = model.neighbors(&q.features);
            prop_assert_eq!(nb.len(), k);
            let s = RankingSample::from_rankings(nb.iter().map(|&i| data.records()[i].ranking.clone()).collect()).unwrap();
            prop_assert_eq!(model.predict(&q.features), pseudo_median(&s).unwrap().median);
        }
    }

    #[test]
    fn all_neighbors_give_the_global_median(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = common::mixed_dataset(4, 25, 3, &mut rng);
        let model = KnnModel::fit(data.clone(), data.len(), DistanceSpec::mixed()).unwrap();
        let global = pseudo_median(&data.ranking_sample()).unwrap().median;
        for r in data.records() {
            prop_assert_eq!(&model.predict(&r.features), &global);
        }
    }

    #[test]
    fn one_neighbor_interpolates_distinct_points(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = common::numeric_dataset(5, 3, 30, &mut rng);
        let model = KnnModel::fit(data.clone(), 1, DistanceSpec::euclidean()).unwrap();
        prop_assert_eq!(empirical_risk(&model, &data).unwrap(), 0.0);
    }

    #[test]
    fn json_round_trip_preserves_predictions(seed in any::<u64>(), k in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = common::mixed_dataset(3, 30, 4, &mut rng);
        let model = KnnModel::fit(data.clone(), k, DistanceSpec::mixed()).unwrap();
        let back: KnnModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
        for r in data.records() {
            prop_assert_eq!(model.predict(&r.features), back.predict(&r.features));
        }
    }
}

#[test]
fn k_above_training_size_is_rejected() {
    let data = common::numeric_dataset(3, 1, 5, &mut ChaCha8Rng::seed_from_u64(0));
    assert!(KnnModel::fit(data, 6, DistanceSpec::euclidean()).is_err());
}
