mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankmedian::mallows::{enumerate_distribution, generate_scenario, oracle_risk, sample, ScenarioOracle};
use rankmedian::{
    copeland_median, empirical_risk, is_stochastically_transitive, optimal_cost, Dispersion, MallowsModel,
    RankingRule, Setting, SyntheticScenario,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_distribution_is_normalized_and_peaked(n in 2usize..=5, phi in 0.05f64..4.0, seed in any::<u64>()) {
        let center = common::random_permutation(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let model = MallowsModel::new(center.clone(), phi).unwrap();
        let table = enumerate_distribution(&model).unwrap();
        let total: f64 = table.probabilities.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let top = table.probability(&center);
        for (s, &p) in table.permutations.iter().zip(&table.probabilities) {
            prop_assert!(p <= top + 1e-15);
            // Mass depends on the distance to the center only.
            let ratio = p / top;
            prop_assert!((ratio - (-phi * s.distance(&center) as f64).exp()).abs() < 1e-12);
        }
        prop_assert!(is_stochastically_transitive(&table.pairwise, true));
        prop_assert_eq!(copeland_median(&table.pairwise).unwrap(), center);
    }

    #[test]
    fn draws_are_valid_and_seed_deterministic(n in 2usize..=8, phi in 0.0f64..3.0, seed in any::<u64>()) {
        let model = MallowsModel::new(rankmedian::Permutation::identity(n), phi).unwrap();
        let a = sample(&model, 20, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = sample(&model, 20, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a.rankings(), b.rankings());
        for r in a.rankings() {
            prop_assert_eq!(r.len(), n);
        }
    }

    #[test]
    fn noiseless_scenarios_follow_their_centers(setting in 1usize..=3, n in 3usize..=5, seed in any::<u64>()) {
        let s = SyntheticScenario::preset(Setting::from_number(setting).unwrap(), n, Dispersion::Noiseless, seed).unwrap();
        let data = generate_scenario(&s, 60).unwrap();
        let oracle = ScenarioOracle::new(&s);
        for r in data.records() {
            let k = s.locate(&r.features).unwrap();
            prop_assert_eq!(&r.ranking, &s.centers()[k]);
            prop_assert_eq!(&oracle.predict(&r.features), &r.ranking);
        }
        prop_assert_eq!(oracle_risk(&s).unwrap(), 0.0);
    }

    #[test]
    fn cell_measures_sum_to_one(setting in 1usize..=3, seed in any::<u64>()) {
        let s = SyntheticScenario::preset(Setting::from_number(setting).unwrap(), 3, Dispersion::Finite(1.0), seed).unwrap();
        let total: f64 = (0..s.cells().len()).map(|k| s.cell_measure(k)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert_eq!(s.cells().len(), 6);
    }
}

#[test]
fn oracle_rule_attains_oracle_risk_within_three_standard_errors() {
    for setting in Setting::ALL {
        let s = SyntheticScenario::preset(setting, 4, Dispersion::Finite(1.0), 5).unwrap();
        let data = generate_scenario(&s, 20_000).unwrap();
        let oracle = ScenarioOracle::new(&s);
        let floor = oracle_risk(&s).unwrap();
        let d: Vec<f64> = data
            .records()
            .iter()
            .map(|r| oracle.predict(&r.features).distance(&r.ranking) as f64)
            .collect();
        let mean = empirical_risk(&oracle, &data).unwrap();
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
        let se = (var / d.len() as f64).sqrt();
        assert!((mean - floor).abs() < 3.0 * se, "{setting}: {mean} vs {floor} (se {se})");
    }
}

#[test]
fn oracle_risk_is_the_common_cell_cost() {
    // Every cell shares φ, so the floor is a single Mallows optimal cost.
    let s = SyntheticScenario::preset(Setting::NumericCategorical, 5, Dispersion::Finite(2.0), 1).unwrap();
    let model = MallowsModel::new(s.centers()[0].clone(), 2.0).unwrap();
    let l = optimal_cost(&enumerate_distribution(&model).unwrap().pairwise).unwrap();
    assert!((oracle_risk(&s).unwrap() - l).abs() < 1e-12);
}

#[test]
fn empirical_matrix_converges_to_exact() {
    let model = MallowsModel::new("2,3,1,4".parse().unwrap(), 0.7).unwrap();
    let exact = enumerate_distribution(&model).unwrap().pairwise;
    let s = sample(&model, 100_000, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let emp = rankmedian::pairwise_matrix(&s).unwrap();
    for (a, b) in exact.upper().iter().zip(emp.upper()) {
        assert!((a - b).abs() < 0.01, "{a} vs {b}");
    }
}
