//! Bagged trees, aggregated pointwise and as one overlay partition.

use rankmedian::ensemble::DEFAULT_CELL_CAP;
use rankmedian::evaluation::train_test_split;
use rankmedian::mallows::generate_scenario;
use rankmedian::{
    empirical_risk, fit_bagged, CritTree, Dispersion, ForestConfig, GrowConfig, RankingRule, Resample, Setting,
    SyntheticScenario,
};

fn main() -> rankmedian::Result<()> {
    let scenario = SyntheticScenario::preset(Setting::NumericNumeric, 4, Dispersion::Finite(1.0), 2)?;
    let data = generate_scenario(&scenario, 1000)?;
    let (tr, te) = train_test_split(data.len(), 0.7, None, 4)?;
    let (train, test) = (data.subset(&tr), data.subset(&te));

    let grow = GrowConfig::new(3, 20);
    let single = CritTree::grow(&train, &grow)?;
    println!("single tree test risk {:.4}", empirical_risk(&single, &test)?);
    let config = ForestConfig {
        grow,
        resample: Resample::WithReplacement,
    };
    for bags in [1, 5, 20] {
        let forest = fit_bagged(&train, bags, &config, 9)?;
        println!("B = {bags:>2}: test risk {:.4}", empirical_risk(&forest, &test)?);
    }
    let forest = fit_bagged(&train, 4, &config, 9)?;
    let overlay = forest.largest_subpartition_aggregate(DEFAULT_CELL_CAP)?;
    let agree = test
        .records()
        .iter()
        .filter(|r| forest.predict(&r.features) == overlay.predict(&r.features))
        .count();
    println!("B = 4 overlay: {} cells, agrees on {agree}/{} test points", overlay.cells().len(), test.len());
    Ok(())
}
