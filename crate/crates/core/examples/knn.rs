//! k-nearest-neighbor ranking regression on a synthetic scenario.

use rankmedian::evaluation::train_test_split;
use rankmedian::mallows::{generate_scenario, oracle_risk};
use rankmedian::{empirical_risk, DistanceSpec, Dispersion, KnnModel, Setting, SyntheticScenario};

fn main() -> rankmedian::Result<()> {
    let scenario = SyntheticScenario::preset(Setting::NumericNumeric, 4, Dispersion::Finite(2.0), 3)?;
    let data = generate_scenario(&scenario, 1500)?;
    let (tr, te) = train_test_split(data.len(), 0.7, None, 11)?;
    let (train, test) = (data.subset(&tr), data.subset(&te));
    println!("Bayes risk {:.4}", oracle_risk(&scenario)?);
    for k in [1, 5, 15, 40] {
        let model = KnnModel::fit(train.clone(), k, DistanceSpec::euclidean())?;
        println!("k = {k:>2}: test risk {:.4}", empirical_risk(&model, &test)?);
    }
    let model = KnnModel::fit(train, 15, DistanceSpec::euclidean())?;
    let x = &test.records()[0].features;
    let detail = model.predict_detailed(x);
    println!("at {:?}: {} via {} over neighbors {:?}", x.values(), detail.median, detail.method, model.neighbors(x));
    println!("truth at that point: {}", scenario.centers()[scenario.locate(x).unwrap()]);
    Ok(())
}
