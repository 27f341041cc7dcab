//! Growing, inspecting and pruning a consensus ranking tree.

use rankmedian::evaluation::train_test_split;
use rankmedian::mallows::generate_scenario;
use rankmedian::{empirical_risk, CritTree, Dispersion, GrowConfig, Setting, SyntheticScenario};

fn main() -> rankmedian::Result<()> {
    let scenario = SyntheticScenario::preset(Setting::NumericCategorical, 4, Dispersion::Finite(2.0), 5)?;
    let data = generate_scenario(&scenario, 1000)?;
    let (tr, te) = train_test_split(data.len(), 0.7, None, 1)?;
    let (train, test) = (data.subset(&tr), data.subset(&te));

    let tree = CritTree::grow(&train, &GrowConfig::new(6, 10))?;
    println!("{} leaves, depth {}, dispersion {:.4}", tree.leaf_count(), tree.depth(), tree.dispersion());
    println!("importance {:?}", tree.variable_importance());
    println!("pruning sequence:");
    for step in tree.pruning_sequence() {
        println!("  {:>2} leaves  dispersion {:.4}", step.leaves, step.dispersion);
    }
    for lambda in [0.0, 0.005, 0.02, 0.1] {
        let t = tree.prune(lambda)?;
        println!("λ = {lambda:<5}: {:>2} leaves, test risk {:.4}", t.leaf_count(), empirical_risk(&t, &test)?);
    }
    println!("\n{}", tree.prune(0.02)?.to_dot());
    Ok(())
}
