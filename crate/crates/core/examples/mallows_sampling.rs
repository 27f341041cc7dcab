//! Mallows sampling against the exact distribution, and a synthetic scenario.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankmedian::mallows::{enumerate_distribution, generate_scenario, oracle_risk, sample};
use rankmedian::{pairwise_matrix, pseudo_median, Dispersion, MallowsModel, Setting, SyntheticScenario};

fn main() -> rankmedian::Result<()> {
    let model = MallowsModel::new("2,1,4,3".parse()?, 1.0)?;
    let exact = enumerate_distribution(&model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = sample(&model, 5000, &mut rng)?;
    let emp = pairwise_matrix(&s)?;
    println!("center {} φ = 1", model.center());
    println!("  P(center) = {:.4}", exact.probability(model.center()));
    for (k, (a, b)) in exact.pairwise.upper().iter().zip(emp.upper()).enumerate() {
        println!("  pair {k}: exact {a:.4}  empirical {b:.4}");
    }
    println!("  empirical pseudo-median {}", pseudo_median(&s)?.median);

    let scenario = SyntheticScenario::preset(Setting::NumericCategorical, 4, Dispersion::Finite(2.0), 7)?;
    let data = generate_scenario(&scenario, 10)?;
    println!("\nsetting 2, n = 4, φ = 2: Bayes risk {:.4}", oracle_risk(&scenario)?);
    println!("centers: {:?}", scenario.centers());
    let mut out = Vec::new();
    data.write_csv(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
