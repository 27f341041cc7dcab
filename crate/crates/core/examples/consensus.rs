//! Consensus rankings of small samples: Copeland, exact Kemeny and Borda.

use rankmedian::{
    borda_median, copeland_median, exact_kemeny, gamma_dispersion, pairwise_matrix, pseudo_median, Permutation,
    RankingSample,
};

fn sample(rows: &[&str]) -> RankingSample {
    RankingSample::from_rankings(rows.iter().map(|r| r.parse::<Permutation>().unwrap()).collect()).unwrap()
}

fn main() -> rankmedian::Result<()> {
    for (name, rows) in [
        ("transitive", &["1,2,3", "1,3,2", "2,1,3"][..]),
        ("condorcet cycle", &["1>2>3", "2>3>1", "3>1>2"][..]),
        ("four items", &["1>2>3>4", "2>1>3>4", "1>3>2>4", "4>1>2>3", "1>2>4>3"][..]),
    ] {
        let s = sample(rows);
        let m = pairwise_matrix(&s)?;
        let pm = pseudo_median(&s)?;
        println!("{name}: {} rankings", s.len());
        println!("  pairwise: {}", serde_json::to_string(&m)?);
        println!("  pseudo-median {} via {} (cost {:.3}, sst {})", pm.median.to_ordering_string(), pm.method, pm.cost, pm.sst);
        if pm.sst {
            println!("  copeland      {}", copeland_median(&m)?.to_ordering_string());
        }
        let k = exact_kemeny(&m)?;
        println!("  exact kemeny  {} (cost {:.3})", k.median.to_ordering_string(), k.cost);
        println!("  borda         {}", borda_median(&s)?.to_ordering_string());
        println!("  dispersion γ = {:.3}, noise margin {:.3}", gamma_dispersion(&m), m.noise_margin());
    }
    Ok(())
}
