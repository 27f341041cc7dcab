//! Risk against sample size for the consensus and regression problems.

use rankmedian::evaluation::{consensus_convergence, regression_convergence, NeighborRule, RegressionStudy};
use rankmedian::{Dispersion, Method};

fn main() -> rankmedian::Result<()> {
    let c = consensus_convergence(5, 0.5, &[10, 40, 160, 640], 200, 1)?;
    println!("consensus, n = 5, φ = 0.5 (optimal cost {:.4})", c.floor);
    for p in &c.points {
        println!("  N = {:>4}: excess {:.4} ± {:.4}, center recovered {:.2}", p.size, p.mean, p.std, p.recovery.unwrap());
    }
    for method in [Method::Knn, Method::Crit] {
        let r = regression_convergence(&RegressionStudy {
            n: 4,
            phi: Dispersion::Finite(1.0),
            method,
            trials: 10,
            neighbors: NeighborRule::Sqrt,
            ..RegressionStudy::default()
        })?;
        println!("{} (Bayes risk {:.4}, decreasing pairs {:.2})", r.study, r.floor, r.decreasing_pairs);
        for p in &r.points {
            println!("  N = {:>4}: risk {:.4} ± {:.4}", p.size, p.mean, p.std);
        }
    }
    Ok(())
}
