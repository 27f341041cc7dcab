#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rankmedian::{
    Column, CritTree, FeatureVector, GrowConfig, PairwiseMatrix, Permutation, RankingDataset, Record, Schema,
};

pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Permutation {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    Permutation::from_ordering(&order).unwrap()
}

// Margins |p - 1/2| drawn from a mix of uniform and near-tie values.
fn margin<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen_range(1e-6..0.5);
    if rng.gen_bool(0.3) {
        u.powi(3) * 4.0 + 1e-6
    } else {
        u
    }
}

/// A strictly stochastically transitive matrix: its majority relation is the
/// order of a random permutation and no entry equals 1/2.
pub fn strict_sst<R: Rng>(n: usize, rng: &mut R) -> (PairwiseMatrix, Permutation) {
    let sigma = random_permutation(n, rng);
    let mut upper = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = margin(rng).min(0.5);
            upper.push(if sigma.prefers(i, j) { 0.5 + m } else { 0.5 - m });
        }
    }
    (PairwiseMatrix::from_upper(n, upper).unwrap(), sigma)
}

/// A (weakly) stochastically transitive matrix: items fall in random tie
/// groups, ordered pairs across groups get a margin, pairs within a group 1/2.
pub fn weak_sst<R: Rng>(n: usize, rng: &mut R) -> PairwiseMatrix {
    let groups: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut upper = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = margin(rng).min(0.5);
            upper.push(match groups[i].cmp(&groups[j]) {
                std::cmp::Ordering::Less => 0.5 + m,
                std::cmp::Ordering::Greater => 0.5 - m,
                std::cmp::Ordering::Equal => 0.5,
            });
        }
    }
    PairwiseMatrix::from_upper(n, upper).unwrap()
}

/// Random dataset with one numeric and one categorical feature.
pub fn mixed_dataset<R: Rng>(n: usize, count: usize, levels: usize, rng: &mut R) -> RankingDataset {
    let schema = Schema::new(vec![
        Column::numeric("x"),
        Column::categorical("c", (0..levels).map(|l| l.to_string())),
    ]);
    let records = (0..count)
        .map(|_| {
            let level = rng.gen_range(0..levels) as u32;
            Record {
                features: FeatureVector(vec![
                    rankmedian::FeatureValue::Numeric((rng.gen_range(0..20) as f64) / 20.0),
                    rankmedian::FeatureValue::Categorical(level),
                ]),
                ranking: random_permutation(n, rng),
            }
        })
        .collect();
    RankingDataset::new(schema, n, records).unwrap()
}

/// Random numeric dataset on `[0, 1]^d` with rankings tied to the first coordinate plus noise.
pub fn numeric_dataset<R: Rng>(n: usize, d: usize, count: usize, rng: &mut R) -> RankingDataset {
    let schema = Schema::new((0..d).map(|m| Column::numeric(format!("x{m}"))).collect());
    let a = random_permutation(n, rng);
    let b = random_permutation(n, rng);
    let records = (0..count)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
            let ranking = if rng.gen_bool(0.2) {
                random_permutation(n, rng)
            } else if x[0] < 0.5 {
                a.clone()
            } else {
                b.clone()
            };
            Record {
                features: FeatureVector::numeric(&x),
                ranking,
            }
        })
        .collect();
    RankingDataset::new(schema, n, records).unwrap()
}

pub fn grow(data: &RankingDataset, depth: usize, min_leaf: usize) -> CritTree {
    CritTree::grow(data, &GrowConfig::new(depth, min_leaf)).unwrap()
}
