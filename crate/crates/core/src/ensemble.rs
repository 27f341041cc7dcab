//! Bagged consensus ranking trees.
//!
//! Each tree is grown on its own bootstrap resample with a seed derived from
//! the forest seed. A query is answered by the pseudo-median of the trees'
//! predictions. The same rule can be materialized as a single piecewise
//! constant rule over the overlay of all tree partitions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consensus::{pseudo_median, RankingSample};
use crate::crit::{CritTree, GrowConfig, SplitTest};
use crate::dataset::{FeatureValue, FeatureVector, RankingDataset, RankingRule, Schema};
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Default cap on the number of overlay cells.
pub const DEFAULT_CELL_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resample {
    /// `N` draws with replacement.
    #[default]
    WithReplacement,
    /// The training set itself, for testing the degenerate ensemble.
    Identity,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub grow: GrowConfig,
    pub resample: Resample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaggedForest {
    #[serde(rename = "B")]
    bags: usize,
    seed: u64,
    config: ForestConfig,
    trees: Vec<CritTree>,
}

/// Grows `bags` trees in parallel; the result does not depend on the thread count.
pub fn fit_bagged(data: &RankingDataset, bags: usize, config: &ForestConfig, seed: u64) -> Result<BaggedForest> {
    if bags == 0 {
        return Err(Error::InvalidInput("a forest needs at least one tree".into()));
    }
    if data.is_empty() {
        return Err(Error::InvalidInput("cannot fit a forest on an empty dataset".into()));
    }
    let n = data.len();
    let trees = (0..bags)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64 + 1);
            let indices: Vec<usize> = match config.resample {
                Resample::WithReplacement => (0..n).map(|_| rng.gen_range(0..n)).collect(),
                Resample::Identity => (0..n).collect(),
            };
            let grow = GrowConfig {
                seed: rng.gen(),
                ..config.grow.clone()
            };
            CritTree::grow(&data.subset(&indices), &grow)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BaggedForest {
        bags,
        seed,
        config: config.clone(),
        trees,
    })
}

impl BaggedForest {
    /// Forest made of the given trees; they must share schema and item count.
    pub fn from_trees(trees: Vec<CritTree>, seed: u64) -> Result<Self> {
        let first = trees
            .first()
            .ok_or_else(|| Error::InvalidInput("a forest needs at least one tree".into()))?;
        if trees
            .iter()
            .any(|t| t.items() != first.items() || t.schema() != first.schema())
        {
            return Err(Error::SchemaMismatch("trees disagree on schema or item count".into()));
        }
        Ok(Self {
            bags: trees.len(),
            seed,
            config: ForestConfig {
                grow: first.config().clone(),
                resample: Resample::Identity,
            },
            trees,
        })
    }

    pub fn trees(&self) -> &[CritTree] {
        &self.trees
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    /// Pseudo-median of the per-tree predictions at `x`.
    pub fn predict_aggregated(&self, x: &FeatureVector) -> Permutation {
        aggregate(self.trees.iter().map(|t| t.predict(x)).collect())
    }

    /// Materializes the overlay of all tree partitions, labeling each cell
    /// with the pseudo-median of the trees' leaf consensuses on it. Fails when
    /// the overlay would need more than `cap` cells.
    pub fn largest_subpartition_aggregate(&self, cap: usize) -> Result<SubpartitionRule> {
        let d = self.schema().len();
        let mut cells: Vec<(Vec<Region>, Vec<usize>)> = vec![(vec![Region::Anything; d], Vec::new())];
        for tree in &self.trees {
            let leaves = leaf_regions(tree);
            let mut next = Vec::new();
            for (region, path) in &cells {
                for (leaf_region, leaf) in &leaves {
                    if let Some(r) = intersect(region, leaf_region) {
                        if next.len() == cap {
                            return Err(Error::BudgetExceeded { cap });
                        }
                        let mut p = path.clone();
                        p.push(*leaf);
                        next.push((r, p));
                    }
                }
            }
            cells = next;
        }
        let cells = cells
            .into_iter()
            .map(|(region, leaves)| {
                let median = aggregate(
                    leaves
                        .iter()
                        .zip(&self.trees)
                        .map(|(&l, t)| t.nodes()[l].consensus.clone())
                        .collect(),
                );
                OverlayCell { region, leaves, median }
            })
            .collect();
        Ok(SubpartitionRule {
            schema: self.schema().clone(),
            items: self.items(),
            cells,
        })
    }
}

impl RankingRule for BaggedForest {
    fn predict(&self, x: &FeatureVector) -> Permutation {
        self.predict_aggregated(x)
    }

    fn schema(&self) -> &Schema {
        self.trees[0].schema()
    }

    fn items(&self) -> usize {
        self.trees[0].items()
    }
}

fn aggregate(predictions: Vec<Permutation>) -> Permutation {
    let sample = RankingSample::from_rankings(predictions).expect("at least one tree");
    pseudo_median(&sample).expect("nonempty sample").median
}

/// Constraint of an overlay cell on one feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Anything,
    /// `lo < x ≤ hi`, with infinite ends for unbounded sides.
    Interval { lo: f64, hi: f64 },
    /// Exactly these levels.
    Include(Vec<u32>),
    /// Every level except these, unseen levels included.
    Exclude(Vec<u32>),
}

impl Region {
    fn contains(&self, v: FeatureValue) -> bool {
        match (self, v) {
            (Region::Anything, _) => true,
            (Region::Interval { lo, hi }, FeatureValue::Numeric(x)) => *lo < x && x <= *hi,
            (Region::Include(ls), FeatureValue::Categorical(l)) => ls.contains(&l),
            (Region::Exclude(ls), FeatureValue::Categorical(l)) => !ls.contains(&l),
            _ => false,
        }
    }

    fn meet(&self, other: &Region) -> Option<Region> {
        use Region::*;
        let r = match (self, other) {
            (Anything, r) | (r, Anything) => r.clone(),
            (Interval { lo: a, hi: b }, Interval { lo: c, hi: d }) => Interval {
                lo: a.max(*c),
                hi: b.min(*d),
            },
            (Include(a), Include(b)) => Include(a.iter().copied().filter(|l| b.contains(l)).collect()),
            (Include(a), Exclude(b)) | (Exclude(b), Include(a)) => {
                Include(a.iter().copied().filter(|l| !b.contains(l)).collect())
            }
            (Exclude(a), Exclude(b)) => {
                let mut u = a.clone();
                u.extend(b.iter().copied().filter(|l| !a.contains(l)));
                u.sort_unstable();
                Exclude(u)
            }
            _ => return None,
        };
        match &r {
            Interval { lo, hi } if lo >= hi => None,
            Include(ls) if ls.is_empty() => None,
            _ => Some(r),
        }
    }
}

fn intersect(a: &[Region], b: &[Region]) -> Option<Vec<Region>> {
    a.iter().zip(b).map(|(x, y)| x.meet(y)).collect()
}

/// Region of every leaf of `tree`, with the leaf's arena index.
fn leaf_regions(tree: &CritTree) -> Vec<(Vec<Region>, usize)> {
    let d = tree.schema().len();
    let mut out = Vec::new();
    let mut stack = vec![(0usize, vec![Region::Anything; d])];
    while let Some((at, region)) = stack.pop() {
        let node = &tree.nodes()[at];
        let Some(b) = &node.split else {
            out.push((region, at));
            continue;
        };
        let m = b.rule.feature;
        let (left, right) = match &b.rule.test {
            SplitTest::Threshold(s) => (
                Region::Interval {
                    lo: f64::NEG_INFINITY,
                    hi: *s,
                },
                Region::Interval {
                    lo: *s,
                    hi: f64::INFINITY,
                },
            ),
            SplitTest::Subset(ls) => (Region::Include(ls.clone()), Region::Exclude(ls.clone())),
        };
        for (child, side) in [(b.right, right), (b.left, left)] {
            if let Some(r) = region[m].meet(&side) {
                let mut next = region.clone();
                next[m] = r;
                stack.push((child, next));
            }
        }
    }
    out.sort_by_key(|&(_, at)| at);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayCell {
    pub region: Vec<Region>,
    /// Leaf index reached in each tree.
    pub leaves: Vec<usize>,
    pub median: Permutation,
}

impl OverlayCell {
    pub fn contains(&self, x: &FeatureVector) -> bool {
        self.region.iter().zip(x.values()).all(|(r, &v)| r.contains(v))
    }
}

/// A single piecewise constant rule over the overlay of several partitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubpartitionRule {
    schema: Schema,
    items: usize,
    cells: Vec<OverlayCell>,
}

impl SubpartitionRule {
    pub fn cells(&self) -> &[OverlayCell] {
        &self.cells
    }

    pub fn cell(&self, x: &FeatureVector) -> Option<&OverlayCell> {
        self.cells.iter().find(|c| c.contains(x))
    }
}

impl RankingRule for SubpartitionRule {
    fn predict(&self, x: &FeatureVector) -> Permutation {
        self.cell(x).expect("overlay cells cover the feature space").median.clone()
    }

    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn items(&self) -> usize {
        self.items
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, Record};

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn line(points: &[(f64, &str)]) -> RankingDataset {
        RankingDataset::new(
            Schema::new(vec![Column::numeric("x")]),
            3,
            points
                .iter()
                .map(|(x, r)| Record {
                    features: FeatureVector::numeric(&[*x]),
                    ranking: p(r),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_identity_bag_is_the_tree() {
        let d = line(&[(0.1, "1,2,3"), (0.2, "1,2,3"), (0.7, "3,2,1"), (0.8, "3,2,1")]);
        let cfg = ForestConfig {
            grow: GrowConfig::new(3, 1),
            resample: Resample::Identity,
        };
        let f = fit_bagged(&d, 1, &cfg, 7).unwrap();
        let mut grow = cfg.grow.clone();
        grow.seed = f.trees()[0].config().seed;
        assert_eq!(f.trees()[0], CritTree::grow(&d, &grow).unwrap());
        let rule = f.largest_subpartition_aggregate(10).unwrap();
        assert_eq!(rule.cells().len(), f.trees()[0].leaf_count());
    }

    #[test]
    fn stumps_overlay_into_three_cells() {
        let a = CritTree::grow(&line(&[(0.1, "1,2,3"), (0.5, "3,2,1")]), &GrowConfig::new(1, 1)).unwrap();
        let b = CritTree::grow(&line(&[(0.5, "1,2,3"), (0.9, "3,2,1")]), &GrowConfig::new(1, 1)).unwrap();
        let f = BaggedForest::from_trees(vec![a, b], 0).unwrap();
        let rule = f.largest_subpartition_aggregate(10).unwrap();
        assert_eq!(rule.cells().len(), 3);
        for x in [0.0, 0.3, 0.5, 0.6, 0.7, 1.0] {
            let q = FeatureVector::numeric(&[x]);
            assert_eq!(rule.predict(&q), f.predict_aggregated(&q));
        }
        assert!(matches!(
            f.largest_subpartition_aggregate(2),
            Err(Error::BudgetExceeded { cap: 2 })
        ));
    }

    #[test]
    fn worked_aggregations() {
        assert_eq!(aggregate(vec![p("1,2,3"), p("1,2,3"), p("2,1,3")]), p("1,2,3"));
        assert_eq!(aggregate(vec![p("1,2,3"), p("2,3,1"), p("3,1,2")]), p("1,2,3"));
    }

    #[test]
    fn region_meets() {
        use Region::*;
        assert_eq!(Include(vec![0, 1]).meet(&Exclude(vec![1])), Some(Include(vec![0])));
        assert_eq!(Include(vec![1]).meet(&Exclude(vec![1])), None);
        assert_eq!(Exclude(vec![2]).meet(&Exclude(vec![0])), Some(Exclude(vec![0, 2])));
        assert_eq!(
            Interval { lo: 0.0, hi: 0.5 }.meet(&Interval { lo: 0.5, hi: 1.0 }),
            None
        );
    }

    #[test]
    fn zero_bags_rejected() {
        let d = line(&[(0.1, "1,2,3")]);
        assert!(fit_bagged(&d, 0, &ForestConfig::default(), 0).is_err());
    }
}
