//! Weakest-link pruning.
//!
//! Starting from the full tree, repeatedly merge the pair of sibling leaves
//! whose merge increases the dispersion the least. Each step yields a smaller
//! subtree; `prune(λ)` returns the one minimizing `dispersion + λ · leaves`.

use serde::{Deserialize, Serialize};

use super::{CritTree, NodeId};
use crate::error::{Error, Result};

/// One tree of the pruning sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruningStep {
    pub leaves: usize,
    pub dispersion: f64,
    /// Node turned into a leaf to reach this tree; `None` for the full tree.
    pub merged: Option<NodeId>,
}

impl CritTree {
    fn collapse_order(&self) -> Vec<usize> {
        let mut collapsed = vec![false; self.nodes.len()];
        let is_leaf = |c: &[bool], i: usize| self.nodes[i].split.is_none() || c[i];
        let mut order = Vec::new();
        loop {
            let mut best: Option<(f64, usize)> = None;
            for (i, node) in self.nodes.iter().enumerate() {
                let Some(b) = &node.split else { continue };
                if collapsed[i] || !is_leaf(&collapsed, b.left) || !is_leaf(&collapsed, b.right) {
                    continue;
                }
                let children = self.nodes[b.left].weighted_impurity() + self.nodes[b.right].weighted_impurity();
                let increase = node.weighted_impurity() - children;
                if best.is_none_or(|(v, _)| increase < v) {
                    best = Some((increase, i));
                }
            }
            match best {
                Some((_, i)) => {
                    collapsed[i] = true;
                    order.push(i);
                }
                None => return order,
            }
        }
    }

    /// The nested sequence from the full tree down to the root alone.
    pub fn pruning_sequence(&self) -> Vec<PruningStep> {
        let order = self.collapse_order();
        let mut steps = Vec::with_capacity(order.len() + 1);
        steps.push(PruningStep {
            leaves: self.leaf_count(),
            dispersion: self.dispersion(),
            merged: None,
        });
        for k in 1..=order.len() {
            let t = self.collapsed(&order[..k]);
            steps.push(PruningStep {
                leaves: t.leaf_count(),
                dispersion: t.dispersion(),
                merged: Some(self.nodes[order[k - 1]].id),
            });
        }
        steps
    }

    /// The subtree of the pruning sequence minimizing `dispersion + λ · leaves`;
    /// near-ties (within 1e-12) go to the smaller tree.
    pub fn prune(&self, lambda: f64) -> Result<CritTree> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "pruning penalty must be finite and nonnegative, got {lambda}"
            )));
        }
        let order = self.collapse_order();
        let steps = self.pruning_sequence();
        let scores: Vec<f64> = steps
            .iter()
            .map(|s| s.dispersion + lambda * s.leaves as f64)
            .collect();
        let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let k = scores
            .iter()
            .rposition(|&v| v <= min + 1e-12)
            .expect("sequence is nonempty");
        Ok(self.collapsed(&order[..k]))
    }

    /// Copy of the tree with the given nodes turned into leaves, compacted.
    fn collapsed(&self, nodes: &[usize]) -> CritTree {
        let mut arena = self.nodes.clone();
        for &i in nodes {
            arena[i].split = None;
        }
        let mut kept = Vec::with_capacity(arena.len());
        fn visit(arena: &[super::CritNode], at: usize, kept: &mut Vec<super::CritNode>) -> usize {
            let slot = kept.len();
            let mut node = arena[at].clone();
            let branch = node.split.take();
            kept.push(node);
            if let Some(mut b) = branch {
                b.left = visit(arena, b.left, kept);
                b.right = visit(arena, b.right, kept);
                kept[slot].split = Some(b);
            }
            slot
        }
        visit(&arena, 0, &mut kept);
        CritTree {
            schema: self.schema.clone(),
            items: self.items,
            config: self.config.clone(),
            training_size: self.training_size,
            nodes: kept,
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::crit::{CritTree, GrowConfig};
    use crate::dataset::{Column, FeatureVector, RankingDataset, Record, Schema};
    use crate::perm::Permutation;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    // Two clean cells at x < 0.5 and x > 0.5, plus one stray ranking on the
    // right that invites a spurious deeper split.
    fn two_cells() -> RankingDataset {
        let mut pts: Vec<(f64, &str)> = (0..8).map(|i| (i as f64 * 0.05, "1,2,3")).collect();
        pts.extend((0..7).map(|i| (0.6 + i as f64 * 0.05, "3,2,1")));
        pts.push((0.98, "3,1,2"));
        RankingDataset::new(
            Schema::new(vec![Column::numeric("x")]),
            3,
            pts.iter()
                .map(|(x, r)| Record {
                    features: FeatureVector::numeric(&[*x]),
                    ranking: p(r),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn sequence_shrinks_and_dispersion_grows() {
        let t = CritTree::grow(&two_cells(), &GrowConfig::new(4, 1)).unwrap();
        let seq = t.pruning_sequence();
        assert_eq!(seq.first().unwrap().leaves, t.leaf_count());
        assert_eq!(seq.last().unwrap().leaves, 1);
        for w in seq.windows(2) {
            assert!(w[1].leaves < w[0].leaves);
            assert!(w[1].dispersion >= w[0].dispersion - 1e-15);
        }
    }

    #[test]
    fn zero_penalty_keeps_full_tree_and_large_penalty_keeps_root() {
        let t = CritTree::grow(&two_cells(), &GrowConfig::new(4, 1)).unwrap();
        assert_eq!(t.prune(0.0).unwrap(), t);
        let root = t.root().weighted_impurity();
        assert_eq!(t.prune(root).unwrap().leaf_count(), 1);
        assert!(t.prune(-1.0).is_err());
    }

    #[test]
    fn small_penalty_keeps_true_split_only() {
        let t = CritTree::grow(&two_cells(), &GrowConfig::new(4, 1)).unwrap();
        assert_eq!(t.leaf_count(), 3);
        // The stray split lowers the dispersion by only 7/128, the main one by about 0.69.
        assert_eq!(t.prune(0.05).unwrap().leaf_count(), 3);
        let pruned = t.prune(0.1).unwrap();
        assert_eq!(pruned.leaf_count(), 2);
        assert_eq!(pruned.predict_at(0.1), p("1,2,3"));
        assert_eq!(pruned.predict_at(0.9), p("3,2,1"));
    }

    impl CritTree {
        fn predict_at(&self, x: f64) -> Permutation {
            use crate::dataset::RankingRule;
            self.predict(&FeatureVector::numeric(&[x]))
        }
    }
}
