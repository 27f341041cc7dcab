//! Consensus ranking trees (CRIT).
//!
//! A tree recursively splits the feature space with axis-parallel tests,
//! choosing at each node the split that minimizes the weighted γ-impurity of
//! its children, and labels every node with the pseudo-median of its local
//! sample. Growth stops at the maximum depth, when no split strictly lowers
//! the impurity, or when a child would hold fewer than `min_leaf` records.
//!
//! Node weights are relative to the training set size, so the weighted
//! impurities of all leaves sum to the tree dispersion.

mod export;
mod prune;
mod split;

pub use prune::PruningStep;
pub use split::{best_split, node_impurity, split_cost, SplitCandidate, SplitRule, SplitTest, EXHAUSTIVE_LEVELS};

use rand::{seq::index::sample as sample_indices, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::consensus::{gamma_dispersion, pairwise_matrix, pseudo_median, MedianMethod, PairwiseMatrix, RankingSample};
use crate::dataset::{FeatureVector, RankingDataset, RankingRule, Schema};
use crate::error::{Error, Result};
use crate::perm::Permutation;

use split::{weighted_impurity, Concordance, SplitSearch};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Number of features drawn at random at each node; all when `None`.
    pub max_features: Option<usize>,
    /// Seed of the per-node feature draws.
    pub seed: u64,
}

impl Default for GrowConfig {
    fn default() -> Self {
        Self {
            max_depth: 8,
            min_leaf: 5,
            max_features: None,
            seed: 0,
        }
    }
}

impl GrowConfig {
    pub fn new(max_depth: usize, min_leaf: usize) -> Self {
        Self {
            max_depth,
            min_leaf,
            ..Self::default()
        }
    }
}

/// Position of a node: children of `(j, k)` are `(j + 1, 2k)` and `(j + 1, 2k + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub depth: usize,
    pub index: usize,
}

impl NodeId {
    pub const ROOT: NodeId = NodeId { depth: 0, index: 0 };

    fn children(self) -> (NodeId, NodeId) {
        let child = |k| NodeId {
            depth: self.depth + 1,
            index: 2 * self.index + k,
        };
        (child(0), child(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub rule: SplitRule,
    /// Weighted impurity `Λ` of the two children.
    pub cost: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CritNode {
    pub id: NodeId,
    pub count: usize,
    /// Share of the training records reaching this node.
    pub weight: f64,
    /// `γ̂ = Σ p̂ (1 - p̂)` of the local sample.
    pub impurity: f64,
    pub pairwise: PairwiseMatrix,
    /// Pseudo-median of the local sample; the prediction when this node is a leaf.
    pub consensus: Permutation,
    pub method: MedianMethod,
    /// Mean distance of `consensus` to the local sample.
    pub cost: f64,
    pub split: Option<Branch>,
}

impl CritNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }

    pub fn weighted_impurity(&self) -> f64 {
        self.weight * self.impurity
    }
}

/// Pairwise Gini index `4 / (n (n - 1)) · γ̂`, the impurity rescaled to `[0, 1]`.
pub fn pairwise_gini(impurity: f64, n: usize) -> f64 {
    4.0 * impurity / (n * (n - 1)) as f64
}

/// A grown tree; `nodes[0]` is the root and nodes are stored in preorder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CritTree {
    schema: Schema,
    items: usize,
    config: GrowConfig,
    training_size: usize,
    nodes: Vec<CritNode>,
}

impl CritTree {
    /// Grows a tree on `data`. Deterministic given data and config.
    pub fn grow(data: &RankingDataset, config: &GrowConfig) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidInput("cannot grow a tree on an empty dataset".into()));
        }
        if config.min_leaf == 0 {
            return Err(Error::InvalidInput("minimum leaf size must be at least 1".into()));
        }
        let d = data.schema().len();
        if let Some(m) = config.max_features {
            if m == 0 || m > d {
                return Err(Error::InvalidInput(format!(
                    "max_features = {m} outside 1..={d}"
                )));
            }
        }
        let conc = Concordance::new(data);
        let mut builder = Builder {
            data,
            config,
            search: SplitSearch {
                data,
                conc: &conc,
                total: data.len(),
                min_leaf: config.min_leaf,
            },
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            nodes: Vec::new(),
        };
        builder.build((0..data.len()).collect(), NodeId::ROOT);
        log::debug!("grew tree with {} nodes on {} records", builder.nodes.len(), data.len());
        Ok(Self {
            schema: data.schema().clone(),
            items: data.items(),
            config: config.clone(),
            training_size: data.len(),
            nodes: builder.nodes,
        })
    }

    pub fn config(&self) -> &GrowConfig {
        &self.config
    }

    pub fn training_size(&self) -> usize {
        self.training_size
    }

    pub fn nodes(&self) -> &[CritNode] {
        &self.nodes
    }

    pub fn root(&self) -> &CritNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &CritNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.id.depth).max().unwrap_or(0)
    }

    /// Arena index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: &FeatureVector) -> usize {
        let mut at = 0;
        while let Some(b) = &self.nodes[at].split {
            at = if b.rule.goes_left(x) { b.left } else { b.right };
        }
        at
    }

    pub fn leaf(&self, x: &FeatureVector) -> &CritNode {
        &self.nodes[self.leaf_index(x)]
    }

    /// Weighted leaf impurity `Σ μ̂(C) γ̂(C)`.
    pub fn dispersion(&self) -> f64 {
        self.leaves().map(CritNode::weighted_impurity).sum()
    }

    /// Training risk of the tree, `Σ μ̂(C) L̂_C(σ_C)` over leaves.
    pub fn training_risk(&self) -> f64 {
        self.leaves().map(|n| n.weight * n.cost).sum()
    }

    /// Total weighted impurity decrease of the splits on each feature.
    pub fn variable_importance(&self) -> Vec<f64> {
        let mut importance = vec![0.0; self.schema.len()];
        for n in &self.nodes {
            if let Some(b) = &n.split {
                importance[b.rule.feature] += (n.weighted_impurity() - b.cost).max(0.0);
            }
        }
        importance
    }
}

impl RankingRule for CritTree {
    fn predict(&self, x: &FeatureVector) -> Permutation {
        self.leaf(x).consensus.clone()
    }

    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn items(&self) -> usize {
        self.items
    }
}

struct Builder<'a> {
    data: &'a RankingDataset,
    config: &'a GrowConfig,
    search: SplitSearch<'a>,
    rng: ChaCha8Rng,
    nodes: Vec<CritNode>,
}

impl Builder<'_> {
    fn build(&mut self, records: Vec<usize>, id: NodeId) -> usize {
        let at = self.nodes.len();
        let node = self.node(&records, id);
        let splittable = id.depth < self.config.max_depth
            && records.len() >= 2 * self.config.min_leaf
            && node.impurity > 0.0;
        self.nodes.push(node);
        if !splittable {
            return at;
        }
        let d = self.data.schema().len();
        let features: Vec<usize> = match self.config.max_features {
            Some(m) if m < d => {
                let mut f = sample_indices(&mut self.rng, d, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        };
        let total = self.search.total;
        let parent = weighted_impurity(&self.search.conc.counts(&records), records.len(), total);
        if let Some(c) = self.search.best(&records, &features, parent) {
            let (lid, rid) = id.children();
            let left = self.build(c.left, lid);
            let right = self.build(c.right, rid);
            self.nodes[at].split = Some(Branch {
                rule: c.rule,
                cost: c.cost,
                left,
                right,
            });
        }
        at
    }

    fn node(&self, records: &[usize], id: NodeId) -> CritNode {
        let sample = RankingSample::new(
            self.data.items(),
            records.iter().map(|&r| self.data.records()[r].ranking.clone()).collect(),
        )
        .expect("rankings share n");
        let pairwise = pairwise_matrix(&sample).expect("nonempty node");
        let consensus = pseudo_median(&sample).expect("nonempty node");
        CritNode {
            id,
            count: records.len(),
            weight: records.len() as f64 / self.search.total as f64,
            impurity: gamma_dispersion(&pairwise),
            pairwise,
            consensus: consensus.median,
            method: consensus.method,
            cost: consensus.cost,
            split: None,
        }
    }
}
