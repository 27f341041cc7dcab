//! Ranking median regression: Kemeny consensus over permutations, the
//! k-nearest-neighbor and consensus-tree (CRIT) ranking regressors, bagging,
//! and a seeded simulation harness built on Mallows models.

pub mod cli;
pub mod consensus;
pub mod crit;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod knn;
pub mod mallows;
pub mod perm;

pub use consensus::{
    borda_median, check_lemma4, copeland_median, exact_kemeny, excess_risk_pointwise, expected_distance,
    gamma_dispersion, gamma_ustat, is_stochastically_transitive, optimal_cost, pairwise_matrix, pseudo_median,
    KemenyResult, Lemma4Report, MedianMethod, PairwiseMatrix, RankingSample,
};
pub use dataset::{Column, ConstantRule, FeatureKind, FeatureValue, FeatureVector, RankingDataset, RankingRule, Record, Schema};
pub use crit::{CritTree, GrowConfig};
pub use ensemble::{fit_bagged, BaggedForest, ForestConfig, Resample};
pub use error::{Error, Result};
pub use evaluation::{empirical_risk, run_table1, Method, Table1Config};
pub use knn::{DistanceSpec, KnnModel};
pub use mallows::{Dispersion, MallowsModel, Setting, SyntheticScenario};
pub use perm::{all_permutations, concordant, kendall_tau, ItemPair, Permutation, ORACLE_CAP};
