//! γ-impurity and the exhaustive axis-parallel split search.

use serde::{Deserialize, Serialize};

use crate::consensus::{gamma_dispersion, pairwise_matrix, RankingSample};
use crate::dataset::{FeatureKind, FeatureValue, FeatureVector, RankingDataset};
use crate::perm::pair_count;

/// Level count up to which categorical splits are searched exhaustively.
pub const EXHAUSTIVE_LEVELS: usize = 10;

/// A split must lower the weighted impurity by more than this.
pub(crate) const MIN_DECREASE: f64 = 1e-12;

/// Test sending a record to the left child.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTest {
    /// `x ≤ s` goes left.
    Threshold(f64),
    /// Level in the set goes left; every other level, including levels never
    /// seen in training, goes right.
    Subset(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub feature: usize,
    #[serde(flatten)]
    pub test: SplitTest,
}

impl SplitRule {
    pub fn goes_left(&self, x: &FeatureVector) -> bool {
        match (&self.test, x.get(self.feature)) {
            (SplitTest::Threshold(s), FeatureValue::Numeric(v)) => v <= *s,
            (SplitTest::Subset(levels), FeatureValue::Categorical(l)) => levels.contains(&l),
            _ => false,
        }
    }
}

/// Node impurity `γ̂ = Σ p̂ (1 - p̂)`; zero for an empty sample.
pub fn node_impurity(sample: &RankingSample) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    gamma_dispersion(&pairwise_matrix(sample).expect("nonempty sample"))
}

/// `Λ = μ̂_L γ̂_L + μ̂_R γ̂_R` with weights `N_side / total`.
pub fn split_cost(left: &RankingSample, right: &RankingSample, total: usize) -> f64 {
    let w = |s: &RankingSample| s.len() as f64 / total as f64;
    w(left) * node_impurity(left) + w(right) * node_impurity(right)
}

/// `(c / N) Σ p̂ (1 - p̂)` from concordance counts over `c` records.
pub(crate) fn weighted_impurity(counts: &[usize], c: usize, total: usize) -> f64 {
    if c == 0 {
        return 0.0;
    }
    let s: usize = counts.iter().map(|&k| k * (c - k)).sum();
    s as f64 / (c as f64 * total as f64)
}

/// Per-record concordance indicators, one byte per item pair.
pub(crate) struct Concordance {
    pairs: usize,
    bits: Vec<u8>,
}

impl Concordance {
    pub(crate) fn new(data: &RankingDataset) -> Self {
        let n = data.items();
        let pairs = pair_count(n);
        let mut bits = Vec::with_capacity(pairs * data.len());
        for r in data.records() {
            let ranks = r.ranking.ranks();
            for i in 0..n {
                for j in i + 1..n {
                    bits.push(u8::from(ranks[i] < ranks[j]));
                }
            }
        }
        Self { pairs, bits }
    }

    pub(crate) fn pairs(&self) -> usize {
        self.pairs
    }

    fn row(&self, record: usize) -> &[u8] {
        &self.bits[record * self.pairs..(record + 1) * self.pairs]
    }

    pub(crate) fn add(&self, record: usize, counts: &mut [usize]) {
        for (c, &b) in counts.iter_mut().zip(self.row(record)) {
            *c += b as usize;
        }
    }

    pub(crate) fn counts(&self, records: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.pairs];
        for &r in records {
            self.add(r, &mut counts);
        }
        counts
    }
}

/// Best split found for a node.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitCandidate {
    pub rule: SplitRule,
    /// `Λ` of the split.
    pub cost: f64,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

pub(crate) struct SplitSearch<'a> {
    pub data: &'a RankingDataset,
    pub conc: &'a Concordance,
    pub total: usize,
    pub min_leaf: usize,
}

impl SplitSearch<'_> {
    /// Lowest-cost split over `features` (scanned in the given order, which
    /// callers keep ascending) that beats `parent_cost` and respects the
    /// minimum leaf size. Ties keep the earliest candidate.
    pub(crate) fn best(&self, records: &[usize], features: &[usize], parent_cost: f64) -> Option<SplitCandidate> {
        let mut best: Option<(SplitRule, f64)> = None;
        let mut best_cost = parent_cost - MIN_DECREASE;
        for &m in features {
            let found = match &self.data.schema().columns[m].kind {
                FeatureKind::Numeric => self.numeric(records, m),
                FeatureKind::Categorical { .. } => self.categorical(records, m),
            };
            if let Some((rule, cost)) = found {
                if cost < best_cost {
                    best_cost = cost;
                    best = Some((rule, cost));
                }
            }
        }
        best.map(|(rule, cost)| {
            let (left, right): (Vec<usize>, Vec<usize>) = records
                .iter()
                .partition(|&&r| rule.goes_left(&self.data.records()[r].features));
            SplitCandidate { rule, cost, left, right }
        })
    }

    fn value(&self, record: usize, m: usize) -> FeatureValue {
        self.data.records()[record].features.get(m)
    }

    fn numeric(&self, records: &[usize], m: usize) -> Option<(SplitRule, f64)> {
        let mut sorted: Vec<(f64, usize)> = records
            .iter()
            .map(|&r| (self.value(r, m).as_numeric().expect("numeric column"), r))
            .collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let c = sorted.len();
        let total_counts = self.conc.counts(records);
        let mut left = vec![0usize; self.conc.pairs()];
        let mut right = vec![0usize; self.conc.pairs()];
        let mut best: Option<(f64, f64)> = None;
        for t in 0..c.saturating_sub(1) {
            let r = sorted[t].1;
            self.conc.add(r, &mut left);
            let (a, b) = (sorted[t].0, sorted[t + 1].0);
            let nl = t + 1;
            if a == b || nl < self.min_leaf || c - nl < self.min_leaf {
                continue;
            }
            for ((rc, tc), lc) in right.iter_mut().zip(&total_counts).zip(&left) {
                *rc = tc - lc;
            }
            let cost = weighted_impurity(&left, nl, self.total) + weighted_impurity(&right, c - nl, self.total);
            if best.is_none_or(|(bc, _)| cost < bc - MIN_DECREASE) {
                let mut s = a + (b - a) / 2.0;
                if !(s >= a && s < b) {
                    s = a;
                }
                best = Some((cost, s));
            }
        }
        best.map(|(cost, s)| {
            (
                SplitRule {
                    feature: m,
                    test: SplitTest::Threshold(s),
                },
                cost,
            )
        })
    }

    fn categorical(&self, records: &[usize], m: usize) -> Option<(SplitRule, f64)> {
        // Levels present in the node, ascending, with their counts.
        let mut by_level: Vec<(u32, Vec<usize>)> = Vec::new();
        let mut sorted: Vec<(u32, usize)> = records
            .iter()
            .map(|&r| (self.value(r, m).as_level().expect("categorical column"), r))
            .collect();
        sorted.sort_unstable();
        for (l, r) in sorted {
            match by_level.last_mut() {
                Some((last, rs)) if *last == l => rs.push(r),
                _ => by_level.push((l, vec![r])),
            }
        }
        let k = by_level.len();
        if k < 2 {
            return None;
        }
        let level_counts: Vec<Vec<usize>> = by_level.iter().map(|(_, rs)| self.conc.counts(rs)).collect();
        let sizes: Vec<usize> = by_level.iter().map(|(_, rs)| rs.len()).collect();
        let c: usize = sizes.iter().sum();
        let total_counts: Vec<usize> = (0..self.conc.pairs())
            .map(|q| level_counts.iter().map(|lc| lc[q]).sum())
            .collect();

        let evaluate = |members: &[usize]| -> Option<f64> {
            let mut left = vec![0usize; self.conc.pairs()];
            let mut nl = 0;
            for &g in members {
                nl += sizes[g];
                for (a, b) in left.iter_mut().zip(&level_counts[g]) {
                    *a += b;
                }
            }
            if nl < self.min_leaf || c - nl < self.min_leaf {
                return None;
            }
            let right: Vec<usize> = total_counts.iter().zip(&left).map(|(t, l)| t - l).collect();
            Some(weighted_impurity(&left, nl, self.total) + weighted_impurity(&right, c - nl, self.total))
        };

        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut consider = |members: Vec<usize>| {
            if let Some(cost) = evaluate(&members) {
                if best.as_ref().is_none_or(|(bc, _)| cost < bc - MIN_DECREASE) {
                    best = Some((cost, members));
                }
            }
        };
        if k <= EXHAUSTIVE_LEVELS {
            // Proper subsets containing the first level, in increasing bitmask order.
            let full = (1u32 << k) - 1;
            for mask in (1..full).step_by(2) {
                consider((0..k).filter(|g| mask >> g & 1 == 1).collect());
            }
        } else {
            // Order levels by agreement of their pairwise preferences with the
            // node's majority, then scan contiguous prefixes.
            let node = RankingSample::new(
                self.data.items(),
                records.iter().map(|&r| self.data.records()[r].ranking.clone()).collect(),
            )
            .expect("node rankings share n");
            let pm = pairwise_matrix(&node).expect("nonempty node");
            let mut order: Vec<(f64, usize)> = (0..k)
                .map(|g| {
                    let score = level_counts[g]
                        .iter()
                        .zip(pm.upper())
                        .map(|(&cnt, &p)| (cnt as f64 / sizes[g] as f64 - 0.5) * (p - 0.5))
                        .sum::<f64>();
                    (score, g)
                })
                .collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for end in 1..k {
                let mut members: Vec<usize> = order[..end].iter().map(|&(_, g)| g).collect();
                members.sort_unstable();
                consider(members);
            }
        }
        best.map(|(cost, members)| {
            (
                SplitRule {
                    feature: m,
                    test: SplitTest::Subset(members.iter().map(|&g| by_level[g].0).collect()),
                },
                cost,
            )
        })
    }
}

/// Best split of the whole dataset treated as a root node, or `None` when no
/// candidate strictly lowers its impurity with both children of at least
/// `min_leaf` records.
pub fn best_split(data: &RankingDataset, min_leaf: usize) -> Option<SplitCandidate> {
    if data.is_empty() {
        return None;
    }
    let conc = Concordance::new(data);
    let records: Vec<usize> = (0..data.len()).collect();
    let parent = weighted_impurity(&conc.counts(&records), data.len(), data.len());
    let features: Vec<usize> = (0..data.schema().len()).collect();
    SplitSearch {
        data,
        conc: &conc,
        total: data.len(),
        min_leaf: min_leaf.max(1),
    }
    .best(&records, &features, parent)
}
