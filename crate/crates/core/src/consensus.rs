//! Consensus rankings of empirical distributions over permutations.
//!
//! Everything here works from the pairwise probabilities
//! `p(i, j) = P{Σ(i) < Σ(j)}`. Under strict stochastic transitivity the Kemeny
//! median is unique and equals the Copeland ranking, and the optimal expected
//! distance is `Σ min(p, 1 - p)`. When transitivity fails on a finite sample,
//! [`pseudo_median`] falls back to the Borda count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{all_permutations, pair_count, pair_index, ItemPair, Permutation, ORACLE_CAP};

/// `|p - 1/2|` at or below this value counts as an exact tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

const WEIGHT_TOLERANCE: f64 = 1e-9;

/// A weighted multiset of rankings over the same `n` items.
#[derive(Clone, Debug, PartialEq)]
pub struct RankingSample {
    items: usize,
    rankings: Vec<Permutation>,
    weights: Option<Vec<f64>>,
}

impl RankingSample {
    /// Uniformly weighted sample. May be empty.
    pub fn new(items: usize, rankings: Vec<Permutation>) -> Result<Self> {
        if let Some(bad) = rankings.iter().find(|r| r.len() != items) {
            return Err(Error::DimensionMismatch {
                expected: items,
                got: bad.len(),
            });
        }
        Ok(Self {
            items,
            rankings,
            weights: None,
        })
    }

    /// Uniform sample whose item count is taken from the first ranking.
    pub fn from_rankings(rankings: Vec<Permutation>) -> Result<Self> {
        let items = rankings
            .first()
            .map(Permutation::len)
            .ok_or_else(|| Error::InvalidInput("empty ranking sample".into()))?;
        Self::new(items, rankings)
    }

    /// Sample with explicit nonnegative weights summing to one.
    pub fn weighted(items: usize, rankings: Vec<Permutation>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != rankings.len() {
            return Err(Error::InvalidInput(format!(
                "{} weights for {} rankings",
                weights.len(),
                rankings.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        let mut sample = Self::new(items, rankings)?;
        sample.weights = Some(weights);
        Ok(sample)
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub fn rankings(&self) -> &[Permutation] {
        &self.rankings
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.is_none()
    }

    /// Weight of the `k`-th ranking.
    pub fn weight(&self, k: usize) -> f64 {
        match &self.weights {
            Some(w) => w[k],
            None => 1.0 / self.rankings.len() as f64,
        }
    }

    /// Mean Kendall distance from `sigma` to the sample, computed directly.
    pub fn mean_distance(&self, sigma: &Permutation) -> Result<f64> {
        if sigma.len() != self.items {
            return Err(Error::DimensionMismatch {
                expected: self.items,
                got: sigma.len(),
            });
        }
        Ok(self
            .rankings
            .iter()
            .enumerate()
            .map(|(k, r)| self.weight(k) * r.distance(sigma) as f64)
            .sum())
    }
}

/// Pairwise preference probabilities `p(i, j)` for every `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseMatrix {
    n: usize,
    p: Vec<f64>,
}

impl PairwiseMatrix {
    /// Builds a matrix from the upper triangle in lexicographic pair order.
    pub fn from_upper(n: usize, p: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 items, got {n}")));
        }
        if p.len() != pair_count(n) {
            return Err(Error::InvalidInput(format!(
                "{} probabilities given, {} pairs expected",
                p.len(),
                pair_count(n)
            )));
        }
        if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("probability {bad} outside [0, 1]")));
        }
        Ok(Self { n, p })
    }

    /// Builds a matrix from `(i, j, p)` triples with 0-based `i < j`; every pair must appear once.
    pub fn from_pairs(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        let mut p = vec![f64::NAN; pair_count(n)];
        for &(i, j, v) in triples {
            if i >= j || j >= n {
                return Err(Error::InvalidInput(format!(
                    "pair ({}, {}) invalid for {n} items",
                    i + 1,
                    j + 1
                )));
            }
            let slot = &mut p[pair_index(n, i, j)];
            if !slot.is_nan() {
                return Err(Error::InvalidInput(format!("pair ({}, {}) repeated", i + 1, j + 1)));
            }
            *slot = v;
        }
        if p.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput("some pairs are missing".into()));
        }
        Self::from_upper(n, p)
    }

    /// Matrix with every probability equal to `value`.
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::from_upper(n, vec![value; pair_count(n)])
    }

    pub fn items(&self) -> usize {
        self.n
    }

    /// `p(i, j)` for `i < j`, in lexicographic pair order.
    pub fn upper(&self) -> &[f64] {
        &self.p
    }

    /// Probability that item `i` is ranked ahead of item `j`, for any `i != j`.
    #[inline]
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        debug_assert_ne!(i, j);
        if i < j {
            self.p[pair_index(self.n, i, j)]
        } else {
            1.0 - self.p[pair_index(self.n, j, i)]
        }
    }

    /// Noise margin `min |p(i, j) - 1/2|`.
    pub fn noise_margin(&self) -> f64 {
        self.p
            .iter()
            .map(|v| (v - 0.5).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Sum of absolute differences over all pairs.
    pub fn l1_distance(&self, other: &PairwiseMatrix) -> Result<f64> {
        self.check_items(other.n)?;
        Ok(self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).sum())
    }

    fn check_items(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: n,
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PairwiseMatrixRepr {
    n: usize,
    p: Vec<(usize, usize, f64)>,
}

impl Serialize for PairwiseMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let p = ItemPair::all(self.n)
            .zip(&self.p)
            .map(|(pair, &v)| (pair.i() + 1, pair.j() + 1, v))
            .collect();
        PairwiseMatrixRepr { n: self.n, p }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PairwiseMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PairwiseMatrixRepr::deserialize(d)?;
        let triples = repr
            .p
            .iter()
            .map(|&(i, j, v)| {
                if i == 0 || j == 0 {
                    Err(serde::de::Error::custom("items are numbered from 1"))
                } else {
                    Ok((i - 1, j - 1, v))
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        PairwiseMatrix::from_pairs(repr.n, &triples).map_err(serde::de::Error::custom)
    }
}

/// Which route produced a consensus ranking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MedianMethod {
    Exact,
    Copeland,
    Borda,
}

impl std::fmt::Display for MedianMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MedianMethod::Exact => "exact",
            MedianMethod::Copeland => "copeland",
            MedianMethod::Borda => "borda",
        })
    }
}

/// A consensus ranking with its expected distance to the distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KemenyResult {
    pub median: Permutation,
    pub cost: f64,
    pub method: MedianMethod,
    /// Whether the input was strictly stochastically transitive.
    pub sst: bool,
}

/// Empirical pairwise probabilities `Σ_k w_k 1{Σ_k(i) < Σ_k(j)}`.
pub fn pairwise_matrix(sample: &RankingSample) -> Result<PairwiseMatrix> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("empty ranking sample".into()));
    }
    let n = sample.items;
    let mut p = vec![0.0; pair_count(n)];
    match &sample.weights {
        None => {
            let mut counts = vec![0usize; pair_count(n)];
            for r in &sample.rankings {
                accumulate_concordance(r, &mut counts);
            }
            let total = sample.len() as f64;
            for (slot, c) in p.iter_mut().zip(counts) {
                *slot = c as f64 / total;
            }
        }
        Some(weights) => {
            for (r, &w) in sample.rankings.iter().zip(weights) {
                for pair in ItemPair::all(n) {
                    if r.prefers(pair.i(), pair.j()) {
                        p[pair.index(n)] += w;
                    }
                }
            }
            for v in &mut p {
                *v = v.clamp(0.0, 1.0);
            }
        }
    }
    PairwiseMatrix::from_upper(n, p)
}

/// Adds one to `counts[pair]` for each pair `i < j` the ranking orders `i` first.
pub(crate) fn accumulate_concordance(r: &Permutation, counts: &mut [usize]) {
    let ranks = r.ranks();
    let n = ranks.len();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if ranks[i] < ranks[j] {
                counts[k] += 1;
            }
            k += 1;
        }
    }
}

#[inline]
fn at_least_half(p: f64) -> bool {
    p >= 0.5 - TIE_TOLERANCE
}

#[inline]
fn is_tie(p: f64) -> bool {
    (p - 0.5).abs() <= TIE_TOLERANCE
}

/// First violation of (strict) stochastic transitivity, described for diagnostics.
pub fn transitivity_violation(m: &PairwiseMatrix, strict: bool) -> Option<String> {
    let n = m.n;
    if strict {
        if let Some(pair) = ItemPair::all(n).find(|pr| is_tie(m.p[pr.index(n)])) {
            return Some(format!(
                "pair ({}, {}) is tied at p = 1/2",
                pair.i() + 1,
                pair.j() + 1
            ));
        }
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            if !at_least_half(m.prob(i, j)) {
                continue;
            }
            for k in (0..n).filter(|&k| k != i && k != j) {
                if at_least_half(m.prob(j, k)) && !at_least_half(m.prob(i, k)) {
                    return Some(format!(
                        "triple ({}, {}, {}): P({0} before {1}) = {:.4}, P({1} before {2}) = {:.4} but P({0} before {2}) = {:.4}",
                        i + 1,
                        j + 1,
                        k + 1,
                        m.prob(i, j),
                        m.prob(j, k),
                        m.prob(i, k)
                    ));
                }
            }
        }
    }
    None
}

/// Whether `p(i,j) >= 1/2` and `p(j,k) >= 1/2` imply `p(i,k) >= 1/2` for all triples;
/// with `strict`, exact ties are additionally forbidden.
pub fn is_stochastically_transitive(m: &PairwiseMatrix, strict: bool) -> bool {
    transitivity_violation(m, strict).is_none()
}

/// Copeland ranking `σ(i) = 1 + #{k : p(i, k) < 1/2}`; the unique Kemeny median
/// of a strictly stochastically transitive matrix.
pub fn copeland_median(m: &PairwiseMatrix) -> Result<Permutation> {
    if let Some(why) = transitivity_violation(m, true) {
        return Err(Error::NotTransitive(why));
    }
    let n = m.n;
    let ranks = (0..n)
        .map(|i| 1 + (0..n).filter(|&k| k != i && m.prob(i, k) < 0.5).count())
        .collect();
    // Strict transitivity makes the scores a bijection; failure here is a bug in the check above.
    Ok(Permutation::from_ranks(ranks).expect("Copeland scores of a strictly transitive matrix"))
}

/// Expected Kendall distance `L_P(σ) = Σ_{i<j} p 1{σ(i) > σ(j)} + (1 - p) 1{σ(i) < σ(j)}`.
pub fn expected_distance(m: &PairwiseMatrix, sigma: &Permutation) -> Result<f64> {
    m.check_items(sigma.len())?;
    Ok(expected_distance_unchecked(m, sigma))
}

fn expected_distance_unchecked(m: &PairwiseMatrix, sigma: &Permutation) -> f64 {
    let n = m.n;
    let ranks = sigma.ranks();
    let mut cost = 0.0;
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            let p = m.p[k];
            cost += if ranks[i] < ranks[j] { 1.0 - p } else { p };
            k += 1;
        }
    }
    cost
}

/// Exhaustive Kemeny median for `n <= 8`; ties go to the first minimizer in
/// [`all_permutations`] order.
pub fn exact_kemeny(m: &PairwiseMatrix) -> Result<KemenyResult> {
    if m.n > ORACLE_CAP {
        return Err(Error::OracleScaleExceeded {
            n: m.n,
            cap: ORACLE_CAP,
        });
    }
    let mut best: Option<(Permutation, f64)> = None;
    for sigma in all_permutations(m.n)? {
        let cost = expected_distance_unchecked(m, &sigma);
        if best.as_ref().is_none_or(|(_, c)| cost < c - TIE_TOLERANCE) {
            best = Some((sigma, cost));
        }
    }
    let (median, cost) = best.expect("at least two permutations");
    Ok(KemenyResult {
        median,
        cost,
        method: MedianMethod::Exact,
        sst: is_stochastically_transitive(m, true),
    })
}

/// Minimum expected distance `Σ min(p, 1 - p)`, valid under stochastic transitivity.
pub fn optimal_cost(m: &PairwiseMatrix) -> Result<f64> {
    if let Some(why) = transitivity_violation(m, false) {
        return Err(Error::NotTransitive(why));
    }
    Ok(m.p.iter().map(|&p| p.min(1.0 - p)).sum())
}

/// Items ordered by increasing weighted rank sum; ties go to the lower item index.
pub fn borda_median(sample: &RankingSample) -> Result<Permutation> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("empty ranking sample".into()));
    }
    let n = sample.items;
    let mut scores = vec![0.0f64; n];
    match &sample.weights {
        None => {
            let mut sums = vec![0usize; n];
            for r in &sample.rankings {
                for (s, &rank) in sums.iter_mut().zip(r.ranks()) {
                    *s += rank;
                }
            }
            for (score, s) in scores.iter_mut().zip(sums) {
                *score = s as f64 / sample.len() as f64;
            }
        }
        Some(weights) => {
            for (r, &w) in sample.rankings.iter().zip(weights) {
                for (score, &rank) in scores.iter_mut().zip(r.ranks()) {
                    *score += w * rank as f64;
                }
            }
        }
    }
    // Quantize so that weighted sums equal up to rounding compare as ties.
    let key = |s: f64| (s * 1e9).round() as i64;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (key(scores[i]), i));
    Permutation::from_ordering(&order)
}

/// Copeland median when the sample's pairwise matrix is strictly transitive,
/// Borda count otherwise. Never fails on a nonempty sample.
pub fn pseudo_median(sample: &RankingSample) -> Result<KemenyResult> {
    let m = pairwise_matrix(sample)?;
    let (median, method, sst) = if is_stochastically_transitive(&m, true) {
        (copeland_median(&m)?, MedianMethod::Copeland, true)
    } else {
        (borda_median(sample)?, MedianMethod::Borda, false)
    };
    let cost = expected_distance_unchecked(&m, &median);
    Ok(KemenyResult {
        median,
        cost,
        method,
        sst,
    })
}

/// Dispersion `γ = Σ p (1 - p)`, half the expected distance between two
/// independent draws.
pub fn gamma_dispersion(m: &PairwiseMatrix) -> f64 {
    m.p.iter().map(|&p| p * (1.0 - p)).sum()
}

/// Half the U-statistic of pairwise Kendall distances, an unbiased estimate
/// of [`gamma_dispersion`] on i.i.d. data.
pub fn gamma_ustat(sample: &RankingSample) -> Result<f64> {
    let big_n = sample.len();
    if big_n < 2 {
        return Err(Error::InvalidInput(format!(
            "dispersion U-statistic needs at least 2 rankings, got {big_n}"
        )));
    }
    if !sample.is_uniform() {
        return Err(Error::InvalidInput(
            "dispersion U-statistic is defined for unweighted samples".into(),
        ));
    }
    // Σ_{k<l} d(Σ_k, Σ_l) = Σ_pairs c (N - c), with c the number of samples ordering the pair i first.
    let mut counts = vec![0usize; pair_count(sample.items)];
    for r in &sample.rankings {
        accumulate_concordance(r, &mut counts);
    }
    let total: usize = counts.iter().map(|&c| c * (big_n - c)).sum();
    Ok(total as f64 / (big_n * (big_n - 1)) as f64)
}

/// Excess expected distance `L_P(σ) - L*_P = 2 Σ |p - 1/2|` over the pairs `σ` misorders.
pub fn excess_risk_pointwise(m: &PairwiseMatrix, predicted: &Permutation) -> Result<f64> {
    m.check_items(predicted.len())?;
    if let Some(why) = transitivity_violation(m, true) {
        return Err(Error::NotTransitive(why));
    }
    let n = m.n;
    Ok(ItemPair::all(n)
        .map(|pair| {
            let p = m.p[pair.index(n)];
            let prefers_i = predicted.prefers(pair.i(), pair.j());
            let misordered = (p > 0.5 && !prefers_i) || (p < 0.5 && prefers_i);
            if misordered {
                2.0 * (p - 0.5).abs()
            } else {
                0.0
            }
        })
        .sum())
}

/// Slacks of the two perturbation inequalities relating the Kemeny medians of
/// two distributions. Every slack is nonnegative when the inequalities hold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma4Report {
    /// `L_A(σ*_B) - L*_A`.
    pub lower_slack: f64,
    /// `L*_A + 2 Σ|p_A - p_B| - L_A(σ*_B)`.
    pub upper_slack: f64,
    /// `(1/h) Σ|p_A - p_B| - d(σ*_A, σ*_B)` with `h` the noise margin of `B`;
    /// present only when both matrices are strictly transitive.
    pub distance_slack: Option<f64>,
    pub l1: f64,
    pub median_a: Permutation,
    pub median_b: Permutation,
}

/// Evaluates both inequalities with exhaustive medians as the oracle.
pub fn check_lemma4(a: &PairwiseMatrix, b: &PairwiseMatrix) -> Result<Lemma4Report> {
    a.check_items(b.n)?;
    let opt_a = exact_kemeny(a)?;
    let opt_b = exact_kemeny(b)?;
    let l1 = a.l1_distance(b)?;
    let cross = expected_distance_unchecked(a, &opt_b.median);
    let distance_slack = (opt_a.sst && opt_b.sst).then(|| {
        let h = b.noise_margin();
        l1 / h - opt_a.median.distance(&opt_b.median) as f64
    });
    Ok(Lemma4Report {
        lower_slack: cross - opt_a.cost,
        upper_slack: opt_a.cost + 2.0 * l1 - cross,
        distance_slack,
        l1,
        median_a: opt_a.median,
        median_b: opt_b.median,
    })
}
