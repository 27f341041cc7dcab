//! Risk evaluation, train/test protocol and the simulation experiments.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consensus::{excess_risk_pointwise, expected_distance, pseudo_median};
use crate::crit::{CritTree, GrowConfig};
use crate::dataset::{FeatureVector, RankingDataset, RankingRule};
use crate::error::{Error, Result};
use crate::knn::{DistanceSpec, KnnModel};
use crate::mallows::{enumerate_distribution, generate_scenario, oracle_risk, sample, Dispersion, MallowsModel, Setting, SyntheticScenario};
use crate::perm::{ItemPair, Permutation};

fn check_compatible(rule: &(impl RankingRule + ?Sized), test: &RankingDataset) -> Result<()> {
    if rule.items() != test.items() {
        return Err(Error::DimensionMismatch {
            expected: rule.items(),
            got: test.items(),
        });
    }
    if !rule.schema().compatible_with(test.schema()) {
        return Err(Error::SchemaMismatch(
            "test data columns do not match the rule's schema".into(),
        ));
    }
    Ok(())
}

fn predictions(rule: &(impl RankingRule + ?Sized), test: &RankingDataset) -> Vec<Permutation> {
    test.records().par_iter().map(|r| rule.predict(&r.features)).collect()
}

/// Mean Kendall distance between the rule's predictions and the observed rankings.
pub fn empirical_risk(rule: &(impl RankingRule + ?Sized), test: &RankingDataset) -> Result<f64> {
    check_compatible(rule, test)?;
    if test.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate on an empty dataset".into()));
    }
    let total: usize = predictions(rule, test)
        .iter()
        .zip(test.records())
        .map(|(s, r)| s.distance(&r.ranking))
        .sum();
    Ok(total as f64 / test.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMisorder {
    /// 1-based items.
    pub i: usize,
    pub j: usize,
    pub rate: f64,
}

/// Test risk with its decomposition over item pairs; the rates sum to the risk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub records: usize,
    pub risk: f64,
    pub pairs: Vec<PairMisorder>,
}

pub fn risk_report(rule: &(impl RankingRule + ?Sized), test: &RankingDataset) -> Result<RiskReport> {
    let risk = empirical_risk(rule, test)?;
    let preds = predictions(rule, test);
    let n = test.items();
    let pairs = ItemPair::all(n)
        .map(|pair| {
            let misordered = preds
                .iter()
                .zip(test.records())
                .filter(|(s, r)| s.prefers(pair.i(), pair.j()) != r.ranking.prefers(pair.i(), pair.j()))
                .count();
            PairMisorder {
                i: pair.i() + 1,
                j: pair.j() + 1,
                rate: misordered as f64 / test.len() as f64,
            }
        })
        .collect();
    Ok(RiskReport {
        records: test.len(),
        risk,
        pairs,
    })
}

/// Mean exact conditional risk `L_{P_x}(s(x))` over `points`, using the
/// scenario's per-cell Mallows matrices.
pub fn conditional_risk(rule: &(impl RankingRule + ?Sized), scenario: &SyntheticScenario, points: &[FeatureVector]) -> Result<f64> {
    pointwise_mean(rule, scenario, points, expected_distance)
}

/// Mean excess conditional risk `L_{P_x}(s(x)) - L*_{P_x}` over `points`,
/// in closed form from the per-cell matrices.
pub fn conditional_excess(rule: &(impl RankingRule + ?Sized), scenario: &SyntheticScenario, points: &[FeatureVector]) -> Result<f64> {
    pointwise_mean(rule, scenario, points, excess_risk_pointwise)
}

fn pointwise_mean(
    rule: &(impl RankingRule + ?Sized),
    scenario: &SyntheticScenario,
    points: &[FeatureVector],
    f: impl Fn(&crate::consensus::PairwiseMatrix, &Permutation) -> Result<f64>,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no evaluation points".into()));
    }
    let matrices = (0..scenario.cells().len())
        .map(|k| scenario.cell_matrix(k))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for x in points {
        let k = scenario
            .locate(x)
            .ok_or_else(|| Error::InvalidInput("point outside the scenario's feature space".into()))?;
        total += f(&matrices[k], &rule.predict(x))?;
    }
    Ok(total / points.len() as f64)
}

/// Splits record indices into train and test parts, each sorted ascending.
/// With `strata`, every stratum is split separately so both parts keep its share.
pub fn train_test_split(len: usize, train_fraction: f64, strata: Option<&[usize]>, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..len {
        let key = strata.map_or(0, |s| s[i]);
        groups.entry(key).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (_, mut g) in groups {
        g.shuffle(&mut rng);
        let cut = (g.len() as f64 * train_fraction).round() as usize;
        train.extend_from_slice(&g[..cut]);
        test.extend_from_slice(&g[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Seed for one unit of work, derived from the master seed and a tag.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(tag);
    rng.gen()
}

fn phi_code(phi: Dispersion) -> u64 {
    match phi {
        Dispersion::Noiseless => 0xFFFF,
        Dispersion::Finite(v) => ((v * 100.0).round() as u64) & 0xFFFF,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Knn,
    Crit,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Knn => "knn",
            Method::Crit => "crit",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(Method::Knn),
            "crit" => Ok(Method::Crit),
            _ => Err(Error::Parse(format!("unknown method {s:?} (expected knn or crit)"))),
        }
    }
}

/// Risks reported in the original simulation study (50 trials, N = 1000), by
/// method, setting, dispersion and `n ∈ {3, 5, 8}`.
pub fn published_risk(method: Method, setting: Setting, n: usize, phi: Dispersion) -> Option<f64> {
    let col = match n {
        3 => 0,
        5 => 1,
        8 => 2,
        _ => return None,
    };
    let row: [f64; 3] = match (method, setting, phi) {
        (Method::Knn, Setting::NumericNumeric, Dispersion::Noiseless) => [0.0698, 0.1290, 0.2670],
        (Method::Knn, Setting::NumericCategorical, Dispersion::Noiseless) => [0.0173, 0.0405, 0.110],
        (Method::Knn, Setting::CategoricalCategorical, Dispersion::Noiseless) => [0.0112, 0.0372, 0.0862],
        (Method::Crit, Setting::NumericNumeric, Dispersion::Noiseless) => [0.0473, 0.136, 0.324],
        (Method::Crit, Setting::NumericCategorical, Dispersion::Noiseless) => [0.0568, 0.145, 0.2695],
        (Method::Crit, Setting::CategoricalCategorical, Dispersion::Noiseless) => [0.099, 0.1331, 0.2188],
        (m, s, Dispersion::Finite(2.0)) => match (m, s) {
            (Method::Knn, Setting::NumericNumeric) => [0.3475, 0.569, 0.9405],
            (Method::Knn, Setting::NumericCategorical) => [0.306, 0.494, 0.784],
            (Method::Knn, Setting::CategoricalCategorical) => [0.289, 0.457, 0.668],
            (Method::Crit, Setting::NumericNumeric) => [0.307, 0.529, 0.921],
            (Method::Crit, Setting::NumericCategorical) => [0.308, 0.536, 0.862],
            (Method::Crit, Setting::CategoricalCategorical) => [0.3374, 0.5714, 0.8544],
        },
        (m, s, Dispersion::Finite(1.0)) => match (m, s) {
            (Method::Knn, Setting::NumericNumeric) => [0.8656, 1.522, 2.503],
            (Method::Knn, Setting::NumericCategorical) => [0.8305, 1.447, 2.359],
            (Method::Knn, Setting::CategoricalCategorical) => [0.8105, 1.437, 2.189],
            (Method::Crit, Setting::NumericNumeric) => [0.7228, 1.322, 2.226],
            (Method::Crit, Setting::NumericCategorical) => [0.723, 1.3305, 2.163],
            (Method::Crit, Setting::CategoricalCategorical) => [0.7312, 1.3237, 2.252],
        },
        _ => return None,
    };
    Some(row[col])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Table1Config {
    pub settings: Vec<Setting>,
    pub items: Vec<usize>,
    pub dispersions: Vec<Dispersion>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub seed: u64,
    pub records: usize,
    pub train_fraction: f64,
    pub k: usize,
    pub max_depth: usize,
    /// Minimum leaf size as a share of the training set.
    pub min_leaf_fraction: f64,
    /// Stratify the train/test split by true cell.
    pub stratified: bool,
    /// Attach the published values to each record.
    pub with_published: bool,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            settings: Setting::ALL.to_vec(),
            items: vec![3, 5, 8],
            dispersions: vec![Dispersion::Noiseless, Dispersion::Finite(2.0), Dispersion::Finite(1.0)],
            methods: vec![Method::Knn, Method::Crit],
            trials: 10,
            seed: 0,
            records: 1000,
            train_fraction: 0.7,
            k: 5,
            max_depth: 3,
            min_leaf_fraction: 0.1,
            stratified: true,
            with_published: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub setting: Setting,
    pub n: usize,
    pub phi: Dispersion,
    pub method: Method,
    /// Mean test risk over trials.
    pub mean: f64,
    /// Sample standard deviation of the test risk over trials.
    pub std: f64,
    pub trials: usize,
    /// Bayes risk of the scenario.
    pub oracle_risk: f64,
    /// Mean exact conditional risk of the fitted rules at the test points.
    pub conditional_mean: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub published: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: Table1Config,
    pub records: Vec<ExperimentRecord>,
}

impl ExperimentReport {
    pub fn find(&self, setting: Setting, n: usize, phi: Dispersion, method: Method) -> Option<&ExperimentRecord> {
        self.records
            .iter()
            .find(|r| r.setting == setting && r.n == n && r.phi == phi && r.method == method)
    }

    /// One row per configuration.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "setting",
            "n",
            "phi",
            "method",
            "mean",
            "std",
            "trials",
            "oracle_risk",
            "conditional_mean",
            "seed",
            "published",
        ])?;
        for r in &self.records {
            w.write_record([
                r.setting.number().to_string(),
                r.n.to_string(),
                r.phi.to_string(),
                r.method.to_string(),
                format!("{:.6}", r.mean),
                format!("{:.6}", r.std),
                r.trials.to_string(),
                format!("{:.6}", r.oracle_risk),
                format!("{:.6}", r.conditional_mean),
                r.seed.to_string(),
                r.published.map_or(String::new(), |v| v.to_string()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    (m, std)
}

/// Fits `method` on `train` with the given protocol parameters.
pub fn fit_method(method: Method, train: &RankingDataset, k: usize, grow: &GrowConfig) -> Result<Box<dyn RankingRule + Send>> {
    Ok(match method {
        Method::Knn => {
            let metric = if train.schema().all_numeric() {
                DistanceSpec::euclidean()
            } else {
                DistanceSpec::mixed()
            };
            Box::new(KnnModel::fit(train.clone(), k.min(train.len()), metric)?)
        }
        Method::Crit => Box::new(CritTree::grow(train, grow)?),
    })
}

struct TrialOutcome {
    test_risk: Vec<f64>,
    conditional: Vec<f64>,
}

fn run_trial(cfg: &Table1Config, setting: Setting, n: usize, phi: Dispersion, seed: u64) -> Result<TrialOutcome> {
    let scenario = SyntheticScenario::preset(setting, n, phi, seed)?;
    let data = generate_scenario(&scenario, cfg.records)?;
    let strata: Vec<usize> = data
        .records()
        .iter()
        .map(|r| scenario.locate(&r.features).expect("generated inside the space"))
        .collect();
    let (train_idx, test_idx) = train_test_split(
        data.len(),
        cfg.train_fraction,
        cfg.stratified.then_some(strata.as_slice()),
        derive_seed(seed, 1),
    )?;
    let (train, test) = (data.subset(&train_idx), data.subset(&test_idx));
    let min_leaf = ((train.len() as f64 * cfg.min_leaf_fraction).floor() as usize).max(1);
    let grow = GrowConfig::new(cfg.max_depth, min_leaf);
    let points: Vec<FeatureVector> = test.records().iter().map(|r| r.features.clone()).collect();
    let mut out = TrialOutcome {
        test_risk: Vec::new(),
        conditional: Vec::new(),
    };
    for &method in &cfg.methods {
        let rule = fit_method(method, &train, cfg.k, &grow)?;
        out.test_risk.push(empirical_risk(rule.as_ref(), &test)?);
        out.conditional.push(conditional_risk(rule.as_ref(), &scenario, &points)?);
    }
    Ok(out)
}

/// The simulation grid: for every setting, dispersion and `n`, generate
/// `records` points per trial, split train/test, fit each method and average
/// its test risk over trials. Deterministic given the config.
pub fn run_table1(cfg: &Table1Config) -> Result<ExperimentReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    if let Some(&n) = cfg.items.iter().find(|&&n| !(2..=crate::perm::ORACLE_CAP).contains(&n)) {
        return Err(Error::OracleScaleExceeded {
            n,
            cap: crate::perm::ORACLE_CAP,
        });
    }
    let mut records = Vec::new();
    for &setting in &cfg.settings {
        for &phi in &cfg.dispersions {
            for &n in &cfg.items {
                let tag = (setting.number() as u64) << 56 | (n as u64) << 48 | phi_code(phi) << 32;
                let outcomes = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| run_trial(cfg, setting, n, phi, derive_seed(cfg.seed, tag | t as u64)))
                    .collect::<Result<Vec<_>>>()?;
                let floor = oracle_risk(&SyntheticScenario::preset(setting, n, phi, cfg.seed)?)?;
                for (mi, &method) in cfg.methods.iter().enumerate() {
                    let risks: Vec<f64> = outcomes.iter().map(|o| o.test_risk[mi]).collect();
                    let cond: Vec<f64> = outcomes.iter().map(|o| o.conditional[mi]).collect();
                    let (mean, std) = mean_std(&risks);
                    log::info!("{setting} n={n} phi={phi} {method}: {mean:.4} ± {std:.4} (floor {floor:.4})");
                    records.push(ExperimentRecord {
                        setting,
                        n,
                        phi,
                        method,
                        mean,
                        std,
                        trials: cfg.trials,
                        oracle_risk: floor,
                        conditional_mean: mean_std(&cond).0,
                        seed: cfg.seed,
                        published: cfg
                            .with_published
                            .then(|| published_risk(method, setting, n, phi))
                            .flatten(),
                    });
                }
            }
        }
    }
    Ok(ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        records,
    })
}

/// Neighbor count used at training size `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborRule {
    Fixed(usize),
    /// `⌈√N⌉`.
    Sqrt,
}

impl NeighborRule {
    pub fn at(&self, size: usize) -> usize {
        match self {
            NeighborRule::Fixed(k) => (*k).min(size),
            NeighborRule::Sqrt => ((size as f64).sqrt().ceil() as usize).clamp(1, size),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub mean: f64,
    pub std: f64,
    /// Share of trials whose empirical median equals the true center
    /// (consensus study only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub study: String,
    pub n: usize,
    pub phi: Dispersion,
    pub trials: usize,
    pub seed: u64,
    /// Bayes risk (regression study) or optimal cost (consensus study).
    pub floor: f64,
    pub points: Vec<CurvePoint>,
    /// Share of size pairs `N < N'` whose mean error is smaller at `N'`.
    pub decreasing_pairs: f64,
}

fn decreasing_pairs(points: &[CurvePoint]) -> f64 {
    let mut total = 0;
    let mut down = 0;
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            total += 1;
            if points[b].mean < points[a].mean {
                down += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        down as f64 / total as f64
    }
}

/// Excess risk of the empirical pseudo-median of `N` Mallows draws against
/// the exact median, and how often the center is recovered, for each size.
pub fn consensus_convergence(n: usize, phi: f64, sizes: &[usize], trials: usize, seed: u64) -> Result<ConvergenceReport> {
    if trials == 0 || sizes.is_empty() {
        return Err(Error::InvalidInput("need at least one size and one trial".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, 0)));
    let center = Permutation::from_ordering(&order)?;
    let model = MallowsModel::new(center.clone(), phi)?;
    let exact = enumerate_distribution(&model)?.pairwise;
    let mut points = Vec::new();
    for (si, &size) in sizes.iter().enumerate() {
        let outcomes = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, (si as u64 + 1) << 32 | t as u64));
                let s = sample(&model, size, &mut rng)?;
                let median = pseudo_median(&s)?.median;
                Ok((excess_risk_pointwise(&exact, &median)?, median == center))
            })
            .collect::<Result<Vec<_>>>()?;
        let excess: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
        let (mean, std) = mean_std(&excess);
        let hits = outcomes.iter().filter(|o| o.1).count();
        points.push(CurvePoint {
            size,
            mean,
            std,
            recovery: Some(hits as f64 / trials as f64),
        });
    }
    Ok(ConvergenceReport {
        study: "consensus".into(),
        n,
        phi: Dispersion::Finite(phi),
        trials,
        seed,
        floor: crate::consensus::optimal_cost(&exact)?,
        decreasing_pairs: decreasing_pairs(&points),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressionStudy {
    pub setting: Setting,
    pub n: usize,
    pub phi: Dispersion,
    pub method: Method,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub test_size: usize,
    pub neighbors: NeighborRule,
    pub max_depth: usize,
    pub min_leaf_fraction: f64,
    pub seed: u64,
}

impl Default for RegressionStudy {
    fn default() -> Self {
        Self {
            setting: Setting::NumericNumeric,
            n: 3,
            phi: Dispersion::Finite(2.0),
            method: Method::Knn,
            sizes: vec![125, 250, 500, 1000, 2000],
            trials: 20,
            test_size: 1000,
            neighbors: NeighborRule::Sqrt,
            max_depth: 3,
            min_leaf_fraction: 0.1,
            seed: 0,
        }
    }
}

/// Test risk of a regression rule against the training size.
pub fn regression_convergence(study: &RegressionStudy) -> Result<ConvergenceReport> {
    if study.trials == 0 || study.sizes.is_empty() || study.test_size == 0 {
        return Err(Error::InvalidInput("need sizes, trials and a test set".into()));
    }
    let mut points = Vec::new();
    for &size in &study.sizes {
        let risks = (0..study.trials)
            .into_par_iter()
            .map(|t| {
                // Same scenario for a trial at every size, fresh draws per size.
                let scenario = SyntheticScenario::preset(study.setting, study.n, study.phi, derive_seed(study.seed, t as u64))?
                    .with_seed(derive_seed(study.seed, (size as u64) << 32 | t as u64));
                let data = generate_scenario(&scenario, size + study.test_size)?;
                let train = data.subset(&(0..size).collect::<Vec<_>>());
                let test = data.subset(&(size..data.len()).collect::<Vec<_>>());
                let min_leaf = ((size as f64 * study.min_leaf_fraction).floor() as usize).max(1);
                let rule = fit_method(
                    study.method,
                    &train,
                    study.neighbors.at(size),
                    &GrowConfig::new(study.max_depth, min_leaf),
                )?;
                empirical_risk(rule.as_ref(), &test)
            })
            .collect::<Result<Vec<_>>>()?;
        let (mean, std) = mean_std(&risks);
        points.push(CurvePoint {
            size,
            mean,
            std,
            recovery: None,
        });
    }
    let floor = oracle_risk(&SyntheticScenario::preset(study.setting, study.n, study.phi, study.seed)?)?;
    Ok(ConvergenceReport {
        study: format!("{}-{}", study.method, study.setting),
        n: study.n,
        phi: study.phi,
        trials: study.trials,
        seed: study.seed,
        floor,
        decreasing_pairs: decreasing_pairs(&points),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::pairwise_matrix;
    use crate::dataset::{Column, ConstantRule, Record, Schema};

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn unanimous(r: &str, count: usize) -> RankingDataset {
        RankingDataset::new(
            Schema::new(vec![Column::numeric("x")]),
            p(r).len(),
            (0..count)
                .map(|i| Record {
                    features: FeatureVector::numeric(&[i as f64]),
                    ranking: p(r),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_rule_risk_is_expected_distance() {
        let mut d = unanimous("1,2,3", 2);
        d = RankingDataset::new(
            d.schema().clone(),
            3,
            ["1,2,3", "1,2,3", "2,1,3", "3,2,1"]
                .iter()
                .enumerate()
                .map(|(i, r)| Record {
                    features: FeatureVector::numeric(&[i as f64]),
                    ranking: p(r),
                })
                .collect(),
        )
        .unwrap();
        let rule = ConstantRule {
            schema: d.schema().clone(),
            ranking: p("2,1,3"),
        };
        let m = pairwise_matrix(&d.ranking_sample()).unwrap();
        let risk = empirical_risk(&rule, &d).unwrap();
        assert!((risk - expected_distance(&m, &p("2,1,3")).unwrap()).abs() < 1e-12);
        let report = risk_report(&rule, &d).unwrap();
        let total: f64 = report.pairs.iter().map(|q| q.rate).sum();
        assert!((total - risk).abs() < 1e-12);
    }

    #[test]
    fn worst_constant_rule_on_unanimous_data() {
        let d = unanimous("1,2,3,4", 5);
        let rule = ConstantRule {
            schema: d.schema().clone(),
            ranking: p("4,3,2,1"),
        };
        assert_eq!(empirical_risk(&rule, &d).unwrap(), 6.0);
    }

    #[test]
    fn schema_mismatch_rejected() {
        let d = unanimous("1,2,3", 2);
        let rule = ConstantRule {
            schema: Schema::new(vec![Column::numeric("y")]),
            ranking: p("1,2,3"),
        };
        assert!(matches!(empirical_risk(&rule, &d), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn stratified_split_keeps_shares() {
        let strata: Vec<usize> = (0..100).map(|i| i % 4).collect();
        let (train, test) = train_test_split(100, 0.7, Some(&strata), 3).unwrap();
        assert_eq!(train.len() + test.len(), 100);
        for s in 0..4 {
            let c = train.iter().filter(|&&i| strata[i] == s).count();
            assert_eq!(c, 18); // round(25 · 0.7)
        }
        assert_eq!(train_test_split(100, 0.7, Some(&strata), 3).unwrap().0, train);
        assert!(train_test_split(10, 1.0, None, 0).is_err());
    }

    #[test]
    fn published_values_lookup() {
        assert_eq!(published_risk(Method::Knn, Setting::NumericNumeric, 3, Dispersion::Noiseless), Some(0.0698));
        assert_eq!(published_risk(Method::Crit, Setting::NumericNumeric, 3, Dispersion::Finite(1.0)), Some(0.7228));
        assert_eq!(published_risk(Method::Crit, Setting::CategoricalCategorical, 8, Dispersion::Finite(2.0)), Some(0.8544));
        assert_eq!(published_risk(Method::Knn, Setting::NumericNumeric, 4, Dispersion::Noiseless), None);
    }

    #[test]
    fn neighbor_rule() {
        assert_eq!(NeighborRule::Sqrt.at(125), 12);
        assert_eq!(NeighborRule::Sqrt.at(2000), 45);
        assert_eq!(NeighborRule::Fixed(5).at(3), 3);
    }
}
