//! Mallows distributions and the synthetic feature-conditional scenarios.
//!
//! The Mallows model used here puts mass `P(σ) ∝ exp(-φ d(σ, σ0))` on each
//! ranking, so `φ = 0` is uniform and larger `φ` concentrates mass on the
//! center `σ0`. Parametrizations with a dispersion `q ∈ (0, 1]` map to this
//! one through `q = exp(-φ)`.
//!
//! A [`SyntheticScenario`] partitions the feature space into cells and draws
//! each record's ranking from a Mallows model centered on its cell's center
//! (or exactly the center in the noiseless case).

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::consensus::{optimal_cost, PairwiseMatrix, RankingSample};
use crate::dataset::{Column, FeatureValue, FeatureVector, RankingDataset, RankingRule, Record, Schema};
use crate::error::{Error, Result};
use crate::perm::{all_permutations, pair_count, Permutation, ORACLE_CAP};

/// Mallows distribution centered on `center` with dispersion `phi >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MallowsModel {
    center: Permutation,
    phi: f64,
}

impl MallowsModel {
    pub fn new(center: Permutation, phi: f64) -> Result<Self> {
        if !(phi.is_finite() && phi >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "Mallows dispersion must be finite and nonnegative, got {phi}"
            )));
        }
        Ok(Self { center, phi })
    }

    pub fn center(&self) -> &Permutation {
        &self.center
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn items(&self) -> usize {
        self.center.len()
    }

    /// One draw by repeated insertion: the center's `j`-th item (0-based) is
    /// inserted at slot `r ∈ 0..=j` of the partial ordering with probability
    /// proportional to `exp(-φ (j - r))`, creating exactly `j - r` inversions.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        let center_order = self.center.ordering();
        let mut order: Vec<usize> = Vec::with_capacity(center_order.len());
        let mut weights = Vec::with_capacity(center_order.len());
        for (j, &item) in center_order.iter().enumerate() {
            weights.clear();
            weights.extend((0..=j).map(|r| (-self.phi * (j - r) as f64).exp()));
            let total: f64 = weights.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut slot = j;
            for (r, w) in weights.iter().enumerate() {
                if u < *w {
                    slot = r;
                    break;
                }
                u -= w;
            }
            order.insert(slot, item);
        }
        Permutation::from_ordering(&order).expect("insertion yields a permutation")
    }
}

/// `count` i.i.d. draws from `model`.
pub fn sample<R: Rng + ?Sized>(model: &MallowsModel, count: usize, rng: &mut R) -> Result<RankingSample> {
    if count == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let draws = (0..count).map(|_| model.draw(rng)).collect();
    RankingSample::new(model.items(), draws)
}

/// Exact probabilities of every ranking and the induced pairwise matrix.
#[derive(Clone, Debug)]
pub struct MallowsTable {
    pub permutations: Vec<Permutation>,
    pub probabilities: Vec<f64>,
    pub pairwise: PairwiseMatrix,
}

impl MallowsTable {
    pub fn probability(&self, sigma: &Permutation) -> f64 {
        self.permutations
            .iter()
            .position(|s| s == sigma)
            .map_or(0.0, |k| self.probabilities[k])
    }
}

/// Normalizes `exp(-φ d(σ, σ0))` over all rankings (`n <= 8`).
pub fn enumerate_distribution(model: &MallowsModel) -> Result<MallowsTable> {
    let n = model.items();
    if n > ORACLE_CAP {
        return Err(Error::OracleScaleExceeded { n, cap: ORACLE_CAP });
    }
    let permutations = all_permutations(n)?;
    let mut probabilities: Vec<f64> = permutations
        .iter()
        .map(|s| (-model.phi * s.distance(&model.center) as f64).exp())
        .collect();
    let z: f64 = probabilities.iter().sum();
    for p in &mut probabilities {
        *p /= z;
    }
    let mut p = vec![0.0; pair_count(n)];
    for (s, &w) in permutations.iter().zip(&probabilities) {
        let ranks = s.ranks();
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if ranks[i] < ranks[j] {
                    p[k] += w;
                }
                k += 1;
            }
        }
    }
    for v in &mut p {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(MallowsTable {
        permutations,
        probabilities,
        pairwise: PairwiseMatrix::from_upper(n, p)?,
    })
}

/// Cell dispersion: a finite Mallows `φ`, or noiseless (every ranking equals the center).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dispersion {
    Finite(f64),
    Noiseless,
}

impl fmt::Display for Dispersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dispersion::Finite(phi) => write!(f, "{phi}"),
            Dispersion::Noiseless => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Dispersion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "noiseless" => Ok(Dispersion::Noiseless),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .map(Dispersion::Finite)
                .ok_or_else(|| Error::Parse(format!("bad dispersion {s:?}"))),
        }
    }
}

impl Serialize for Dispersion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dispersion::Finite(phi) => s.serialize_f64(*phi),
            Dispersion::Noiseless => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Dispersion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_infinite() && v > 0.0 => Ok(Dispersion::Noiseless),
            Raw::Num(v) if v.is_finite() && v >= 0.0 => Ok(Dispersion::Finite(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("bad dispersion {v}"))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Feature layout of the three simulation settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    /// Two numeric features, uniform on `[0, 1]²`.
    NumericNumeric,
    /// One numeric feature on `[0, 1]` and one categorical feature with 3 levels.
    NumericCategorical,
    /// Two categorical features with 3 and 2 levels.
    CategoricalCategorical,
}

impl Setting {
    pub const ALL: [Setting; 3] = [
        Setting::NumericNumeric,
        Setting::NumericCategorical,
        Setting::CategoricalCategorical,
    ];

    /// 1-based setting number.
    pub fn number(&self) -> usize {
        match self {
            Setting::NumericNumeric => 1,
            Setting::NumericCategorical => 2,
            Setting::CategoricalCategorical => 3,
        }
    }

    pub fn from_number(k: usize) -> Result<Self> {
        Self::ALL
            .get(k.wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::Parse(format!("setting must be 1, 2 or 3, got {k}")))
    }

    pub fn schema(&self) -> Schema {
        let levels = |k: usize| (0..k).map(|l| l.to_string()).collect::<Vec<_>>();
        Schema::new(match self {
            Setting::NumericNumeric => vec![Column::numeric("x0"), Column::numeric("x1")],
            Setting::NumericCategorical => {
                vec![Column::numeric("x0"), Column::categorical("x1", levels(3))]
            }
            Setting::CategoricalCategorical => vec![
                Column::categorical("x0", levels(3)),
                Column::categorical("x1", levels(2)),
            ],
        })
    }

    /// The fixed six-cell geometry used by the presets.
    ///
    /// * Setting 1: a 2 × 3 grid on `[0, 1]²`, `x0` cut at 1/2 and `x1` at 1/3
    ///   and 2/3. A depth-3 tree represents it exactly.
    /// * Setting 2: `x0 < 1/2` crossed with the three levels of `x1`.
    /// * Setting 3: the six level combinations.
    pub fn preset_cells(&self) -> Vec<Vec<Constraint>> {
        use Constraint::{Interval, Levels};
        let iv = |a: f64, b: f64| Interval([a, b]);
        match self {
            Setting::NumericNumeric => {
                let rows = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
                [iv(0.0, 0.5), iv(0.5, 1.0)]
                    .into_iter()
                    .flat_map(|col| rows.windows(2).map(move |r| vec![col.clone(), iv(r[0], r[1])]))
                    .collect()
            }
            Setting::NumericCategorical => (0..3)
                .flat_map(|l| [vec![iv(0.0, 0.5), Levels(vec![l])], vec![iv(0.5, 1.0), Levels(vec![l])]])
                .collect(),
            Setting::CategoricalCategorical => (0..3)
                .flat_map(|a| (0..2).map(move |b| vec![Levels(vec![a]), Levels(vec![b])]))
                .collect(),
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "setting{}", self.number())
    }
}

/// Constraint of one cell on one feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// Half-open interval `[lo, hi)`; `hi = 1` also admits 1.
    Interval([f64; 2]),
    /// Set of admitted level ids.
    Levels(Vec<u32>),
}

impl Constraint {
    fn admits(&self, v: FeatureValue) -> bool {
        match (self, v) {
            (Constraint::Interval([lo, hi]), FeatureValue::Numeric(x)) => {
                x >= *lo && (x < *hi || (*hi >= 1.0 && x <= *hi))
            }
            (Constraint::Levels(ls), FeatureValue::Categorical(l)) => ls.contains(&l),
            _ => false,
        }
    }

    fn measure(&self, column: &Column) -> f64 {
        match (self, &column.kind) {
            (Constraint::Interval([lo, hi]), _) => (hi.min(1.0) - lo.max(0.0)).max(0.0),
            (Constraint::Levels(ls), crate::dataset::FeatureKind::Categorical { levels }) => {
                let mut valid: Vec<u32> = ls.iter().copied().filter(|&l| (l as usize) < levels.len()).collect();
                valid.sort_unstable();
                valid.dedup();
                valid.len() as f64 / levels.len() as f64
            }
            _ => 0.0,
        }
    }

    fn disjoint(&self, other: &Constraint) -> bool {
        match (self, other) {
            (Constraint::Interval([a, b]), Constraint::Interval([c, d])) => b <= c || d <= a,
            (Constraint::Levels(x), Constraint::Levels(y)) => !x.iter().any(|l| y.contains(l)),
            _ => false,
        }
    }

    fn fits(&self, column: &Column) -> bool {
        match self {
            Constraint::Interval([lo, hi]) => column.is_numeric() && lo < hi,
            Constraint::Levels(ls) => !column.is_numeric() && !ls.is_empty(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ScenarioRepr {
    setting: Setting,
    #[serde(rename = "K")]
    k: usize,
    n: usize,
    phi: Dispersion,
    seed: u64,
    cells: Vec<Vec<Constraint>>,
    centers: Vec<Permutation>,
}

/// A partition of the feature space into cells, each with a center ranking.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRepr", into = "ScenarioRepr")]
pub struct SyntheticScenario {
    setting: Setting,
    n: usize,
    phi: Dispersion,
    seed: u64,
    cells: Vec<Vec<Constraint>>,
    centers: Vec<Permutation>,
    schema: Schema,
}

impl TryFrom<ScenarioRepr> for SyntheticScenario {
    type Error = Error;
    fn try_from(r: ScenarioRepr) -> Result<Self> {
        if r.k != r.cells.len() {
            return Err(Error::InvalidInput(format!(
                "K = {} but {} cells given",
                r.k,
                r.cells.len()
            )));
        }
        Self::new(r.setting, r.n, r.phi, r.seed, r.cells, r.centers)
    }
}

impl From<SyntheticScenario> for ScenarioRepr {
    fn from(s: SyntheticScenario) -> Self {
        ScenarioRepr {
            setting: s.setting,
            k: s.cells.len(),
            n: s.n,
            phi: s.phi,
            seed: s.seed,
            cells: s.cells,
            centers: s.centers,
        }
    }
}

impl SyntheticScenario {
    /// Validates that the cells partition the feature space and that there is
    /// one center over `n` items per cell.
    pub fn new(
        setting: Setting,
        n: usize,
        phi: Dispersion,
        seed: u64,
        cells: Vec<Vec<Constraint>>,
        centers: Vec<Permutation>,
    ) -> Result<Self> {
        let schema = setting.schema();
        if cells.is_empty() {
            return Err(Error::InvalidInput("a scenario needs at least one cell".into()));
        }
        if centers.len() != cells.len() {
            return Err(Error::InvalidInput(format!(
                "{} centers for {} cells",
                centers.len(),
                cells.len()
            )));
        }
        if let Some(c) = centers.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
        for (k, cell) in cells.iter().enumerate() {
            if cell.len() != schema.len() || cell.iter().zip(&schema.columns).any(|(c, col)| !c.fits(col)) {
                return Err(Error::InvalidInput(format!(
                    "cell {k} does not match the {setting} feature layout"
                )));
            }
        }
        for a in 0..cells.len() {
            for b in a + 1..cells.len() {
                if !cells[a].iter().zip(&cells[b]).any(|(x, y)| x.disjoint(y)) {
                    return Err(Error::InvalidInput(format!("cells {a} and {b} overlap")));
                }
            }
        }
        let scenario = Self {
            setting,
            n,
            phi,
            seed,
            cells,
            centers,
            schema,
        };
        let total: f64 = (0..scenario.cells.len()).map(|k| scenario.cell_measure(k)).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "cells cover measure {total}, not the whole feature space"
            )));
        }
        Ok(scenario)
    }

    /// The fixed six-cell geometry of `setting` with distinct centers drawn
    /// from `seed`.
    pub fn preset(setting: Setting, n: usize, phi: Dispersion, seed: u64) -> Result<Self> {
        let cells = setting.preset_cells();
        let centers = distinct_centers(n, cells.len(), seed)?;
        Self::new(setting, n, phi, seed, cells, centers)
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn items(&self) -> usize {
        self.n
    }

    pub fn phi(&self) -> Dispersion {
        self.phi
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn cells(&self) -> &[Vec<Constraint>] {
        &self.cells
    }

    pub fn centers(&self) -> &[Permutation] {
        &self.centers
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Probability mass of cell `k` under the uniform feature distribution.
    pub fn cell_measure(&self, k: usize) -> f64 {
        self.cells[k]
            .iter()
            .zip(&self.schema.columns)
            .map(|(c, col)| c.measure(col))
            .product()
    }

    /// Index of the cell containing `x`.
    pub fn locate(&self, x: &FeatureVector) -> Option<usize> {
        self.cells
            .iter()
            .position(|cell| cell.iter().zip(x.values()).all(|(c, &v)| c.admits(v)))
    }

    /// Mallows model of cell `k`, or `None` when noiseless.
    pub fn cell_model(&self, k: usize) -> Option<MallowsModel> {
        match self.phi {
            Dispersion::Finite(phi) => Some(
                MallowsModel::new(self.centers[k].clone(), phi).expect("dispersion validated"),
            ),
            Dispersion::Noiseless => None,
        }
    }

    /// Exact pairwise matrix of the conditional distribution in cell `k`.
    pub fn cell_matrix(&self, k: usize) -> Result<PairwiseMatrix> {
        match self.cell_model(k) {
            Some(model) => Ok(enumerate_distribution(&model)?.pairwise),
            None => {
                let c = &self.centers[k];
                let n = self.n;
                let p = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .map(|(i, j)| if c.prefers(i, j) { 1.0 } else { 0.0 })
                    .collect();
                PairwiseMatrix::from_upper(n, p)
            }
        }
    }

    fn draw_features<R: Rng + ?Sized>(&self, rng: &mut R) -> FeatureVector {
        FeatureVector(
            self.schema
                .columns
                .iter()
                .map(|col| match &col.kind {
                    crate::dataset::FeatureKind::Numeric => FeatureValue::Numeric(rng.gen::<f64>()),
                    crate::dataset::FeatureKind::Categorical { levels } => {
                        FeatureValue::Categorical(rng.gen_range(0..levels.len() as u32))
                    }
                })
                .collect(),
        )
    }
}

fn distinct_centers(n: usize, k: usize, seed: u64) -> Result<Vec<Permutation>> {
    let total: usize = (1..=n).try_fold(1usize, |acc, v| acc.checked_mul(v)).unwrap_or(usize::MAX);
    if total < k {
        return Err(Error::InvalidInput(format!(
            "cannot pick {k} distinct centers over {n} items"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xCE27);
    let mut centers: Vec<Permutation> = Vec::with_capacity(k);
    while centers.len() < k {
        let mut order: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let c = Permutation::from_ordering(&order)?;
        if !centers.contains(&c) {
            centers.push(c);
        }
    }
    Ok(centers)
}

/// Draws `count` records: uniform features, then each record's ranking from
/// its cell (exactly the center when noiseless). Deterministic given the
/// scenario seed.
pub fn generate_scenario(s: &SyntheticScenario, count: usize) -> Result<RankingDataset> {
    if count < s.cells.len() {
        return Err(Error::InvalidInput(format!(
            "need at least K = {} records, got {count}",
            s.cells.len()
        )));
    }
    let models: Vec<Option<MallowsModel>> = (0..s.cells.len()).map(|k| s.cell_model(k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let features = s.draw_features(&mut rng);
        let cell = s.locate(&features).expect("cells partition the feature space");
        let ranking = match &models[cell] {
            Some(model) => model.draw(&mut rng),
            None => s.centers[cell].clone(),
        };
        records.push(Record { features, ranking });
    }
    RankingDataset::new(s.schema.clone(), s.n, records)
}

/// Bayes risk `Σ_k μ(C_k) L*_k` of the scenario, by exact enumeration.
pub fn oracle_risk(s: &SyntheticScenario) -> Result<f64> {
    if s.n > ORACLE_CAP {
        return Err(Error::OracleScaleExceeded {
            n: s.n,
            cap: ORACLE_CAP,
        });
    }
    if s.phi == Dispersion::Noiseless {
        return Ok(0.0);
    }
    let mut risk = 0.0;
    for k in 0..s.cells.len() {
        risk += s.cell_measure(k) * optimal_cost(&s.cell_matrix(k)?)?;
    }
    Ok(risk)
}

/// The Bayes rule of a scenario: predict the center of the cell containing `x`.
#[derive(Clone, Debug)]
pub struct ScenarioOracle<'a> {
    scenario: &'a SyntheticScenario,
}

impl<'a> ScenarioOracle<'a> {
    pub fn new(scenario: &'a SyntheticScenario) -> Self {
        Self { scenario }
    }
}

impl RankingRule for ScenarioOracle<'_> {
    fn predict(&self, x: &FeatureVector) -> Permutation {
        let k = self.scenario.locate(x).expect("query inside the feature space");
        self.scenario.centers[k].clone()
    }

    fn schema(&self) -> &Schema {
        &self.scenario.schema
    }

    fn items(&self) -> usize {
        self.scenario.n
    }
}
