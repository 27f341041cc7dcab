//! k-nearest-neighbor ranking median regression.
//!
//! The prediction at `x` is the pseudo-median (Copeland when strictly
//! transitive, Borda otherwise) of the rankings of the `k` training records
//! closest to `x`.

use serde::{Deserialize, Serialize};

use crate::consensus::{pseudo_median, KemenyResult, RankingSample};
use crate::dataset::{FeatureKind, FeatureValue, FeatureVector, RankingDataset, RankingRule, Schema};
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Feature-space distance.
///
/// Numeric features contribute squared differences, divided by the training
/// standard deviation when `standardize` is set. With `mixed`, categorical
/// features contribute 1 on a level mismatch; without it they are rejected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceSpec {
    #[serde(default)]
    pub standardize: bool,
    #[serde(default)]
    pub mixed: bool,
}

impl DistanceSpec {
    pub fn euclidean() -> Self {
        Self::default()
    }

    pub fn mixed() -> Self {
        Self {
            standardize: false,
            mixed: true,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct KnnRepr {
    k: usize,
    metric: DistanceSpec,
    training: RankingDataset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KnnRepr", into = "KnnRepr")]
pub struct KnnModel {
    training: RankingDataset,
    k: usize,
    metric: DistanceSpec,
    scales: Vec<f64>,
}

impl TryFrom<KnnRepr> for KnnModel {
    type Error = Error;
    fn try_from(r: KnnRepr) -> Result<Self> {
        Self::fit(r.training, r.k, r.metric)
    }
}

impl From<KnnModel> for KnnRepr {
    fn from(m: KnnModel) -> Self {
        KnnRepr {
            k: m.k,
            metric: m.metric,
            training: m.training,
        }
    }
}

impl KnnModel {
    /// Stores the training data; fails on empty data, `k` outside `1..=N`, or
    /// categorical features without the mixed metric.
    pub fn fit(data: RankingDataset, k: usize, metric: DistanceSpec) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidInput("k-NN needs at least one training record".into()));
        }
        if k == 0 || k > data.len() {
            return Err(Error::InvalidInput(format!(
                "k = {k} outside 1..={}",
                data.len()
            )));
        }
        if !metric.mixed && !data.schema().all_numeric() {
            return Err(Error::InvalidInput(
                "categorical features need the mixed distance (0/1 level mismatch)".into(),
            ));
        }
        let scales = data
            .schema()
            .columns
            .iter()
            .enumerate()
            .map(|(m, col)| match col.kind {
                FeatureKind::Numeric if metric.standardize => {
                    let values: Vec<f64> = data
                        .records()
                        .iter()
                        .filter_map(|r| r.features.get(m).as_numeric())
                        .collect();
                    let mean = values.iter().sum::<f64>() / values.len() as f64;
                    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
                    if var > 0.0 {
                        var.sqrt()
                    } else {
                        1.0
                    }
                }
                _ => 1.0,
            })
            .collect();
        Ok(Self {
            training: data,
            k,
            metric,
            scales,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> DistanceSpec {
        self.metric
    }

    pub fn training(&self) -> &RankingDataset {
        &self.training
    }

    fn squared_distance(&self, a: &FeatureVector, b: &FeatureVector) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .zip(&self.scales)
            .map(|((x, y), s)| match (x, y) {
                (FeatureValue::Numeric(x), FeatureValue::Numeric(y)) => ((x - y) / s).powi(2),
                (FeatureValue::Categorical(x), FeatureValue::Categorical(y)) => {
                    if x == y {
                        0.0
                    } else {
                        1.0
                    }
                }
                _ => f64::INFINITY,
            })
            .sum()
    }

    /// Indices of the `k` nearest training records, nearest first; distance
    /// ties go to the lower record index.
    pub fn neighbors(&self, x: &FeatureVector) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> = self
            .training
            .records()
            .iter()
            .enumerate()
            .map(|(i, r)| (self.squared_distance(x, &r.features), i))
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < scored.len() {
            scored.select_nth_unstable_by(self.k - 1, by_distance);
            scored.truncate(self.k);
        }
        scored.sort_unstable_by(by_distance);
        scored.into_iter().map(|(_, i)| i).collect()
    }

    /// The local consensus together with its method and local cost.
    pub fn predict_detailed(&self, x: &FeatureVector) -> KemenyResult {
        let rankings = self
            .neighbors(x)
            .into_iter()
            .map(|i| self.training.records()[i].ranking.clone())
            .collect();
        let sample = RankingSample::new(self.training.items(), rankings).expect("training rankings share n");
        pseudo_median(&sample).expect("neighbor sample is nonempty")
    }

    /// Mean Kendall distance of the predictions to the rankings of `test`.
    pub fn risk(&self, test: &RankingDataset) -> Result<f64> {
        crate::evaluation::empirical_risk(self, test)
    }
}

impl RankingRule for KnnModel {
    fn predict(&self, x: &FeatureVector) -> Permutation {
        self.predict_detailed(x).median
    }

    fn schema(&self) -> &Schema {
        self.training.schema()
    }

    fn items(&self) -> usize {
        self.training.items()
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
    fn rejects_bad_k_and_empty_data() {
        let d = line(&[(0.0, "1,2,3"), (1.0, "2,1,3")]);
        assert!(KnnModel::fit(d.clone(), 0, DistanceSpec::euclidean()).is_err());
        assert!(KnnModel::fit(d.clone(), 3, DistanceSpec::euclidean()).is_err());
        assert!(KnnModel::fit(d.subset(&[]), 1, DistanceSpec::euclidean()).is_err());
    }

    #[test]
    fn categorical_needs_mixed_metric() {
        let schema = Schema::new(vec![Column::categorical("c", ["a", "b"])]);
        let d = RankingDataset::new(
            schema,
            2,
            vec![Record {
                features: FeatureVector(vec![FeatureValue::Categorical(1)]),
                ranking: p("2,1"),
            }],
        )
        .unwrap();
        assert!(KnnModel::fit(d.clone(), 1, DistanceSpec::euclidean()).is_err());
        let m = KnnModel::fit(d, 1, DistanceSpec::mixed()).unwrap();
        assert_eq!(m.predict(&FeatureVector(vec![FeatureValue::Categorical(0)])), p("2,1"));
    }

    #[test]
    fn one_neighbor_returns_nearest_ranking() {
        let d = line(&[(0.0, "1,2,3"), (0.5, "3,2,1"), (1.0, "2,1,3")]);
        let m = KnnModel::fit(d, 1, DistanceSpec::euclidean()).unwrap();
        assert_eq!(m.predict(&FeatureVector::numeric(&[0.9])), p("2,1,3"));
        assert_eq!(m.predict(&FeatureVector::numeric(&[0.4])), p("3,2,1"));
        // Equidistant from records 0 and 1: the lower index wins.
        assert_eq!(m.predict(&FeatureVector::numeric(&[0.25])), p("1,2,3"));
    }

    #[test]
    fn worked_neighbor_sample() {
        let d = line(&[(0.0, "1,2,3"), (0.1, "1,2,3"), (0.2, "2,1,3"), (5.0, "3,2,1")]);
        let m = KnnModel::fit(d, 3, DistanceSpec::euclidean()).unwrap();
        let r = m.predict_detailed(&FeatureVector::numeric(&[0.1]));
        assert_eq!(r.median, p("1,2,3"));
        assert!(r.sst);
    }

    #[test]
    fn standardization_rescales_features() {
        let schema = Schema::new(vec![Column::numeric("a"), Column::numeric("b")]);
        let rec = |a: f64, b: f64, r: &str| Record {
            features: FeatureVector::numeric(&[a, b]),
            ranking: p(r),
        };
        let d = RankingDataset::new(schema, 2, vec![rec(0.0, 0.0, "1,2"), rec(1.0, 20.0, "2,1")]).unwrap();
        let q = FeatureVector::numeric(&[0.0, 12.0]);
        // Raw: 144 against 65. Standardized by (0.5, 10): 1.44 against 4.64.
        let raw = KnnModel::fit(d.clone(), 1, DistanceSpec::euclidean()).unwrap();
        assert_eq!(raw.neighbors(&q), vec![1]);
        let spec = DistanceSpec {
            standardize: true,
            mixed: false,
        };
        let std = KnnModel::fit(d, 1, spec).unwrap();
        assert_eq!(std.scales, vec![0.5, 10.0]);
        assert_eq!(std.neighbors(&q), vec![0]);
    }

    #[test]
    fn json_round_trip() {
        let d = line(&[(0.0, "1,2,3"), (0.5, "3,2,1"), (1.0, "2,1,3")]);
        let m = KnnModel::fit(d, 2, DistanceSpec::euclidean()).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: KnnModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        let bad = json.replace(r#""k":2"#, r#""k":7"#);
        assert!(serde_json::from_str::<KnnModel>(&bad).is_err());
    }
}
