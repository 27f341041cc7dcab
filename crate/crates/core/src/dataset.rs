//! Feature/ranking datasets and their CSV form.
//!
//! A CSV file has a header row. Columns named `f_<name>` hold numeric
//! features, `c_<name>` categorical ones, and a single `ranking` column holds
//! either a rank vector (`"1,3,2"`, quoted) or an ordering (`1>3>2`).
//! Rankings are always written back as rank vectors.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::consensus::RankingSample;
use crate::error::{Error, Result};
use crate::perm::Permutation;

pub const RANKING_COLUMN: &str = "ranking";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical { levels: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

impl Column {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Numeric,
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, levels: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical {
                levels: levels.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, FeatureKind::Numeric)
    }

    fn header(&self) -> String {
        match self.kind {
            FeatureKind::Numeric => format!("f_{}", self.name),
            FeatureKind::Categorical { .. } => format!("c_{}", self.name),
        }
    }
}

/// Per-feature kinds of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<Column>,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Self {
        Self { columns }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn all_numeric(&self) -> bool {
        self.columns.iter().all(Column::is_numeric)
    }

    /// Checks arity and kinds. Categorical ids must name a known level.
    pub fn check(&self, x: &FeatureVector) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::SchemaMismatch(format!(
                "feature vector has {} values, schema has {} columns",
                x.len(),
                self.len()
            )));
        }
        for (col, v) in self.columns.iter().zip(x.values()) {
            match (&col.kind, v) {
                (FeatureKind::Numeric, FeatureValue::Numeric(f)) if f.is_finite() => {}
                (FeatureKind::Categorical { levels }, FeatureValue::Categorical(id))
                    if (*id as usize) < levels.len() => {}
                _ => {
                    return Err(Error::SchemaMismatch(format!(
                        "value {v:?} does not fit column {:?}",
                        col.name
                    )))
                }
            }
        }
        Ok(())
    }

    /// Same columns and kinds, and each categorical level list of one schema
    /// is a prefix of the other's (so shared level ids agree).
    pub fn compatible_with(&self, other: &Schema) -> bool {
        self.len() == other.len()
            && self.columns.iter().zip(&other.columns).all(|(a, b)| {
                a.name == b.name
                    && match (&a.kind, &b.kind) {
                        (FeatureKind::Numeric, FeatureKind::Numeric) => true,
                        (
                            FeatureKind::Categorical { levels: la },
                            FeatureKind::Categorical { levels: lb },
                        ) => {
                            let k = la.len().min(lb.len());
                            la[..k] == lb[..k]
                        }
                        _ => false,
                    }
            })
    }
}

/// One feature value: a real number or a categorical level id.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureValue {
    Numeric(f64),
    Categorical(u32),
}

impl FeatureValue {
    pub fn as_numeric(&self) -> Option<f64> {
        match *self {
            FeatureValue::Numeric(v) => Some(v),
            FeatureValue::Categorical(_) => None,
        }
    }

    pub fn as_level(&self) -> Option<u32> {
        match *self {
            FeatureValue::Categorical(l) => Some(l),
            FeatureValue::Numeric(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<FeatureValue>);

impl FeatureVector {
    pub fn numeric(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| FeatureValue::Numeric(v)).collect())
    }

    pub fn values(&self) -> &[FeatureValue] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, m: usize) -> FeatureValue {
        self.0[m]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub features: FeatureVector,
    pub ranking: Permutation,
}

/// Feature vectors paired with full rankings over the same `items`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingDataset {
    schema: Schema,
    items: usize,
    records: Vec<Record>,
}

impl RankingDataset {
    pub fn new(schema: Schema, items: usize, records: Vec<Record>) -> Result<Self> {
        for (k, r) in records.iter().enumerate() {
            if r.ranking.len() != items {
                return Err(Error::DimensionMismatch {
                    expected: items,
                    got: r.ranking.len(),
                });
            }
            schema
                .check(&r.features)
                .map_err(|e| Error::SchemaMismatch(format!("record {k}: {e}")))?;
        }
        Ok(Self {
            schema,
            items,
            records,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Uniform ranking sample of all records.
    pub fn ranking_sample(&self) -> RankingSample {
        RankingSample::new(
            self.items,
            self.records.iter().map(|r| r.ranking.clone()).collect(),
        )
        .expect("rankings validated at construction")
    }

    /// Records at `indices`, in that order (repeats allowed).
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            items: self.items,
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }

    /// Reads a CSV file, inferring the schema. Categorical levels are sorted
    /// (numerically when every level parses as an integer).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let raw = RawTable::read(reader)?;
        let schema = Schema::new(
            raw.columns
                .iter()
                .enumerate()
                .map(|(c, (name, numeric))| {
                    if *numeric {
                        Column::numeric(name.clone())
                    } else {
                        Column::categorical(name.clone(), sorted_levels(raw.cells.iter().map(|row| row[c].as_str())))
                    }
                })
                .collect(),
        );
        raw.into_dataset(schema)
    }

    /// Reads a CSV file against a known schema. Levels absent from `schema`
    /// are appended to this dataset's copy of it, so they stay distinguishable
    /// from known levels.
    pub fn read_csv_with_schema<R: Read>(reader: R, schema: &Schema) -> Result<Self> {
        let raw = RawTable::read(reader)?;
        if raw.columns.len() != schema.len()
            || raw
                .columns
                .iter()
                .zip(&schema.columns)
                .any(|((name, numeric), col)| *name != col.name || *numeric != col.is_numeric())
        {
            return Err(Error::SchemaMismatch(format!(
                "file columns {:?} do not match model columns {:?}",
                raw.columns.iter().map(|(n, _)| n).collect::<Vec<_>>(),
                schema.columns.iter().map(Column::header).collect::<Vec<_>>()
            )));
        }
        let mut extended = schema.clone();
        for (c, col) in extended.columns.iter_mut().enumerate() {
            if let FeatureKind::Categorical { levels } = &mut col.kind {
                let unseen = sorted_levels(
                    raw.cells
                        .iter()
                        .map(|row| row[c].as_str())
                        .filter(|v| !levels.iter().any(|l| l == v)),
                );
                levels.extend(unseen);
            }
        }
        raw.into_dataset(extended)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.schema.columns.iter().map(Column::header).collect();
        header.push(RANKING_COLUMN.to_string());
        w.write_record(&header)?;
        for r in &self.records {
            let mut row: Vec<String> = self
                .schema
                .columns
                .iter()
                .zip(r.features.values())
                .map(|(col, v)| match (&col.kind, v) {
                    (_, FeatureValue::Numeric(f)) => format!("{f:?}"),
                    (FeatureKind::Categorical { levels }, FeatureValue::Categorical(id)) => {
                        levels[*id as usize].clone()
                    }
                    (FeatureKind::Numeric, FeatureValue::Categorical(id)) => id.to_string(),
                })
                .collect();
            row.push(r.ranking.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sorted_levels<'a>(values: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut levels: Vec<String> = values.map(str::to_string).collect();
    levels.sort();
    levels.dedup();
    if levels.iter().all(|l| l.parse::<i64>().is_ok()) {
        levels.sort_by_key(|l| l.parse::<i64>().unwrap());
    }
    levels
}

struct RawTable {
    /// Feature name (prefix stripped) and whether it is numeric.
    columns: Vec<(String, bool)>,
    cells: Vec<Vec<String>>,
    rankings: Vec<Permutation>,
}

impl RawTable {
    fn read<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut columns = Vec::new();
        let mut feature_pos = Vec::new();
        let mut ranking_pos = None;
        for (pos, h) in headers.iter().enumerate() {
            if h == RANKING_COLUMN {
                if ranking_pos.replace(pos).is_some() {
                    return Err(Error::Parse("more than one ranking column".into()));
                }
            } else if let Some(name) = h.strip_prefix("f_") {
                columns.push((name.to_string(), true));
                feature_pos.push(pos);
            } else if let Some(name) = h.strip_prefix("c_") {
                columns.push((name.to_string(), false));
                feature_pos.push(pos);
            } else {
                return Err(Error::Parse(format!(
                    "column {h:?} is neither f_*, c_* nor {RANKING_COLUMN:?}"
                )));
            }
        }
        let ranking_pos =
            ranking_pos.ok_or_else(|| Error::Parse(format!("missing {RANKING_COLUMN:?} column")))?;
        let mut cells = Vec::new();
        let mut rankings = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let ranking: Permutation = row[ranking_pos]
                .parse()
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
            if let Some(first) = rankings.first().map(Permutation::len) {
                if first != ranking.len() {
                    return Err(Error::Parse(format!(
                        "row {}: ranking has {} items, earlier rows have {first}",
                        line + 1,
                        ranking.len()
                    )));
                }
            }
            rankings.push(ranking);
            cells.push(feature_pos.iter().map(|&p| row[p].to_string()).collect());
        }
        if rankings.is_empty() {
            return Err(Error::Parse("dataset has no rows".into()));
        }
        Ok(Self {
            columns,
            cells,
            rankings,
        })
    }

    fn into_dataset(self, schema: Schema) -> Result<RankingDataset> {
        let items = self.rankings[0].len();
        let mut records = Vec::with_capacity(self.rankings.len());
        for (line, (row, ranking)) in self.cells.into_iter().zip(self.rankings).enumerate() {
            let values = schema
                .columns
                .iter()
                .zip(&row)
                .map(|(col, cell)| match &col.kind {
                    FeatureKind::Numeric => cell
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(FeatureValue::Numeric)
                        .ok_or_else(|| {
                            Error::Parse(format!("row {}: {cell:?} is not a finite number", line + 1))
                        }),
                    FeatureKind::Categorical { levels } => Ok(FeatureValue::Categorical(
                        levels.iter().position(|l| l == cell).expect("level collected") as u32,
                    )),
                })
                .collect::<Result<Vec<_>>>()?;
            records.push(Record {
                features: FeatureVector(values),
                ranking,
            });
        }
        RankingDataset::new(schema, items, records)
    }
}

/// Anything that maps a feature vector to a ranking.
pub trait RankingRule: Sync {
    /// Predicts a ranking for `x`, which must conform to the rule's schema
    /// (unseen categorical levels are tolerated where the rule documents it).
    fn predict(&self, x: &FeatureVector) -> Permutation;

    fn schema(&self) -> &Schema;

    fn items(&self) -> usize;
}

/// A rule predicting the same ranking everywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantRule {
    pub schema: Schema,
    pub ranking: Permutation,
}

impl RankingRule for ConstantRule {
    fn predict(&self, _x: &FeatureVector) -> Permutation {
        self.ranking.clone()
    }

    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn items(&self) -> usize {
        self.ranking.len()
    }
}
