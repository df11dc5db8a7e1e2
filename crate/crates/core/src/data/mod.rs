//! Column-typed datasets, CSV ingestion against a schema, the two-moons toy
//! generator and shuffled train/validation/test splits.

mod csv_io;
mod moons;

use rand::seq::SliceRandom;

use crate::rng::{stream_rng, Stream};
use crate::tree::{FeatureKind, FeatureRow, FeatureSchema};
use crate::{Error, Result};

pub use csv_io::{read_csv, read_csv_path, write_csv, write_csv_path, IngestReport};
pub use moons::{gen_moons, gen_moons_holdout, MOONS_BOUNDS_GRID, MOONS_CLASSES};

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    /// Category indices into the schema domain.
    Categorical(Vec<u32>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, idx: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(idx.iter().map(|&i| v[i]).collect()),
            Column::Categorical(v) => Column::Categorical(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// A single feature value, used for row-at-a-time prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Num(f64),
    Cat(u32),
}

impl FeatureRow for [Value] {
    fn numeric(&self, feature: usize) -> f64 {
        match self[feature] {
            Value::Num(v) => v,
            Value::Cat(_) => panic!("feature {feature} is categorical"),
        }
    }

    fn category(&self, feature: usize) -> u32 {
        match self[feature] {
            Value::Cat(c) => c,
            Value::Num(_) => panic!("feature {feature} is numeric"),
        }
    }
}

/// Feature columns in schema order plus optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    labels: Option<Vec<u32>>,
    rows: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, labels: Option<Vec<u32>>) -> Result<Self> {
        let rows = columns.first().map(Column::len).or(labels.as_ref().map(Vec::len)).unwrap_or(0);
        if columns.iter().any(|c| c.len() != rows) || labels.as_ref().is_some_and(|l| l.len() != rows) {
            return Err(Error::Data("columns have different lengths".into()));
        }
        if rows > u32::MAX as usize {
            return Err(Error::Data("too many rows".into()));
        }
        Ok(Dataset { columns, labels, rows })
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn num_features(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, feature: usize) -> &Column {
        &self.columns[feature]
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn require_labels(&self) -> Result<&[u32]> {
        self.labels().ok_or_else(|| Error::Data("dataset has no label column".into()))
    }

    pub fn row(&self, i: usize) -> DataRow<'_> {
        DataRow { data: self, index: i }
    }

    pub fn row_values(&self, i: usize) -> Vec<Value> {
        self.columns
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => Value::Num(v[i]),
                Column::Categorical(v) => Value::Cat(v[i]),
            })
            .collect()
    }

    /// Rows at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.iter().map(|c| c.select(idx)).collect(),
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
            rows: idx.len(),
        }
    }

    /// Checks column kinds, bounds, category and label indices against `schema`.
    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<()> {
        if self.columns.len() != schema.num_features() {
            return Err(Error::Schema(format!(
                "dataset has {} feature columns, schema has {}",
                self.columns.len(),
                schema.num_features()
            )));
        }
        for (col, spec) in self.columns.iter().zip(schema.features()) {
            match (col, &spec.kind) {
                (Column::Numeric(v), FeatureKind::Numeric { lower, upper }) => {
                    if let Some(x) = v.iter().find(|x| !(*lower <= **x && **x <= *upper)) {
                        return Err(Error::Data(format!("feature {:?}: value {x} outside bounds", spec.name)));
                    }
                }
                (Column::Categorical(v), FeatureKind::Categorical { domain }) => {
                    if v.iter().any(|&c| c as usize >= domain.len()) {
                        return Err(Error::Data(format!("feature {:?}: category index out of range", spec.name)));
                    }
                }
                _ => return Err(Error::Schema(format!("feature {:?}: column kind mismatch", spec.name))),
            }
        }
        if let Some(labels) = &self.labels {
            if labels.iter().any(|&y| y as usize >= schema.num_classes()) {
                return Err(Error::Data("label index out of range".into()));
            }
        }
        Ok(())
    }

    /// Number of rows per class.
    pub fn class_counts(&self, num_classes: usize) -> Vec<u64> {
        let mut counts = vec![0u64; num_classes];
        for &y in self.labels().unwrap_or(&[]) {
            counts[y as usize] += 1;
        }
        counts
    }
}

/// Borrowed view of one row.
#[derive(Debug, Clone, Copy)]
pub struct DataRow<'a> {
    data: &'a Dataset,
    index: usize,
}

impl FeatureRow for DataRow<'_> {
    fn numeric(&self, feature: usize) -> f64 {
        match &self.data.columns[feature] {
            Column::Numeric(v) => v[self.index],
            Column::Categorical(_) => panic!("feature {feature} is categorical"),
        }
    }

    fn category(&self, feature: usize) -> u32 {
        match &self.data.columns[feature] {
            Column::Categorical(v) => v[self.index],
            Column::Numeric(_) => panic!("feature {feature} is numeric"),
        }
    }
}

/// Shuffled index split with the given fractions of train and validation
/// rows; the remainder is the test part.
pub fn split_indices(n: usize, train: f64, validation: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    if !(train > 0.0 && validation >= 0.0 && train + validation <= 1.0) {
        return Err(Error::param(format!("bad split fractions {train}, {validation}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, Stream::Data, 1, 0));
    let n_train = (train * n as f64).round() as usize;
    let n_val = ((validation * n as f64).round() as usize).min(n - n_train);
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    Ok((idx, val, test))
}
