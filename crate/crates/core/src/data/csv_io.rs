use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use crate::tree::{FeatureKind, FeatureSchema};
use crate::{Error, Result};

use super::{Column, Dataset};

/// Exact clamp and reject counts from one ingestion pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub clamped_cells: usize,
    pub rejected_unknown_category: usize,
    pub rejected_unknown_label: usize,
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rows_read={} rows_kept={} clamped_cells={} rejected_unknown_category={} rejected_unknown_label={}",
            self.rows_read, self.rows_kept, self.clamped_cells, self.rejected_unknown_category, self.rejected_unknown_label
        )
    }
}

/// Reads a headed CSV. Feature columns are matched by name; the label
/// column is read when present. Numeric cells outside the schema bounds are
/// clamped, rows with an unknown category or label are dropped. Row order is
/// preserved.
pub fn read_csv<R: Read>(reader: R, schema: &FeatureSchema) -> Result<(Dataset, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let position = |name: &str| header.iter().position(|h| h == name);
    let mut feature_pos = Vec::with_capacity(schema.num_features());
    for spec in schema.features() {
        match position(&spec.name) {
            Some(p) => feature_pos.push(p),
            None => return Err(Error::Schema(format!("missing column {:?}", spec.name))),
        }
    }
    let label_pos = position(schema.label());

    let mut columns: Vec<Column> = schema
        .features()
        .iter()
        .map(|f| match f.kind {
            FeatureKind::Numeric { .. } => Column::Numeric(Vec::new()),
            FeatureKind::Categorical { .. } => Column::Categorical(Vec::new()),
        })
        .collect();
    let mut labels = label_pos.map(|_| Vec::new());
    let mut report = IngestReport::default();
    let mut nums = vec![0f64; schema.num_features()];
    let mut cats = vec![0u32; schema.num_features()];

    'rows: for (line, record) in rdr.records().enumerate() {
        let record = record?;
        report.rows_read += 1;
        let mut clamped = 0;
        for (f, spec) in schema.features().iter().enumerate() {
            let cell = &record[feature_pos[f]];
            match &spec.kind {
                FeatureKind::Numeric { lower, upper } => {
                    let v: f64 = cell.parse().ok().filter(|v: &f64| !v.is_nan()).ok_or_else(|| {
                        Error::Data(format!("row {}: column {:?}: not a number: {cell:?}", line + 1, spec.name))
                    })?;
                    let c = v.clamp(*lower, *upper);
                    if c != v {
                        clamped += 1;
                    }
                    nums[f] = c;
                }
                FeatureKind::Categorical { .. } => match spec.category_index(cell) {
                    Some(c) => cats[f] = c,
                    None => {
                        report.rejected_unknown_category += 1;
                        continue 'rows;
                    }
                },
            }
        }
        let label = match label_pos {
            Some(p) => match schema.class_index(&record[p]) {
                Some(y) => Some(y),
                None => {
                    report.rejected_unknown_label += 1;
                    continue 'rows;
                }
            },
            None => None,
        };
        report.clamped_cells += clamped;
        report.rows_kept += 1;
        for (f, col) in columns.iter_mut().enumerate() {
            match col {
                Column::Numeric(v) => v.push(nums[f]),
                Column::Categorical(v) => v.push(cats[f]),
            }
        }
        if let (Some(ls), Some(y)) = (labels.as_mut(), label) {
            ls.push(y);
        }
    }
    Ok((Dataset::new(columns, labels)?, report))
}

pub fn read_csv_path(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<(Dataset, IngestReport)> {
    read_csv(std::fs::File::open(path)?, schema)
}

/// Writes features in schema order followed by the label column when the
/// dataset has labels.
pub fn write_csv<W: Write>(writer: W, data: &Dataset, schema: &FeatureSchema) -> Result<()> {
    data.check_schema(schema)?;
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = schema.features().iter().map(|f| f.name.as_str()).collect();
    if data.labels().is_some() {
        header.push(schema.label());
    }
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..data.len() {
        record.clear();
        for (f, spec) in schema.features().iter().enumerate() {
            record.push(match (data.column(f), &spec.kind) {
                (Column::Numeric(v), _) => v[i].to_string(),
                (Column::Categorical(v), FeatureKind::Categorical { domain }) => domain[v[i] as usize].clone(),
                _ => unreachable!(),
            });
        }
        if let Some(labels) = data.labels() {
            record.push(schema.classes()[labels[i] as usize].clone());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_path(path: impl AsRef<Path>, data: &Dataset, schema: &FeatureSchema) -> Result<()> {
    write_csv(std::io::BufWriter::new(std::fs::File::create(path)?), data, schema)
}
