//! Tabular datasets with a binary target and declared sensitive features.
//!
//! Rows are stored row-major as `f64` cells. A categorical cell holds the
//! index of its category in the column's [`FeatureSchema::categories`]; a
//! continuous cell holds the raw value.

mod csv_io;
mod smote;
mod split;
pub mod synthetic;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_io::{load_csv, load_csv_with_schema, write_csv, write_csv_to, LoadOptions, SchemaHints};
pub use smote::{smote, smote_detailed, SmoteOutput, DEFAULT_SMOTE_NEIGHBORS};
pub use split::{split, SplitPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Categorical,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    pub kind: FeatureKind,
    /// Ordered category labels; empty for continuous columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl FeatureSchema {
    pub fn categorical<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        FeatureSchema {
            name: name.into(),
            kind: FeatureKind::Categorical,
            categories: categories.into_iter().map(Into::into).collect(),
        }
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        FeatureSchema {
            name: name.into(),
            kind: FeatureKind::Continuous,
            categories: Vec::new(),
        }
    }

    pub fn is_categorical(&self) -> bool {
        self.kind == FeatureKind::Categorical
    }

    pub fn category_index(&self, value: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == value)
    }

    fn validate(&self) -> Result<()> {
        if self.is_categorical() {
            if self.categories.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "categorical feature `{}` has no categories",
                    self.name
                )));
            }
            let distinct: BTreeSet<&String> = self.categories.iter().collect();
            if distinct.len() != self.categories.len() {
                return Err(Error::InvalidArgument(format!(
                    "categorical feature `{}` has duplicate categories",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Checks a single cell against this column.
    pub fn check_cell(&self, value: f64) -> Result<()> {
        match self.kind {
            FeatureKind::Continuous if !value.is_finite() => Err(Error::SchemaMismatch(format!(
                "non-finite value in continuous feature `{}`",
                self.name
            ))),
            FeatureKind::Categorical
                if value < 0.0 || value.fract() != 0.0 || value as usize >= self.categories.len() =>
            {
                Err(Error::UnseenCategory {
                    column: self.name.clone(),
                    value: value.to_string(),
                })
            }
            _ => Ok(()),
        }
    }
}

/// Validates that `row` has one cell per schema column and every cell is legal.
pub fn check_row(schema: &[FeatureSchema], row: &[f64]) -> Result<()> {
    if row.len() != schema.len() {
        return Err(Error::SchemaMismatch(format!(
            "expected {} cells, found {}",
            schema.len(),
            row.len()
        )));
    }
    schema
        .iter()
        .zip(row)
        .try_for_each(|(column, &value)| column.check_cell(value))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<FeatureSchema>,
    values: Vec<f64>,
    target: Vec<u8>,
    target_name: String,
    /// Original label strings for class 0 and class 1.
    target_labels: [String; 2],
    sensitive: BTreeSet<String>,
}

impl Dataset {
    /// Builds a dataset from rows of cells and 0/1 labels.
    pub fn from_rows(schema: Vec<FeatureSchema>, rows: Vec<Vec<f64>>, target: Vec<u8>) -> Result<Self> {
        let width = schema.len();
        let mut values = Vec::with_capacity(rows.len() * width);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: width,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(schema, values, target)
    }

    pub(crate) fn from_flat(schema: Vec<FeatureSchema>, values: Vec<f64>, target: Vec<u8>) -> Result<Self> {
        let mut names = BTreeSet::new();
        for column in &schema {
            column.validate()?;
            if !names.insert(column.name.as_str()) {
                return Err(Error::DuplicateColumn(column.name.clone()));
            }
        }
        if schema.is_empty() {
            return Err(Error::InvalidArgument("dataset has no feature columns".into()));
        }
        if values.len() != target.len() * schema.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} cells over {} columns",
                target.len(),
                values.len(),
                schema.len()
            )));
        }
        if let Some(bad) = target.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidArgument(format!("label {bad} is not binary")));
        }
        for row in values.chunks(schema.len()) {
            check_row(&schema, row)?;
        }
        Ok(Dataset {
            schema,
            values,
            target,
            target_name: "target".into(),
            target_labels: ["0".into(), "1".into()],
            sensitive: BTreeSet::new(),
        })
    }

    pub fn with_target_info(mut self, name: impl Into<String>, labels: [String; 2]) -> Self {
        self.target_name = name.into();
        self.target_labels = labels;
        self
    }

    /// Declares the sensitive features. Every name must be a schema column.
    pub fn with_sensitive<I, S>(mut self, names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        for name in &names {
            self.feature_index(name)?;
        }
        self.sensitive = names;
        Ok(self)
    }

    pub fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.schema.len();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks(self.schema.len())
    }

    pub fn label(&self, i: usize) -> u8 {
        self.target[i]
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn target_labels(&self) -> &[String; 2] {
        &self.target_labels
    }

    pub fn sensitive(&self) -> &BTreeSet<String> {
        &self.sensitive
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.schema.iter().map(|c| c.name.clone()).collect()
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.target.iter().filter(|&&y| y == 1).count();
        [self.target.len() - ones, ones]
    }

    /// Human-readable value of a cell.
    pub fn display_cell(&self, row: usize, column: usize) -> String {
        let value = self.row(row)[column];
        let col = &self.schema[column];
        match col.kind {
            FeatureKind::Categorical => col.categories[value as usize].clone(),
            FeatureKind::Continuous => value.to_string(),
        }
    }

    /// Sub-dataset with the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let w = self.schema.len();
        let mut values = Vec::with_capacity(indices.len() * w);
        let mut target = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            target.push(self.target[i]);
        }
        Dataset {
            schema: self.schema.clone(),
            values,
            target,
            target_name: self.target_name.clone(),
            target_labels: self.target_labels.clone(),
            sensitive: self.sensitive.clone(),
        }
    }

    pub(crate) fn push_row(&mut self, row: &[f64], label: u8) {
        debug_assert_eq!(row.len(), self.schema.len());
        self.values.extend_from_slice(row);
        self.target.push(label);
    }

    /// Kind hints reproducing this dataset's column typing on reload.
    pub fn schema_hints(&self) -> SchemaHints {
        SchemaHints(
            self.schema
                .iter()
                .map(|c| (c.name.clone(), c.kind))
                .collect::<BTreeMap<_, _>>(),
        )
    }

    pub fn same_schema(&self, other: &Dataset) -> bool {
        self.schema == other.schema
    }
}

/// Per-column mean and standard deviation of continuous features.
///
/// Zero-variance columns get a unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &Dataset) -> Self {
        let n = data.n_rows().max(1) as f64;
        let w = data.n_features();
        let mut mean = vec![0.0; w];
        let mut scale = vec![1.0; w];
        for (j, column) in data.schema().iter().enumerate() {
            if column.is_categorical() {
                continue;
            }
            let m = data.rows().map(|r| r[j]).sum::<f64>() / n;
            let var = data.rows().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n;
            mean[j] = m;
            if var > 0.0 {
                scale[j] = var.sqrt();
            }
        }
        Standardizer { mean, scale }
    }

    #[inline]
    pub fn transform(&self, column: usize, value: f64) -> f64 {
        (value - self.mean[column]) / self.scale[column]
    }
}
