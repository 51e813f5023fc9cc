//! Outcome-fairness metrics from per-group confusion tables.
//!
//! Every difference is taken as unprivileged minus privileged, and the
//! disparate impact ratio as unprivileged over privileged. Values that would
//! need a zero denominator come back as `None` and are named in
//! [`MetricVector::flags`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureSchema};
use crate::error::{Error, Result};
use crate::models::{ensure_schema, label_for, Classifier};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub feature: String,
    pub privileged_values: BTreeSet<String>,
}

impl GroupSpec {
    pub fn new<I, S>(feature: impl Into<String>, privileged: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        GroupSpec {
            feature: feature.into(),
            privileged_values: privileged.into_iter().map(Into::into).collect(),
        }
    }

    /// Column index and per-category privileged flags for `schema`.
    pub fn resolve(&self, schema: &[FeatureSchema]) -> Result<(usize, Vec<bool>)> {
        let column = schema
            .iter()
            .position(|c| c.name == self.feature)
            .ok_or_else(|| Error::UnknownFeature(self.feature.clone()))?;
        let feature = &schema[column];
        if !feature.is_categorical() {
            return Err(Error::InvalidArgument(format!(
                "sensitive feature `{}` must be categorical",
                self.feature
            )));
        }
        if let Some(v) = self.privileged_values.iter().find(|v| feature.category_index(v).is_none()) {
            return Err(Error::UnseenCategory {
                column: self.feature.clone(),
                value: v.clone(),
            });
        }
        let flags: Vec<bool> = feature
            .categories
            .iter()
            .map(|c| self.privileged_values.contains(c))
            .collect();
        if !flags.iter().any(|&p| p) || flags.iter().all(|&p| p) {
            return Err(Error::InvalidArgument(format!(
                "privileged values of `{}` must be a non-empty strict subset of its categories",
                self.feature
            )));
        }
        Ok((column, flags))
    }

    /// Whether each row of `data` belongs to the privileged group.
    pub fn privileged_mask(&self, data: &Dataset) -> Result<Vec<bool>> {
        let (column, flags) = self.resolve(data.schema())?;
        Ok(data.rows().map(|r| flags[r[column] as usize]).collect())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn add(&mut self, label: u8, prediction: u8) {
        match (label, prediction) {
            (1, 1) => self.tp += 1,
            (0, 1) => self.fp += 1,
            (0, _) => self.tn += 1,
            _ => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positive_rate(&self) -> Option<f64> {
        ratio(self.tp + self.fp, self.total())
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn false_rate(&self, mode: PeMode) -> Option<f64> {
        match mode {
            PeMode::Paper => ratio(self.fp, self.fp + self.tp),
            PeMode::Conventional => ratio(self.fp, self.fp + self.tn),
        }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfusion {
    pub privileged: Counts,
    pub unprivileged: Counts,
}

impl GroupConfusion {
    /// Tallies labels against thresholded predictions; groups may be empty.
    pub fn from_predictions(labels: &[u8], predictions: &[u8], privileged: &[bool]) -> Result<Self> {
        if labels.len() != predictions.len() || labels.len() != privileged.len() {
            return Err(Error::InvalidArgument(format!(
                "labels, predictions and group mask differ in length ({}, {}, {})",
                labels.len(),
                predictions.len(),
                privileged.len()
            )));
        }
        let mut c = GroupConfusion::default();
        for ((&y, &p), &is_priv) in labels.iter().zip(predictions).zip(privileged) {
            if is_priv {
                c.privileged.add(y, p);
            } else {
                c.unprivileged.add(y, p);
            }
        }
        Ok(c)
    }

    /// The same table with the group roles exchanged.
    pub fn swapped(&self) -> Self {
        GroupConfusion {
            privileged: self.unprivileged,
            unprivileged: self.privileged,
        }
    }
}

/// Confusion tables of `model` on `data`, split by `group`.
pub fn group_confusion<C: Classifier + ?Sized>(model: &C, data: &Dataset, group: &GroupSpec) -> Result<GroupConfusion> {
    ensure_schema(model.schema(), data)?;
    let mask = group.privileged_mask(data)?;
    if mask.iter().all(|&p| p) || !mask.iter().any(|&p| p) {
        return Err(Error::DegenerateData(format!("a group of `{}` is empty", group.feature)));
    }
    let predictions: Vec<u8> = data.rows().map(|r| label_for(model.proba(r))).collect();
    GroupConfusion::from_predictions(data.target(), &predictions, &mask)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeMode {
    #[default]
    Paper,
    Conventional,
}

impl fmt::Display for PeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PeMode::Paper => "paper",
            PeMode::Conventional => "conventional",
        })
    }
}

impl FromStr for PeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(PeMode::Paper),
            "conventional" => Ok(PeMode::Conventional),
            other => Err(Error::Config(format!(
                "unknown pe mode `{other}` (expected paper or conventional)"
            ))),
        }
    }
}

pub fn disparate_impact(c: &GroupConfusion) -> Option<f64> {
    let priv_rate = c.privileged.positive_rate()?;
    let unp_rate = c.unprivileged.positive_rate()?;
    (priv_rate > 0.0).then(|| unp_rate / priv_rate)
}

pub fn equal_opportunity(c: &GroupConfusion) -> Option<f64> {
    Some(c.unprivileged.recall()? - c.privileged.recall()?)
}

pub fn demographic_parity(c: &GroupConfusion) -> Option<f64> {
    Some(c.unprivileged.positive_rate()? - c.privileged.positive_rate()?)
}

pub fn equal_accuracy(c: &GroupConfusion) -> Option<f64> {
    Some(c.unprivileged.accuracy()? - c.privileged.accuracy()?)
}

pub fn predictive_equality(c: &GroupConfusion, mode: PeMode) -> Option<f64> {
    Some(c.unprivileged.false_rate(mode)? - c.privileged.false_rate(mode)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Di,
    Eo,
    Dp,
    Ea,
    Pe,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Di, Metric::Eo, Metric::Dp, Metric::Ea, Metric::Pe];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Di => "di",
            Metric::Eo => "eo",
            Metric::Dp => "dp",
            Metric::Ea => "ea",
            Metric::Pe => "pe",
        }
    }

    /// The value a perfectly fair model attains.
    pub fn optimum(&self) -> f64 {
        match self {
            Metric::Di => 1.0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub feature: String,
    pub mode: PeMode,
    pub di: Option<f64>,
    pub eo: Option<f64>,
    pub dp: Option<f64>,
    pub ea: Option<f64>,
    pub pe: Option<f64>,
    /// One `<metric>_undefined` entry per missing value.
    pub flags: Vec<String>,
}

impl MetricVector {
    pub fn compute(feature: impl Into<String>, c: &GroupConfusion, mode: PeMode) -> Self {
        let mut v = MetricVector {
            feature: feature.into(),
            mode,
            di: disparate_impact(c),
            eo: equal_opportunity(c),
            dp: demographic_parity(c),
            ea: equal_accuracy(c),
            pe: predictive_equality(c, mode),
            flags: Vec::new(),
        };
        v.flags = Metric::ALL
            .iter()
            .filter(|m| v.get(**m).is_none())
            .map(|m| format!("{}_undefined", m.name()))
            .collect();
        v
    }

    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Di => self.di,
            Metric::Eo => self.eo,
            Metric::Dp => self.dp,
            Metric::Ea => self.ea,
            Metric::Pe => self.pe,
        }
    }
}

/// Metrics of `model` on `data` for one group split; empty groups are flagged
/// rather than rejected.
pub fn evaluate<C: Classifier + ?Sized>(model: &C, data: &Dataset, group: &GroupSpec, mode: PeMode) -> Result<MetricVector> {
    ensure_schema(model.schema(), data)?;
    let mask = group.privileged_mask(data)?;
    let predictions: Vec<u8> = data.rows().map(|r| label_for(model.proba(r))).collect();
    let c = GroupConfusion::from_predictions(data.target(), &predictions, &mask)?;
    Ok(MetricVector::compute(group.feature.clone(), &c, mode))
}

/// Metrics for externally produced predictions, one vector per group.
pub fn evaluate_predictions(data: &Dataset, predictions: &[u8], groups: &[GroupSpec], mode: PeMode) -> Result<Vec<MetricVector>> {
    if predictions.len() != data.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} rows",
            predictions.len(),
            data.n_rows()
        )));
    }
    groups
        .iter()
        .map(|g| {
            let mask = g.privileged_mask(data)?;
            let c = GroupConfusion::from_predictions(data.target(), predictions, &mask)?;
            Ok(MetricVector::compute(g.feature.clone(), &c, mode))
        })
        .collect()
}

/// Fraction of rows whose predicted label changes when the sensitive value
/// is moved to the opposite group (its first category in schema order).
pub fn counterfactual_flip_rate<C: Classifier + ?Sized>(model: &C, data: &Dataset, group: &GroupSpec) -> Result<f64> {
    ensure_schema(model.schema(), data)?;
    if data.n_rows() == 0 {
        return Err(Error::InvalidArgument("flip rate of an empty dataset".into()));
    }
    let (column, flags) = group.resolve(data.schema())?;
    let first_priv = flags.iter().position(|&p| p).unwrap() as f64;
    let first_unp = flags.iter().position(|&p| !p).unwrap() as f64;
    let mut flipped = 0usize;
    let mut row_buf = Vec::with_capacity(data.n_features());
    for row in data.rows() {
        row_buf.clear();
        row_buf.extend_from_slice(row);
        row_buf[column] = if flags[row[column] as usize] { first_unp } else { first_priv };
        if label_for(model.proba(row)) != label_for(model.proba(&row_buf)) {
            flipped += 1;
        }
    }
    Ok(flipped as f64 / data.n_rows() as f64)
}
