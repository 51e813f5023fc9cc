//! Repeated audits, their summary statistics, and the artifact tree.

mod config;
mod tables;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{load_csv, Dataset, LoadOptions};
use crate::error::{Error, Result};
use crate::limeout::{run_limeout, RepetitionRecord};
use crate::metrics::{GroupSpec, Metric};
use crate::models::Family;

pub use crate::data::write_csv;
pub use config::{parse_sensitive, RunConfig};
pub use tables::{accuracy_table, explanation_table, format_cell, metric_points, metric_points_per_seed, write_artifacts};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Stat {
            mean,
            std: var.sqrt(),
            n: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub feature: String,
    pub metric: Metric,
    pub original: Option<Stat>,
    pub ensemble: Option<Stat>,
}

/// Aggregates over the repetitions of one model family.
///
/// `original_accuracy` covers every repetition; the `*_when_unfair` figures
/// and the metric summaries cover only repetitions where the gate fired, so
/// original and ensemble are compared on the same splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub repetitions: usize,
    pub gate_fired: usize,
    pub original_accuracy: Stat,
    pub original_accuracy_when_unfair: Option<Stat>,
    pub ensemble_accuracy: Option<Stat>,
    pub metrics: Vec<MetricSummary>,
}

impl Summary {
    pub fn compute(records: &[RepetitionRecord], groups: &[GroupSpec]) -> Result<Summary> {
        let all: Vec<f64> = records.iter().map(|r| r.original.accuracy).collect();
        let fired: Vec<&RepetitionRecord> = records.iter().filter(|r| r.ensemble.is_some()).collect();
        let original_when: Vec<f64> = fired.iter().map(|r| r.original.accuracy).collect();
        let ensemble: Vec<f64> = fired
            .iter()
            .filter_map(|r| r.ensemble.as_ref().map(|e| e.outcome.accuracy))
            .collect();
        let mut metrics = Vec::new();
        for (gi, g) in groups.iter().enumerate() {
            for metric in Metric::ALL {
                let orig: Vec<f64> = fired.iter().filter_map(|r| r.original.metrics[gi].get(metric)).collect();
                let ens: Vec<f64> = fired
                    .iter()
                    .filter_map(|r| r.ensemble.as_ref().and_then(|e| e.outcome.metrics[gi].get(metric)))
                    .collect();
                metrics.push(MetricSummary {
                    feature: g.feature.clone(),
                    metric,
                    original: Stat::of(&orig),
                    ensemble: Stat::of(&ens),
                });
            }
        }
        Ok(Summary {
            repetitions: records.len(),
            gate_fired: fired.len(),
            original_accuracy: Stat::of(&all).ok_or_else(|| Error::InvalidArgument("no repetitions".into()))?,
            original_accuracy_when_unfair: Stat::of(&original_when),
            ensemble_accuracy: Stat::of(&ensemble),
            metrics,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRuns {
    pub model: Family,
    pub records: Vec<RepetitionRecord>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRun {
    pub config: RunConfig,
    pub models: Vec<ModelRuns>,
}

impl AuditRun {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.config.repetitions as u64).map(|r| self.config.seed + r).collect()
    }
}

/// True when every stored summary equals its recomputation within 1e-12.
pub fn verify_summary(run: &AuditRun) -> bool {
    let groups = run.config.groups();
    let close = |a: &Option<Stat>, b: &Option<Stat>| match (a, b) {
        (Some(a), Some(b)) => (a.mean - b.mean).abs() <= 1e-12 && (a.std - b.std).abs() <= 1e-12 && a.n == b.n,
        (None, None) => true,
        _ => false,
    };
    run.models.iter().all(|m| match Summary::compute(&m.records, &groups) {
        Ok(fresh) => {
            let s = &m.summary;
            s.repetitions == fresh.repetitions
                && s.gate_fired == fresh.gate_fired
                && close(&Some(s.original_accuracy), &Some(fresh.original_accuracy))
                && close(&s.original_accuracy_when_unfair, &fresh.original_accuracy_when_unfair)
                && close(&s.ensemble_accuracy, &fresh.ensemble_accuracy)
                && s.metrics.len() == fresh.metrics.len()
                && s.metrics.iter().zip(&fresh.metrics).all(|(a, b)| {
                    a.feature == b.feature
                        && a.metric == b.metric
                        && close(&a.original, &b.original)
                        && close(&a.ensemble, &b.ensemble)
                })
        }
        Err(_) => false,
    })
}

/// A validated configuration bound to its loaded dataset.
#[derive(Debug, Clone)]
pub struct AuditPlan {
    config: RunConfig,
    data: Dataset,
}

impl AuditPlan {
    /// Validates `config` and loads its dataset from disk.
    pub fn prepare(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let mut options = LoadOptions::new(config.target.clone()).hints(config.column_kinds.clone());
        options.positive_label = config.positive_label.clone();
        let data = load_csv(&config.data, &options)?;
        Self::with_data(config, data)
    }

    /// Validates `config` against an in-memory dataset; `config.data` is not read.
    pub fn with_data(config: RunConfig, data: Dataset) -> Result<Self> {
        config.validate()?;
        for g in config.groups() {
            g.resolve(data.schema())?;
        }
        let data = data.with_sensitive(config.sensitive.keys().cloned())?;
        Ok(AuditPlan { config, data })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn execute(&self) -> Result<AuditRun> {
        let groups = self.config.groups();
        let limeout = self.config.limeout_config();
        let mut models = Vec::with_capacity(self.config.models.len());
        for &family in &self.config.models {
            let spec = self.config.model_spec(family)?;
            let mut records = Vec::with_capacity(self.config.repetitions);
            for repetition in 0..self.config.repetitions {
                let seed = self.config.seed + repetition as u64;
                let record = run_limeout(&spec, &self.data, &groups, &limeout, seed).map_err(|e| Error::Repetition {
                    repetition,
                    seed,
                    source: Box::new(e),
                })?;
                records.push(record);
            }
            let summary = Summary::compute(&records, &groups)?;
            models.push(ModelRuns {
                model: family,
                records,
                summary,
            });
        }
        Ok(AuditRun {
            config: self.config.clone(),
            models,
        })
    }
}

/// Loads, runs every repetition, and writes artifacts when `config.out` is set.
pub fn run_audit(config: RunConfig) -> Result<AuditRun> {
    let plan = AuditPlan::prepare(config)?;
    let run = plan.execute()?;
    if let Some(out) = &run.config.out {
        write_artifacts(&run, out)?;
    }
    Ok(run)
}

/// As [`run_audit`] on a dataset already in memory.
pub fn run_audit_on(config: RunConfig, data: Dataset) -> Result<AuditRun> {
    let plan = AuditPlan::with_data(config, data)?;
    let run = plan.execute()?;
    if let Some(out) = &run.config.out {
        write_artifacts(&run, out)?;
    }
    Ok(run)
}

/// Reads a predictions file aligned with `data`: the `prediction` column, or
/// the only column. Cells are target labels, 0/1, or probabilities
/// thresholded at 0.5.
pub fn read_predictions(path: impl AsRef<Path>, data: &Dataset) -> Result<Vec<u8>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers()?.clone();
    let column = match header.iter().position(|h| h == "prediction") {
        Some(c) => c,
        None if header.len() == 1 => 0,
        None => return Err(Error::MissingColumn("prediction".into())),
    };
    let labels = data.target_labels();
    let mut out = Vec::with_capacity(data.n_rows());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let cell = record.get(column).unwrap_or("").trim();
        let label = if let Some(l) = labels.iter().position(|l| l == cell) {
            l as u8
        } else {
            match cell.parse::<f64>() {
                Ok(p) if (0.0..=1.0).contains(&p) => crate::models::label_for(p),
                _ => {
                    return Err(Error::ParseNumber {
                        row: i + 1,
                        column: header[column].to_string(),
                        value: cell.to_string(),
                    })
                }
            }
        };
        out.push(label);
    }
    if out.len() != data.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} data rows",
            out.len(),
            data.n_rows()
        )));
    }
    Ok(out)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_uses_population_std() {
        let s = Stat::of(&[1.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.std, s.n), (2.0, 1.0, 2));
        assert_eq!(Stat::of(&[0.5]).unwrap().std, 0.0);
        assert!(Stat::of(&[]).is_none());
    }
}
