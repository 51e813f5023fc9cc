use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{write_json, AuditRun, Stat};
use crate::error::{Error, Result};
use crate::global_explain::GlobalEntry;
use crate::limeout::RepetitionRecord;
use crate::metrics::Metric;
use crate::models::Family;

/// `mean (std)` to three decimals, or `-` when there is nothing to report.
pub fn format_cell(stat: Option<&Stat>) -> String {
    match stat {
        Some(s) => format!("{:.3} ({:.3})", s.mean, s.std),
        None => "-".into(),
    }
}

fn number(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn to_csv(rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Original and LimeOut accuracy per model family.
pub fn accuracy_table(run: &AuditRun) -> Result<String> {
    let mut header = vec!["row".to_string()];
    let mut original = vec!["Original".to_string()];
    let mut limeout = vec!["LimeOut".to_string()];
    for m in &run.models {
        header.push(m.model.label().to_string());
        original.push(format_cell(Some(&m.summary.original_accuracy)));
        limeout.push(format_cell(m.summary.ensemble_accuracy.as_ref()));
    }
    to_csv(vec![header, original, limeout])
}

/// Side-by-side top-k lists of one repetition.
pub fn explanation_table(record: &RepetitionRecord, k: usize) -> Result<String> {
    let side = |entry: Option<&GlobalEntry>| match entry {
        Some(e) => vec![e.feature.clone(), e.contribution.to_string(), e.sensitive.to_string()],
        None => vec![String::new(); 3],
    };
    let mut rows = vec![[
        "rank",
        "original_feature",
        "original_contribution",
        "original_sensitive",
        "limeout_feature",
        "limeout_contribution",
        "limeout_sensitive",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()];
    let k = k.min(record.original.explanation.entries.len());
    for i in 0..k {
        let mut row = vec![(i + 1).to_string()];
        row.extend(side(record.original.explanation.entries.get(i)));
        row.extend(side(
            record.ensemble.as_ref().and_then(|e| e.outcome.explanation.entries.get(i)),
        ));
        rows.push(row);
    }
    to_csv(rows)
}

/// Mean metric values of models whose gate fired at least once.
pub fn metric_points(run: &AuditRun) -> Result<String> {
    let mut rows = vec![vec![
        "model".to_string(),
        "feature".into(),
        "metric".into(),
        "original".into(),
        "limeout".into(),
        "reference".into(),
    ]];
    for m in run.models.iter().filter(|m| m.summary.gate_fired > 0) {
        for s in &m.summary.metrics {
            rows.push(vec![
                m.model.label().to_string(),
                s.feature.clone(),
                s.metric.name().to_string(),
                number(s.original.map(|x| x.mean)),
                number(s.ensemble.map(|x| x.mean)),
                s.metric.optimum().to_string(),
            ]);
        }
    }
    to_csv(rows)
}

/// Every repetition's metric values; LimeOut cells stay empty when the gate passed.
pub fn metric_points_per_seed(run: &AuditRun) -> Result<String> {
    let mut rows = vec![vec![
        "model".to_string(),
        "seed".into(),
        "feature".into(),
        "metric".into(),
        "original".into(),
        "limeout".into(),
        "reference".into(),
    ]];
    for m in &run.models {
        for r in &m.records {
            for (gi, v) in r.original.metrics.iter().enumerate() {
                for metric in Metric::ALL {
                    rows.push(vec![
                        m.model.label().to_string(),
                        r.seed.to_string(),
                        v.feature.clone(),
                        metric.name().to_string(),
                        number(v.get(metric)),
                        number(r.ensemble.as_ref().and_then(|e| e.outcome.metrics[gi].get(metric))),
                        metric.optimum().to_string(),
                    ]);
                }
            }
        }
    }
    to_csv(rows)
}

#[derive(Serialize)]
struct SeedRecord<'a> {
    seed: u64,
    models: Vec<ModelRecord<'a>>,
}

#[derive(Serialize)]
struct ModelRecord<'a> {
    model: Family,
    record: &'a RepetitionRecord,
}

#[derive(Serialize)]
struct ModelSummary<'a> {
    model: Family,
    summary: &'a super::Summary,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes `config.json`, `summary.json`, `runs/<seed>/record.json`,
/// `tables/*.csv` and `plotdata/*.csv` under `out`.
pub fn write_artifacts(run: &AuditRun, out: &Path) -> Result<()> {
    let tables = out.join("tables");
    let plotdata = out.join("plotdata");
    create_dir(&tables)?;
    create_dir(&plotdata)?;
    write_json(&out.join("config.json"), &run.config)?;

    for (i, seed) in run.seeds().into_iter().enumerate() {
        let dir = out.join("runs").join(seed.to_string());
        create_dir(&dir)?;
        let record = SeedRecord {
            seed,
            models: run
                .models
                .iter()
                .map(|m| ModelRecord {
                    model: m.model,
                    record: &m.records[i],
                })
                .collect(),
        };
        write_json(&dir.join("record.json"), &record)?;
        for m in &run.models {
            let name = format!("explanations_{}_{seed}.csv", m.model.label().to_ascii_lowercase());
            write_text(&tables.join(name), &explanation_table(&m.records[i], run.config.k)?)?;
        }
    }

    write_text(&tables.join("accuracy.csv"), &accuracy_table(run)?)?;
    write_text(&plotdata.join("metric_points.csv"), &metric_points(run)?)?;
    write_text(&plotdata.join("metric_points_per_seed.csv"), &metric_points_per_seed(run)?)?;
    let summaries: Vec<ModelSummary> = run
        .models
        .iter()
        .map(|m| ModelSummary {
            model: m.model,
            summary: &m.summary,
        })
        .collect();
    write_json(&out.join("summary.json"), &summaries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_formatting() {
        let s = Stat {
            mean: 0.7721,
            std: 0.0,
            n: 3,
        };
        assert_eq!(format_cell(Some(&s)), "0.772 (0.000)");
        assert_eq!(format_cell(None), "-");
    }

    #[test]
    fn csv_quotes_commas() {
        let text = to_csv(vec![vec!["a,b".into(), "c".into()]]).unwrap();
        assert_eq!(text, "\"a,b\",c\n");
    }
}
