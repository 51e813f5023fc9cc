use std::collections::{BTreeMap, BTreeSet};

use fairlens::data::synthetic::{self, SyntheticConfig};
use fairlens::data::{load_csv, LoadOptions};
use fairlens::models::{accuracy, train, Classifier, Family, ModelSpec, TrainedModel};
use fairlens::report::{accuracy_table, format_cell, run_audit_on, verify_summary, RunConfig, Stat};

fn data_path(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn full_adult_loads() {
    let data = load_csv(data_path("adult.csv"), &LoadOptions::new("Income")).unwrap();
    assert_eq!(data.n_rows(), 32561);
    assert_eq!(data.n_features(), 14);
    let [neg, pos] = data.class_counts();
    assert_eq!(neg + pos, 32561);
    assert!(pos < neg);
}

#[test]
fn german_loads() {
    let data = load_csv(data_path("german.csv"), &LoadOptions::new("classification")).unwrap();
    assert_eq!(data.n_rows(), 1000);
    assert_eq!(data.n_features(), 20);
    assert_eq!(data.class_counts(), [300, 700]);
}

#[test]
fn every_family_round_trips_through_json() {
    let data = synthetic::generate(&SyntheticConfig { n_rows: 300, ..Default::default() }, 2).unwrap();
    let drop = BTreeSet::from(["s1".to_string()]);
    for family in Family::ALL {
        let model = train(&ModelSpec::new(family, 2), &data, &drop).unwrap();
        let back = TrainedModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(back, model, "{family:?}");
        assert_eq!(back.dropped_features(), &drop);
        for row in data.rows().take(50) {
            assert_eq!(back.proba(row), model.proba(row));
        }
        assert!(accuracy(&model, &data).unwrap() > 0.6, "{family:?}");
    }
}

fn synthetic_config(repetitions: usize) -> RunConfig {
    let mut cfg = RunConfig {
        target: "outcome".into(),
        sensitive: BTreeMap::from([
            ("s1".to_string(), BTreeSet::from([synthetic::PRIVILEGED.to_string()])),
            ("s2".to_string(), BTreeSet::from([synthetic::PRIVILEGED.to_string()])),
        ]),
        models: vec![Family::Lr, Family::Ada],
        repetitions,
        seed: 20,
        pool_size: 40,
        ..Default::default()
    };
    cfg.lime.n_samples = 300;
    cfg
}

#[test]
fn audit_summary_matches_records() {
    let data = synthetic::generate(&SyntheticConfig { n_rows: 600, ..Default::default() }, 1).unwrap();
    let run = run_audit_on(synthetic_config(3), data).unwrap();
    assert_eq!(run.seeds(), vec![20, 21, 22]);
    assert!(verify_summary(&run));
    for m in &run.models {
        let s = &m.summary;
        assert_eq!(s.repetitions, 3);
        assert_eq!(s.gate_fired, m.records.iter().filter(|r| r.gate.deemed_unfair).count());
        assert_eq!(s.ensemble_accuracy.map(|e| e.n), (s.gate_fired > 0).then_some(s.gate_fired));
        for r in &m.records {
            assert_eq!(r.ensemble.is_some(), r.gate.deemed_unfair);
        }
    }
    let table = accuracy_table(&run).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "row,LR,ADA");
    assert!(lines[1].starts_with("Original,"));
    assert!(lines[2].starts_with("LimeOut,"));
}

#[test]
fn table_cells_use_three_decimals_or_dash() {
    assert_eq!(format_cell(None), "-");
    let s = Stat::of(&[0.7, 0.8]).unwrap();
    assert_eq!(format_cell(Some(&s)), "0.750 (0.050)");
}

#[test]
fn audit_is_repeatable_in_process() {
    let data = synthetic::generate(&SyntheticConfig { n_rows: 400, ..Default::default() }, 3).unwrap();
    let a = run_audit_on(synthetic_config(2), data.clone()).unwrap();
    let b = run_audit_on(synthetic_config(2), data).unwrap();
    assert_eq!(a, b);
}
