//! Outcome-fairness metrics of a trained model on held-out data.
//!
//! cargo run --release --example fairness_metrics

use std::collections::BTreeSet;

use fairlens::data::{load_csv, split, LoadOptions};
use fairlens::metrics::{counterfactual_flip_rate, evaluate, group_confusion, GroupSpec, Metric, PeMode};
use fairlens::models::{train, Family, ModelSpec};

fn main() -> fairlens::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/german.csv");
    let data = load_csv(path, &LoadOptions::new("classification"))?;
    let parts = split(&data, 0.7, 11)?;
    let model = train(&ModelSpec::new(Family::Rf, 11), &parts.train, &BTreeSet::new())?;

    let group = GroupSpec::new("foreignworker", ["no"]);
    let c = group_confusion(&model, &parts.test, &group)?;
    println!("privileged {:?}\nunprivileged {:?}", c.privileged, c.unprivileged);
    for mode in [PeMode::Paper, PeMode::Conventional] {
        let v = evaluate(&model, &parts.test, &group, mode)?;
        let cells: Vec<String> = Metric::ALL
            .iter()
            .map(|&m| match v.get(m) {
                Some(x) => format!("{}={x:+.3}", m.name()),
                None => format!("{}=undefined", m.name()),
            })
            .collect();
        println!("{mode:?}: {}", cells.join(" "));
    }
    println!("counterfactual flip rate {:.3}", counterfactual_flip_rate(&model, &parts.test, &group)?);
    Ok(())
}
