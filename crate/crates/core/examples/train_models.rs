//! Fit every model family on one split and report test accuracy.
//!
//! cargo run --release --example train_models

use std::collections::BTreeSet;

use fairlens::data::{load_csv, split, LoadOptions};
use fairlens::models::{accuracy, train, Family, ModelSpec, TrainedModel};

fn main() -> fairlens::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/german.csv");
    let data = load_csv(path, &LoadOptions::new("classification"))?;
    let parts = split(&data, 0.7, 7)?;

    for family in Family::ALL {
        let model = train(&ModelSpec::new(family, 7), &parts.train, &BTreeSet::new())?;
        println!("{:<8} {:.3}", family.label(), accuracy(&model, &parts.test)?);
    }

    // Models drop features by ignoring their columns; the schema is unchanged.
    let drop = BTreeSet::from(["foreignworker".to_string()]);
    let lr = train(&ModelSpec::new(Family::Lr, 7), &parts.train, &drop)?;
    let restored = TrainedModel::from_json(&lr.to_json()?)?;
    println!("LR without foreignworker {:.3} (round-tripped: {})", accuracy(&restored, &parts.test)?, restored == lr);
    Ok(())
}
