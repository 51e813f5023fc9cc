//! Local surrogate explanation of one prediction.
//!
//! cargo run --release --example explain_instance

use std::collections::BTreeSet;

use fairlens::data::{load_csv, split, LoadOptions};
use fairlens::lime::{Explainer, LimeConfig};
use fairlens::models::{train, Classifier, Family, ModelSpec};

fn main() -> fairlens::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/german.csv");
    let data = load_csv(path, &LoadOptions::new("classification"))?;
    let parts = split(&data, 0.7, 3)?;
    let model = train(&ModelSpec::new(Family::Lr, 3), &parts.train, &BTreeSet::new())?;

    let explainer = Explainer::new(&parts.train, LimeConfig::default())?;
    let x = parts.test.row(0);
    let e = explainer.explain(&model, x, 3)?;
    println!("p(good) = {:.3}, sigma = {:.3}, fidelity = {:.3}", model.predict_proba(x)?, e.sigma, e.fidelity);
    println!("intercept {:+.4}", e.intercept);
    for c in e.contributions.iter().take(8) {
        println!("  {:<22} {:+.4}", c.feature, c.value);
    }
    Ok(())
}
