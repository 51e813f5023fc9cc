//! Repeated audit over several model families, written as artifacts.
//!
//! cargo run --release --example audit -- [out-dir]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use fairlens::models::Family;
use fairlens::report::{accuracy_table, run_audit, RunConfig};

fn main() -> fairlens::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "fairlens-out".into());
    let mut cfg = RunConfig {
        data: concat!(env!("CARGO_MANIFEST_DIR"), "/data/german.csv").into(),
        target: "classification".into(),
        sensitive: BTreeMap::from([
            (
                "statussex".to_string(),
                BTreeSet::from([
                    "male : single".to_string(),
                    "male : married/widowed".to_string(),
                    "male : divorced/separated".to_string(),
                ]),
            ),
            ("foreignworker".to_string(), BTreeSet::from(["no".to_string()])),
            (
                "telephone".to_string(),
                BTreeSet::from(["yes, registered under the customers name".to_string()]),
            ),
        ]),
        models: vec![Family::Lr, Family::Ada],
        repetitions: 3,
        pool_size: 100,
        out: Some(out.clone()),
        ..Default::default()
    };
    cfg.lime.n_samples = 1000;

    let run = run_audit(cfg)?;
    print!("{}", accuracy_table(&run)?);
    for m in &run.models {
        println!("{}: gate fired {}/{}", m.model.label(), m.summary.gate_fired, m.summary.repetitions);
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
