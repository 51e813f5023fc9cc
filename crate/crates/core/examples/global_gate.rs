//! Global explanation by submodular pick, then the sensitive-feature gate.
//!
//! cargo run --release --example global_gate

use std::collections::BTreeSet;

use fairlens::data::{load_csv, split, LoadOptions};
use fairlens::global_explain::{global_explain, GlobalConfig};
use fairlens::lime::LimeConfig;
use fairlens::limeout::{dropout_sets, gate};
use fairlens::models::{train, Family, ModelSpec};

fn main() -> fairlens::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/adult_5000.csv");
    let data = load_csv(path, &LoadOptions::new("Income"))?.with_sensitive(["Race", "Sex", "MaritalStatus"])?;
    let parts = split(&data, 0.7, 1)?;
    let model = train(&ModelSpec::new(Family::Lr, 1), &parts.train, &BTreeSet::new())?;

    let cfg = GlobalConfig {
        lime: LimeConfig { n_samples: 1000, ..Default::default() },
        pool_size: 200,
        ..Default::default()
    };
    let g = global_explain(&model, &parts.train, &parts.test, &cfg, 1)?;
    println!("picked test rows {:?}", g.picked_instances);
    for (rank, entry) in g.top_k(cfg.k)?.iter().enumerate() {
        let mark = if entry.sensitive { "*" } else { "" };
        println!("{:>2}. {:<16}{:<2}{:+.3}", rank + 1, entry.feature, mark, entry.contribution);
    }

    let verdict = gate(&g, data.sensitive(), cfg.k)?;
    println!("sensitive in top-{}: {:?}, unfair: {}", verdict.k, verdict.sensitive_in_topk, verdict.deemed_unfair);
    if verdict.deemed_unfair {
        for drop in dropout_sets(&verdict.sensitive_in_topk) {
            println!("  member drops {drop:?}");
        }
    }
    Ok(())
}
