//! One full repetition: train, explain, gate and build the dropout ensemble.
//!
//! cargo run --release --example limeout_ensemble

use fairlens::data::{load_csv, LoadOptions};
use fairlens::global_explain::GlobalConfig;
use fairlens::lime::LimeConfig;
use fairlens::limeout::{run_limeout, LimeOutConfig};
use fairlens::metrics::GroupSpec;
use fairlens::models::{Family, ModelSpec};

fn main() -> fairlens::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/adult_5000.csv");
    let data = load_csv(path, &LoadOptions::new("Income"))?;
    let groups = [
        GroupSpec::new("MaritalStatus", ["Married-civ-spouse"]),
        GroupSpec::new("Race", ["White"]),
        GroupSpec::new("Sex", ["Male"]),
    ];
    let cfg = LimeOutConfig {
        explain: GlobalConfig {
            lime: LimeConfig { n_samples: 1000, ..Default::default() },
            pool_size: 200,
            ..Default::default()
        },
        ..Default::default()
    };
    let record = run_limeout(&ModelSpec::new(Family::Lr, 0), &data, &groups, &cfg, 5)?;

    println!("original accuracy {:.3}, flagged {:?}", record.original.accuracy, record.gate.sensitive_in_topk);
    match &record.ensemble {
        None => println!("gate passed; no ensemble built"),
        Some(e) => {
            println!("ensemble accuracy {:.3} from {} members", e.outcome.accuracy, e.member_drops.len());
            for (before, after) in record.original.metrics.iter().zip(&e.outcome.metrics) {
                println!("  {:<14} DP {:+.3} -> {:+.3}", before.feature, before.dp.unwrap_or(f64::NAN), after.dp.unwrap_or(f64::NAN));
            }
        }
    }
    Ok(())
}
