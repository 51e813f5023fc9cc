//! Load the German credit data, split it and balance the training side.
//!
//! cargo run --example prepare_data

use fairlens::data::{load_csv, smote, split, LoadOptions, DEFAULT_SMOTE_NEIGHBORS};

fn main() -> fairlens::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/german.csv");
    let data = load_csv(path, &LoadOptions::new("classification"))?;
    println!("{} rows, {} features, classes {:?}", data.n_rows(), data.n_features(), data.class_counts());
    for f in data.schema().iter().take(5) {
        println!("  {:<20} {:?}", f.name, f.kind);
    }

    let parts = split(&data, 0.7, 42)?;
    println!("train {:?}  test {:?}", parts.train.class_counts(), parts.test.class_counts());

    let balanced = smote(&parts.train, DEFAULT_SMOTE_NEIGHBORS, 42)?;
    println!("after SMOTE {:?}", balanced.class_counts());
    Ok(())
}
