//! Adult income forest: 30 trees of depth 100 at (2, 1e-6)-DP on an
//! 80/10/10 split, averaged over seeds.
//!
//! Run with `cargo run --release --example adult_forest [seeds]`.

use std::fs::File;
use std::path::Path;

use dp_lumberjack::data::{read_csv, split_indices};
use dp_lumberjack::forest::{evaluate, train, TrainConfig};
use dp_lumberjack::privacy::EpsilonDelta;
use dp_lumberjack::tree::FeatureSchema;
use flate2::read::GzDecoder;

fn main() -> dp_lumberjack::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let schema = FeatureSchema::load(dir.join("adult.schema.json"))?;
    let (data, report) = read_csv(GzDecoder::new(File::open(dir.join("adult.csv.gz"))?), &schema)?;
    println!("ingest: {report}");
    let majority = {
        let counts = data.class_counts(schema.num_classes());
        *counts.iter().max().unwrap() as f64 / data.len() as f64
    };
    println!("majority-class rate {majority:.4}");

    let mut accs = Vec::new();
    for seed in 0..seeds {
        let (train_idx, _val_idx, test_idx) = split_indices(data.len(), 0.8, 0.1, seed)?;
        let cfg = TrainConfig::new(EpsilonDelta::new(2.0, 1e-6)?).with_trees(30).with_depth(100).with_seed(seed);
        let start = std::time::Instant::now();
        let model = train(&data.select(&train_idx), &schema, &cfg)?;
        let acc = evaluate(&model, &data.select(&test_idx))?.accuracy;
        println!("seed {seed}: test accuracy {acc:.4}, {} leaves, {:.1}s", model.num_leaves(), start.elapsed().as_secs_f64());
        accs.push(acc);
    }
    println!("mean test accuracy {:.4}", accs.iter().sum::<f64>() / accs.len() as f64);
    Ok(())
}
