use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::rng::{stream_rng, Stream};
use crate::tree::{FeatureSchema, FeatureSpec};

use super::{Column, Dataset};

pub const MOONS_CLASSES: [&str; 3] = ["red", "blue", "green"];

/// Feature upper bounds of the three toy grids; lower bounds are zero.
pub const MOONS_BOUNDS_GRID: [(f64, f64); 3] = [(5.0, 4.0), (50.0, 40.0), (5000.0, 4000.0)];

const JITTER: f64 = 0.1;
const OFFSET: (f64, f64) = (1.5, 1.0);
const BLOB_STD: f64 = 0.25;

/// Two interleaving half circles (55% red, 40% blue) plus a small green
/// blob (5%) centred one unit below both upper bounds. Features `x1`, `x2`
/// live in `[0, f1_hi] × [0, f2_hi]`; rows are shuffled.
pub fn gen_moons(n: usize, bounds: (f64, f64), seed: u64) -> (FeatureSchema, Dataset) {
    generate(n, bounds, seed, 0)
}

/// Independent sample from the same distribution as [`gen_moons`] with the
/// same seed, for held-out evaluation.
pub fn gen_moons_holdout(n: usize, bounds: (f64, f64), seed: u64) -> (FeatureSchema, Dataset) {
    generate(n, bounds, seed, 1)
}

fn generate(n: usize, bounds: (f64, f64), seed: u64, sample: u32) -> (FeatureSchema, Dataset) {
    let (f1_hi, f2_hi) = bounds;
    let schema = FeatureSchema::new(
        "class",
        MOONS_CLASSES.iter().map(|s| s.to_string()).collect(),
        vec![FeatureSpec::numeric("x1", 0.0, f1_hi), FeatureSpec::numeric("x2", 0.0, f2_hi)],
    )
    .expect("moons schema is valid");

    let n_green = n * 5 / 100;
    let n_blue = n * 40 / 100;
    let n_red = n - n_green - n_blue;
    let mut rng = stream_rng(seed, Stream::Data, 0, sample as u128);
    let jitter = Normal::new(0.0, JITTER).unwrap();
    let blob = Normal::new(0.0, BLOB_STD).unwrap();

    let mut rows: Vec<(f64, f64, u32)> = Vec::with_capacity(n);
    for i in 0..n_red {
        let t = PI * i as f64 / (n_red.max(2) - 1) as f64;
        rows.push((t.cos(), t.sin(), 0));
    }
    for i in 0..n_blue {
        let t = PI * i as f64 / (n_blue.max(2) - 1) as f64;
        rows.push((1.0 - t.cos(), 0.5 - t.sin(), 1));
    }
    for row in rows.iter_mut() {
        row.0 += OFFSET.0 + jitter.sample(&mut rng);
        row.1 += OFFSET.1 + jitter.sample(&mut rng);
    }
    let centre = (f1_hi - 1.0, f2_hi - 1.0);
    for _ in 0..n_green {
        rows.push((centre.0 + blob.sample(&mut rng), centre.1 + blob.sample(&mut rng), 2));
    }
    rows.shuffle(&mut rng);

    let x1 = rows.iter().map(|r| r.0.clamp(0.0, f1_hi)).collect();
    let x2 = rows.iter().map(|r| r.1.clamp(0.0, f2_hi)).collect();
    let labels = rows.iter().map(|r| r.2).collect();
    let data = Dataset::new(vec![Column::Numeric(x1), Column::Numeric(x2)], Some(labels)).unwrap();
    (schema, data)
}
