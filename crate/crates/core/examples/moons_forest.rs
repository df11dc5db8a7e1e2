//! Toy two-moons forest at (2, 1e-6)-DP across the three bound grids.
//!
//! Run with `cargo run --release --example moons_forest [seeds]`.

use dp_lumberjack::bench::{bench_forest, ForestBenchConfig};

fn main() -> dp_lumberjack::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let cfg = ForestBenchConfig { seeds: (0..seeds).collect(), ..Default::default() };
    println!("{}", cfg.describe());
    let runs = bench_forest(&cfg)?;
    for &bounds in &cfg.grids {
        let acc: Vec<f64> = runs.iter().filter(|r| r.bounds == bounds).map(|r| r.accuracy).collect();
        let mean = acc.iter().sum::<f64>() / acc.len() as f64;
        let secs: f64 = runs.iter().filter(|r| r.bounds == bounds).map(|r| r.wall_seconds).sum();
        println!("bounds {:>6} x {:<6} mean accuracy {mean:.4}  per seed {acc:.4?}  ({secs:.1}s)", bounds.0, bounds.1);
    }
    Ok(())
}
