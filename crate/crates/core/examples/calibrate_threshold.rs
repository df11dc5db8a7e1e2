//! Noise and gate calibration for a forest-wide query budget m, comparing
//! the closed form with the tight bisection and the two-sided variant.

use dp_lumberjack::threshold::{calibrate, calibrate_simple, calibrate_tight, forest_delta, queries_per_datapoint, Variant};

fn main() -> dp_lumberjack::Result<()> {
    let m = queries_per_datapoint(30, 100);
    println!("30 trees of depth 100: m = {m}");
    println!("{:>5} {:>7} {:>6} | {:>10} {:>10} | {:>10} {:>10} {:>12} | {:>10}", "eps", "delta", "m", "simple σ", "simple Δ", "tight σ", "tight Δ", "achieved δ", "2-sided σ");
    for &eps in &[0.1, 0.5, 0.9, 1.5] {
        for &delta in &[1e-6, 1e-8] {
            for &m in &[1u64, 7, 210] {
                let simple = calibrate_simple(eps, delta, m).ok();
                let tight = calibrate_tight(eps, delta, m)?;
                let two = calibrate(eps, delta, m, Variant::TwoSided, None)?;
                assert!(forest_delta(tight.sigma, tight.delta_gate, eps, m) <= delta);
                let (s, d) = simple.map_or((f64::NAN, f64::NAN), |c| (c.sigma, c.delta_gate));
                println!(
                    "{eps:>5} {delta:>7.0e} {m:>6} | {s:>10.3} {d:>10.3} | {:>10.3} {:>10.3} {:>12.4e} | {:>10.3}",
                    tight.sigma, tight.delta_gate, tight.achieved_delta, two.sigma
                );
            }
        }
    }
    Ok(())
}
