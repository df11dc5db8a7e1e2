//! Private hierarchical heavy hitters on a path-heavy count tree, compared
//! with the exact answer and the top-down baseline at the same ρ.

use dp_lumberjack::bench::{median, path_heavy_tree};
use dp_lumberjack::hh::{
    baseline_sigma, baseline_topdown, binary_search_sigma, brute_force_heavy, mark_heavy_hitters, misclassification_margin,
    write_heavy_dump,
};
use dp_lumberjack::rng::{stream_rng, Stream};
use dp_lumberjack::threshold::{ThresholdOracleConfig, Variant};

fn main() -> dp_lumberjack::Result<()> {
    let (h, n, tau, rho) = (32, 20_000, 50.0, 0.5);
    let tree = path_heavy_tree(n, h, 0.8, 1)?;
    println!("tree of height {h}: {} stored nodes, root count {}", tree.stored_nodes(), tree.root_count());

    let exact = brute_force_heavy(&tree, tau);
    let sigma = binary_search_sigma(h, rho);
    let oracle = ThresholdOracleConfig::new(sigma, tau, tau - 1.0, Variant::OneSided)?;
    let heavy = mark_heavy_hitters(&tree, &oracle, stream_rng(1, Stream::Threshold, 0, 0))?;
    println!("exact heavy nodes: {}, private: {}", exact.len(), heavy.len());

    println!("first heavy nodes (label, depth, count):");
    let mut dump = Vec::new();
    write_heavy_dump(&mut dump, &tree, &heavy)?;
    for line in String::from_utf8_lossy(&dump).lines().take(6) {
        println!("  {line}");
    }

    let trials = 50;
    let ours: Vec<f64> = (0..trials)
        .map(|t| {
            let hs = mark_heavy_hitters(&tree, &oracle, stream_rng(1, Stream::Threshold, t, 0)).unwrap();
            misclassification_margin(&tree, &hs, tau)
        })
        .collect();
    let base: Vec<f64> = (0..trials)
        .map(|t| {
            let hs = baseline_topdown(&tree, tau, rho, &mut stream_rng(1, Stream::Baseline, t, 0)).unwrap();
            misclassification_margin(&tree, &hs, tau)
        })
        .collect();
    println!(
        "rho={rho}: sigma {sigma:.3} vs baseline {:.3}; median margin {:.2} vs {:.2}",
        baseline_sigma(h, rho),
        median(&ours),
        median(&base)
    );
    Ok(())
}
