use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

use super::count_tree::CountTree;
use super::mark::HeavySet;
use super::node::NodeId;

/// Noise scale √(h/(2ρ)) of the top-down baseline at ρ-zCDP.
pub fn baseline_sigma(height: usize, rho: f64) -> f64 {
    (height as f64 / (2.0 * rho)).sqrt()
}

/// Noise scale √((1 + ⌊log₂ h⌋)/(2ρ)) of the binary-search marking at ρ-zCDP.
pub fn binary_search_sigma(height: usize, rho: f64) -> f64 {
    ((1 + height.ilog2()) as f64 / (2.0 * rho)).sqrt()
}

/// Top-down baseline: breadth-first from the root, adding N(0, h/(2ρ)) to
/// every visited count, keeping nodes whose noisy count exceeds τ and
/// pruning the subtree below every other node. Empty children of kept nodes
/// are visited too.
pub fn baseline_topdown<R: Rng + ?Sized>(tree: &CountTree, tau: f64, rho: f64, rng: &mut R) -> Result<HeavySet> {
    if !(rho > 0.0) {
        return Err(Error::param(format!("rho must be positive, got {rho}")));
    }
    let h = tree.height();
    let sigma = baseline_sigma(h, rho);
    let mut heavy = Vec::new();
    let mut queue = VecDeque::from([NodeId::ROOT]);
    while let Some(u) = queue.pop_front() {
        let z: f64 = if sigma > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
        if tree.count(u) as f64 + sigma * z > tau {
            heavy.push(u);
            if u.depth() + 1 < h {
                queue.push_back(u.left());
                queue.push_back(u.right());
            }
        }
    }
    // breadth-first order is ascending label order
    HeavySet::from_sorted(heavy)
}
