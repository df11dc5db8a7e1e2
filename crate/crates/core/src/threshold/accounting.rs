//! δ of the joint forest pruning, as a function of (σ, Δ, ε, m), where m is
//! the number of threshold queries a single datapoint can take part in.

use crate::privacy::{gaussian_tight_delta, log_std_normal_cdf};

/// Above this many queries the j-maximisation scans a coarse grid and then
/// refines around the best coarse point.
const EXACT_SCAN_LIMIT: u64 = 100_000;

struct BranchTerms {
    /// log Φ(Δ/σ)
    log_p: f64,
    sigma: f64,
    epsilon: f64,
    m: u64,
}

impl BranchTerms {
    /// Maximum of the second and third branch at query count j.
    fn at(&self, j: u64) -> f64 {
        let gamma = (self.m - j) as f64 * self.log_p;
        let scaled = self.sigma / (j as f64).sqrt();
        let stay = gamma.exp();
        let second = -gamma.exp_m1() + stay * gaussian_tight_delta(scaled, self.epsilon - gamma);
        let third = gaussian_tight_delta(scaled, self.epsilon + gamma);
        second.max(third)
    }
}

/// Joint privacy loss δ of marking k trees with the one-sided sparse
/// threshold, for m = k·(1 + ⌊log₂ h⌋):
///
/// max of 1 − Φ(Δ/σ)^m and, over j ∈ [m] with γ(j) = (m − j)·log Φ(Δ/σ),
/// 1 − Φ(Δ/σ)^{m−j} + Φ(Δ/σ)^{m−j}·G_j(ε − γ(j)) and G_j(ε + γ(j)), where
/// G_j(e) is the tight Gaussian δ at noise σ/√j.
pub fn forest_delta(sigma: f64, delta_gate: f64, epsilon: f64, m: u64) -> f64 {
    assert!(m >= 1, "query budget must be positive");
    let log_p = log_std_normal_cdf(delta_gate / sigma);
    let first = -(m as f64 * log_p).exp_m1();
    let terms = BranchTerms { log_p, sigma, epsilon, m };
    let worst_j = if m <= EXACT_SCAN_LIMIT {
        (1..=m).map(|j| terms.at(j)).fold(0.0, f64::max)
    } else {
        let stride = m / 10_000;
        let mut best = (1, terms.at(1));
        let mut j = 1;
        while j <= m {
            let v = terms.at(j);
            if v > best.1 {
                best = (j, v);
            }
            j += stride;
        }
        let v = terms.at(m);
        if v > best.1 {
            best = (m, v);
        }
        let lo = best.0.saturating_sub(stride).max(1);
        let hi = (best.0 + stride).min(m);
        (lo..=hi).map(|j| terms.at(j)).fold(best.1, f64::max)
    };
    first.max(worst_j)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSidedDelta {
    pub gauss: f64,
    pub inf: f64,
}

impl TwoSidedDelta {
    pub fn total(&self) -> f64 {
        self.gauss + self.inf
    }
}

/// Add-the-deltas accounting of the two-sided threshold:
/// δ_Gauss = G_m(ε) at noise σ/√m, δ_inf = 1 − Φ(Δ/σ)^m.
pub fn two_sided_delta_parts(sigma: f64, delta_gate: f64, epsilon: f64, m: u64) -> TwoSidedDelta {
    assert!(m >= 1, "query budget must be positive");
    let gauss = gaussian_tight_delta(sigma / (m as f64).sqrt(), epsilon);
    let inf = -(m as f64 * log_std_normal_cdf(delta_gate / sigma)).exp_m1();
    TwoSidedDelta { gauss, inf }
}

pub fn two_sided_delta(sigma: f64, delta_gate: f64, epsilon: f64, m: u64) -> f64 {
    two_sided_delta_parts(sigma, delta_gate, epsilon, m).total()
}
