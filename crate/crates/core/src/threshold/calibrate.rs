//! Choosing (σ, Δ) for a target (ε, δ) and query budget m.

use crate::{Error, Result};

use super::accounting::{forest_delta, two_sided_delta};
use super::Variant;

/// Queries a single datapoint can take part in across a forest of
/// `num_trees` trees of height `height`: k·(1 + ⌊log₂ h⌋).
pub fn queries_per_datapoint(num_trees: usize, height: usize) -> u64 {
    assert!(num_trees >= 1 && height >= 1);
    num_trees as u64 * (1 + height.ilog2() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub sigma: f64,
    pub delta_gate: f64,
    /// δ reached by the returned parameters under the accounting used.
    pub achieved_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationMode {
    /// Closed-form parameters, valid for ε < 1.
    Simple,
    /// Smallest σ (at the closed-form Δ/σ ratio) meeting the exact δ bound.
    Tight,
}

/// Δ/σ = √(2·ln(2m/δ)).
pub fn closed_form_gate_ratio(delta: f64, m: u64) -> f64 {
    (2.0 * (2.0 * m as f64 / delta).ln()).sqrt()
}

fn check_inputs(epsilon: f64, delta: f64, m: u64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
    }
    if m == 0 {
        return Err(Error::param("query budget m must be at least 1"));
    }
    Ok(())
}

/// σ = √(2m·ln(2.5/δ))/ε and Δ = σ·√(2·ln(2m/δ)). Only defined for ε < 1.
pub fn calibrate_simple(epsilon: f64, delta: f64, m: u64) -> Result<Calibration> {
    check_inputs(epsilon, delta, m)?;
    if epsilon >= 1.0 {
        return Err(Error::param(format!("closed-form calibration needs epsilon < 1, got {epsilon}")));
    }
    let sigma = (2.0 * m as f64 * (2.5 / delta).ln()).sqrt() / epsilon;
    let delta_gate = sigma * closed_form_gate_ratio(delta, m);
    Ok(Calibration { sigma, delta_gate, achieved_delta: forest_delta(sigma, delta_gate, epsilon, m) })
}

/// Tight one-sided calibration at the closed-form Δ/σ ratio.
pub fn calibrate_tight(epsilon: f64, delta: f64, m: u64) -> Result<Calibration> {
    calibrate(epsilon, delta, m, Variant::OneSided, None)
}

const MAX_DOUBLINGS: usize = 128;
const BISECTION_STEPS: usize = 200;

/// Smallest σ with δ(σ, ratio·σ, ε, m) ≤ δ, found by bisection.
///
/// The ratio Δ/σ defaults to the closed-form value. The one-sided variant is
/// accounted with [`forest_delta`], the two-sided one with
/// [`two_sided_delta`].
pub fn calibrate(
    epsilon: f64,
    delta: f64,
    m: u64,
    variant: Variant,
    gate_ratio: Option<f64>,
) -> Result<Calibration> {
    check_inputs(epsilon, delta, m)?;
    let ratio = gate_ratio.unwrap_or_else(|| closed_form_gate_ratio(delta, m));
    if !(ratio.is_finite() && ratio >= 0.0) {
        return Err(Error::param(format!("gate ratio must be non-negative, got {ratio}")));
    }
    let delta_at = |sigma: f64| match variant {
        Variant::OneSided => forest_delta(sigma, ratio * sigma, epsilon, m),
        Variant::TwoSided => two_sided_delta(sigma, ratio * sigma, epsilon, m),
    };

    let mut hi = if epsilon < 1.0 {
        (2.0 * m as f64 * (2.5 / delta).ln()).sqrt() / epsilon
    } else {
        1.0
    };
    let mut doublings = 0;
    while delta_at(hi) > delta {
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::NonConvergence(format!(
                "no sigma up to {hi:e} reaches delta={delta:e} (epsilon={epsilon:e}, m={m}, ratio={ratio})"
            )));
        }
        hi *= 2.0;
    }
    let mut lo = hi * 0.5;
    let mut halvings = 0;
    while delta_at(lo) <= delta {
        hi = lo;
        lo *= 0.5;
        halvings += 1;
        if halvings > MAX_DOUBLINGS {
            return Err(Error::NonConvergence(format!("sigma lower bracket below {lo:e}")));
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if delta_at(mid) <= delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Calibration { sigma: hi, delta_gate: ratio * hi, achieved_delta: delta_at(hi) })
}
