use std::f64::consts::PI;

use crate::{Error, Result};

use super::normal::{log_std_normal_cdf, std_normal_cdf, std_normal_interval};

/// An (ε, δ) differential-privacy guarantee with ε > 0 and 0 < δ < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonDelta {
    epsilon: f64,
    delta: f64,
}

impl EpsilonDelta {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// A ρ-zCDP guarantee, ρ > 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ZcdpBudget(f64);

impl ZcdpBudget {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0) || rho.is_nan() {
            return Err(Error::param(format!("rho must be positive, got {rho}")));
        }
        Ok(Self(rho))
    }

    pub fn rho(&self) -> f64 {
        self.0
    }
}

/// δ such that a ρ-zCDP mechanism is (ε, δ)-DP, for ε ≥ ρ:
///
/// δ = 2·exp(−(ε−ρ)²/4ρ) / (1 + (ε−ρ)/2ρ + √((1 + (ε−ρ)/2ρ)² + 4/(πρ)))
pub fn zcdp_to_dp(rho: ZcdpBudget, epsilon: f64) -> Result<f64> {
    let rho = rho.rho();
    if epsilon.is_nan() || epsilon < rho {
        return Err(Error::param(format!(
            "zCDP conversion requires epsilon >= rho (epsilon={epsilon}, rho={rho})"
        )));
    }
    Ok(zcdp_delta_unchecked(rho, epsilon))
}

fn zcdp_delta_unchecked(rho: f64, epsilon: f64) -> f64 {
    let gap = epsilon - rho;
    let a = 1.0 + gap / (2.0 * rho);
    let denom = a + (a * a + 4.0 / (PI * rho)).sqrt();
    let log_num = 2f64.ln() - gap * gap / (4.0 * rho);
    (log_num - denom.ln()).exp()
}

const RHO_BISECTION_STEPS: usize = 200;

/// Largest ρ ∈ (0, ε] for which every ρ-zCDP mechanism is (ε, δ)-DP.
pub fn max_rho_for(target: EpsilonDelta) -> Result<ZcdpBudget> {
    let (eps, delta) = (target.epsilon(), target.delta());
    if zcdp_delta_unchecked(eps, eps) <= delta {
        return ZcdpBudget::new(eps);
    }
    let mut lo = eps * 2f64.powi(-200);
    let mut hi = eps;
    let mut lo_delta = zcdp_delta_unchecked(lo, eps);
    if lo_delta > delta {
        return Err(Error::InfeasibleBudget(format!(
            "no rho in (0, {eps:e}] achieves delta={delta:e}"
        )));
    }
    for _ in 0..RHO_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = zcdp_delta_unchecked(mid, eps);
        if d <= delta {
            assert!(d >= lo_delta, "zCDP delta is not monotone in rho near rho={mid}");
            lo = mid;
            lo_delta = d;
        } else {
            hi = mid;
        }
    }
    ZcdpBudget::new(lo)
}

/// Tight δ of the Gaussian mechanism with noise σ·Δq at privacy level ε:
/// Φ(1/(2σ) − εσ) − e^ε·Φ(−1/(2σ) − εσ).
///
/// For σ ≥ 2 and moderate arguments this is evaluated as
/// P(b < Z ≤ a) − (e^ε − 1)·Φ(b), which avoids cancellation when a and b
/// are close. Otherwise both terms are combined in log space, so the result
/// stays accurate where e^ε overflows or Φ underflows. The expression is
/// evaluated for any real ε; the joint forest accounting feeds it shifted,
/// possibly negative, ε.
pub fn gaussian_tight_delta(sigma: f64, epsilon: f64) -> f64 {
    let a = 0.5 / sigma - epsilon * sigma;
    let b = -0.5 / sigma - epsilon * sigma;
    if sigma >= 2.0 && b >= -30.0 {
        let d = std_normal_interval(b, a) - epsilon.exp_m1() * std_normal_cdf(b);
        return d.max(0.0);
    }
    let log_first = log_std_normal_cdf(a);
    let log_second = epsilon + log_std_normal_cdf(b);
    if !(log_second < log_first) {
        return 0.0;
    }
    let d = log_first.exp() * -(log_second - log_first).exp_m1();
    d.max(0.0)
}
