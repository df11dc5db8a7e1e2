//! Leaf mechanisms: a monotone exponential mechanism for majority labels and
//! Gaussian-noised class counts for soft scores.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafMechanismKind {
    /// One class label per leaf; the forest takes a majority vote.
    ExponentialMajority,
    /// A noisy class distribution per leaf; the forest averages them.
    GaussianCounts,
}

impl LeafMechanismKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LeafMechanismKind::ExponentialMajority => "exponential_majority",
            LeafMechanismKind::GaussianCounts => "gaussian_counts",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exponential_majority" => Some(LeafMechanismKind::ExponentialMajority),
            "gaussian_counts" => Some(LeafMechanismKind::GaussianCounts),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafMechanismConfig {
    pub kind: LeafMechanismKind,
    /// zCDP share of a single leaf, i.e. ρ/k.
    pub per_leaf_rho: f64,
    pub num_classes: usize,
}

impl LeafMechanismConfig {
    pub fn new(kind: LeafMechanismKind, per_leaf_rho: f64, num_classes: usize) -> Result<Self> {
        if !(per_leaf_rho > 0.0) {
            return Err(Error::param(format!("per-leaf rho must be positive, got {per_leaf_rho}")));
        }
        if num_classes < 2 {
            return Err(Error::param("at least two classes are required"));
        }
        Ok(Self { kind, per_leaf_rho, num_classes })
    }
}

/// Exponential-mechanism ε for a leaf holding ρ_leaf of zCDP budget.
///
/// With monotone counting scores the mechanism is ε/2-bounded-range and
/// therefore ε²/32-zCDP, so ε = √(32·ρ_leaf).
pub fn em_epsilon_for_rho(rho_leaf: f64) -> f64 {
    (32.0 * rho_leaf).sqrt()
}

/// Samples index i with probability ∝ exp(eps_em · scores[i] / 2) using the
/// Gumbel-max trick. Ties are decided by the Gumbel noise, never by position.
pub fn exp_mech_select<R: Rng + ?Sized>(scores: &[f64], eps_em: f64, rng: &mut R) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::param("exponential mechanism needs at least one candidate"));
    }
    if !(eps_em > 0.0) {
        return Err(Error::param(format!("exponential mechanism epsilon must be positive, got {eps_em}")));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &s) in scores.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::param(format!("score {i} is not finite")));
        }
        let u: f64 = rng.sample(Open01);
        let gumbel = -(-u.ln()).ln();
        let key = 0.5 * eps_em * s + gumbel;
        if key > best.1 {
            best = (i, key);
        }
    }
    Ok(best.0)
}

/// Standard deviation √(k/(2ρ)) of the noise added to each leaf class count.
pub fn gaussian_count_noise_sd(k: usize, rho: f64) -> f64 {
    (k as f64 / (2.0 * rho)).sqrt()
}

/// Class counts plus i.i.d. N(0, k/(2ρ)) noise, without post-processing.
pub fn noisy_counts<R: Rng + ?Sized>(counts: &[u64], k: usize, rho: f64, rng: &mut R) -> Vec<f64> {
    let sd = gaussian_count_noise_sd(k, rho);
    counts
        .iter()
        .map(|&c| {
            let z: f64 = rng.sample(StandardNormal);
            c as f64 + sd * z
        })
        .collect()
}

/// Noisy class counts clamped at zero and normalised to a distribution.
/// A leaf whose counts all clamp to zero predicts the uniform distribution.
pub fn gaussian_leaf_counts<R: Rng + ?Sized>(counts: &[u64], k: usize, rho: f64, rng: &mut R) -> Vec<f64> {
    let mut v = noisy_counts(counts, k, rho, rng);
    for x in v.iter_mut() {
        if !(*x > 0.0) {
            *x = 0.0;
        }
    }
    let total: f64 = v.iter().sum();
    if total > 0.0 && total.is_finite() {
        v.iter_mut().for_each(|x| *x /= total);
    } else {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
    v
}
