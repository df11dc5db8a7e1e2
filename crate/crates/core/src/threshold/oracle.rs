use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::hh::NodeId;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    OneSided,
    TwoSided,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::OneSided => "one_sided",
            Variant::TwoSided => "two_sided",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "one_sided" => Some(Variant::OneSided),
            "two_sided" => Some(Variant::TwoSided),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Top,
    Bottom,
}

impl Decision {
    pub fn is_top(self) -> bool {
        self == Decision::Top
    }
}

/// Parameters (σ, τ, Δ) of the sparse threshold test.
///
/// σ = 0 is the noiseless mode: the test reduces to the exact comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOracleConfig {
    sigma: f64,
    tau: f64,
    delta_gate: f64,
    variant: Variant,
}

impl ThresholdOracleConfig {
    pub fn new(sigma: f64, tau: f64, delta_gate: f64, variant: Variant) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param(format!("sigma must be positive and finite, got {sigma}")));
        }
        Self::build(sigma, tau, delta_gate, variant)
    }

    pub fn noiseless(tau: f64, delta_gate: f64, variant: Variant) -> Result<Self> {
        Self::build(0.0, tau, delta_gate, variant)
    }

    fn build(sigma: f64, tau: f64, delta_gate: f64, variant: Variant) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::param(format!("tau must be finite, got {tau}")));
        }
        if !(delta_gate.is_finite() && delta_gate >= 0.0) {
            return Err(Error::param(format!("delta gate must be non-negative, got {delta_gate}")));
        }
        Ok(Self { sigma, tau, delta_gate, variant })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn delta_gate(&self) -> f64 {
        self.delta_gate
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma == 0.0
    }

    /// Counts at or below τ − Δ − 1 are answered Bottom without noise.
    pub fn lower_gate(&self) -> f64 {
        self.tau - self.delta_gate - 1.0
    }

    /// Two-sided only: counts at or above τ + Δ + 1 are answered Top.
    pub fn upper_gate(&self) -> f64 {
        self.tau + self.delta_gate + 1.0
    }

    /// τ ≥ 1 + Δ, so empty nodes are deterministically Bottom.
    pub fn empty_is_bottom(&self) -> bool {
        self.lower_gate() >= 0.0
    }
}

fn noisy_above<R: Rng + ?Sized>(count: f64, cfg: &ThresholdOracleConfig, rng: &mut R) -> Decision {
    let z = if cfg.is_noiseless() {
        0.0
    } else {
        let n: f64 = rng.sample(StandardNormal);
        cfg.sigma * n
    };
    if count + z > cfg.tau {
        Decision::Top
    } else {
        Decision::Bottom
    }
}

/// Top iff count > τ − Δ − 1 and count + Z > τ with Z ~ N(0, σ²).
///
/// Gated-out counts consume no randomness; their Z would never be observable.
pub fn check_threshold_one_sided<R: Rng + ?Sized>(count: u64, cfg: &ThresholdOracleConfig, rng: &mut R) -> Decision {
    let c = count as f64;
    if !(c > cfg.lower_gate()) {
        return Decision::Bottom;
    }
    noisy_above(c, cfg, rng)
}

/// Top deterministically iff count ≥ τ + Δ + 1, otherwise the one-sided rule.
pub fn check_threshold_two_sided<R: Rng + ?Sized>(count: u64, cfg: &ThresholdOracleConfig, rng: &mut R) -> Decision {
    let c = count as f64;
    if c >= cfg.upper_gate() {
        return Decision::Top;
    }
    check_threshold_one_sided(count, cfg, rng)
}

pub fn check_threshold<R: Rng + ?Sized>(count: u64, cfg: &ThresholdOracleConfig, rng: &mut R) -> Decision {
    match cfg.variant {
        Variant::OneSided => check_threshold_one_sided(count, cfg, rng),
        Variant::TwoSided => check_threshold_two_sided(count, cfg, rng),
    }
}

/// A private threshold test on node counts, as consumed by the heavy-hitter
/// marking.
pub trait CheckThreshold {
    fn check(&mut self, node: NodeId, count: u64) -> Decision;
}

pub struct GaussianSparseThreshold<R> {
    cfg: ThresholdOracleConfig,
    rng: R,
}

impl<R: Rng> GaussianSparseThreshold<R> {
    pub fn new(cfg: ThresholdOracleConfig, rng: R) -> Self {
        Self { cfg, rng }
    }

    pub fn config(&self) -> &ThresholdOracleConfig {
        &self.cfg
    }
}

impl<R: Rng> CheckThreshold for GaussianSparseThreshold<R> {
    fn check(&mut self, _node: NodeId, count: u64) -> Decision {
        check_threshold(count, &self.cfg, &mut self.rng)
    }
}

/// Wraps an oracle and records every queried node, so tests can count how
/// many queries touch a given root-to-leaf path.
pub struct InstrumentedOracle<O> {
    inner: O,
    queried: HashMap<NodeId, u32>,
}

impl<O: CheckThreshold> InstrumentedOracle<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, queried: HashMap::new() }
    }

    pub fn total_queries(&self) -> usize {
        self.queried.values().map(|&v| v as usize).sum()
    }

    /// Largest number of times any single node was queried.
    pub fn max_repeat(&self) -> u32 {
        self.queried.values().copied().max().unwrap_or(0)
    }

    pub fn was_queried(&self, node: NodeId) -> bool {
        self.queried.contains_key(&node)
    }

    /// Number of queries on `node` and its ancestors, i.e. the queries a
    /// datapoint stored below `node` takes part in.
    pub fn touches_on_path(&self, node: NodeId) -> u32 {
        node.path_from_root().map(|u| self.queried.get(&u).copied().unwrap_or(0)).sum()
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: CheckThreshold> CheckThreshold for InstrumentedOracle<O> {
    fn check(&mut self, node: NodeId, count: u64) -> Decision {
        *self.queried.entry(node).or_insert(0) += 1;
        self.inner.check(node, count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn empty_count_is_gated() {
        let cfg = ThresholdOracleConfig::new(3.0, 5.0, 4.0, Variant::OneSided).unwrap();
        let mut rng = stream_rng(0, Stream::Threshold, 0, 0);
        for _ in 0..1000 {
            assert_eq!(check_threshold_one_sided(0, &cfg, &mut rng), Decision::Bottom);
        }
    }

    #[test]
    fn gated_queries_draw_no_noise() {
        let cfg = ThresholdOracleConfig::new(3.0, 5.0, 4.0, Variant::OneSided).unwrap();
        let mut a = stream_rng(0, Stream::Threshold, 0, 0);
        let mut b = stream_rng(0, Stream::Threshold, 0, 0);
        for _ in 0..50 {
            check_threshold_one_sided(0, &cfg, &mut a);
        }
        let x: u64 = a.random();
        let y: u64 = b.random();
        assert_eq!(x, y);
    }

    #[test]
    fn noiseless_compare() {
        let cfg = ThresholdOracleConfig::noiseless(4.0, 3.0, Variant::OneSided).unwrap();
        let mut rng = stream_rng(0, Stream::Threshold, 0, 0);
        assert_eq!(check_threshold_one_sided(5, &cfg, &mut rng), Decision::Top);
        assert_eq!(check_threshold_one_sided(4, &cfg, &mut rng), Decision::Bottom);
    }

    #[test]
    fn one_sided_symmetry_at_tau() {
        let cfg = ThresholdOracleConfig::new(1.0, 10.0, 2.0, Variant::OneSided).unwrap();
        let mut rng = stream_rng(3, Stream::Threshold, 0, 0);
        let n = 100_000;
        let tops = (0..n).filter(|_| check_threshold_one_sided(10, &cfg, &mut rng).is_top()).count();
        assert!((tops as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn two_sided_upper_gate() {
        let cfg = ThresholdOracleConfig::new(1.0, 4.0, 3.0, Variant::TwoSided).unwrap();
        let mut rng = stream_rng(3, Stream::Threshold, 0, 0);
        for _ in 0..10_000 {
            assert_eq!(check_threshold_two_sided(8, &cfg, &mut rng), Decision::Top);
            assert_eq!(check_threshold_two_sided(0, &cfg, &mut rng), Decision::Bottom);
        }
        let n = 100_000;
        let tops = (0..n).filter(|_| check_threshold_two_sided(4, &cfg, &mut rng).is_top()).count();
        assert!((tops as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ThresholdOracleConfig::new(0.0, 1.0, 0.0, Variant::OneSided).is_err());
        assert!(ThresholdOracleConfig::new(1.0, 1.0, -1.0, Variant::OneSided).is_err());
        assert!(ThresholdOracleConfig::new(1.0, f64::NAN, 0.0, Variant::OneSided).is_err());
    }
}
