use crate::privacy::{EpsilonDelta, LeafMechanismKind};
use crate::threshold::Variant;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub num_trees: usize,
    pub max_depth: usize,
    pub budget: EpsilonDelta,
    /// Share of ε spent on the tree structure.
    pub structure_fraction: f64,
    /// Share of δ spent on the tree structure.
    pub delta_split: f64,
    /// Threshold override; defaults to 1 + Δ and may not go below it.
    pub tau: Option<f64>,
    pub leaf: LeafMechanismKind,
    pub variant: Variant,
    pub seed: u64,
}

impl TrainConfig {
    pub const DEFAULT_TREES: usize = 30;
    pub const DEFAULT_DEPTH: usize = 100;
    pub const DEFAULT_STRUCTURE_FRACTION: f64 = 0.75;
    pub const DEFAULT_DELTA_SPLIT: f64 = 0.5;

    pub fn new(budget: EpsilonDelta) -> Self {
        TrainConfig {
            num_trees: Self::DEFAULT_TREES,
            max_depth: Self::DEFAULT_DEPTH,
            budget,
            structure_fraction: Self::DEFAULT_STRUCTURE_FRACTION,
            delta_split: Self::DEFAULT_DELTA_SPLIT,
            tau: None,
            leaf: LeafMechanismKind::ExponentialMajority,
            variant: Variant::OneSided,
            seed: 0,
        }
    }

    pub fn with_trees(mut self, k: usize) -> Self {
        self.num_trees = k;
        self
    }

    pub fn with_depth(mut self, d: usize) -> Self {
        self.max_depth = d;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_leaf(mut self, leaf: LeafMechanismKind) -> Self {
        self.leaf = leaf;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_structure_fraction(mut self, f: f64) -> Self {
        self.structure_fraction = f;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_trees == 0 {
            return Err(Error::param("need at least one tree"));
        }
        if self.max_depth == 0 || self.max_depth > crate::hh::MAX_DEPTH {
            return Err(Error::param(format!("max depth must be in 1..={}", crate::hh::MAX_DEPTH)));
        }
        if !(self.structure_fraction > 0.0 && self.structure_fraction < 1.0) {
            return Err(Error::param(format!(
                "structure fraction must lie strictly between 0 and 1, got {}",
                self.structure_fraction
            )));
        }
        if !(self.delta_split > 0.0 && self.delta_split < 1.0) {
            return Err(Error::param(format!("delta split must lie strictly between 0 and 1, got {}", self.delta_split)));
        }
        if let Some(tau) = self.tau {
            if !tau.is_finite() {
                return Err(Error::param("tau must be finite"));
            }
        }
        Ok(())
    }
}

/// Two shares `(first, second)` of a total that add back to it exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSplit {
    pub eps1: f64,
    pub delta1: f64,
    pub eps2: f64,
    pub delta2: f64,
}

fn split_exact(total: f64, fraction: f64) -> (f64, f64) {
    // the larger share is the product, the smaller one an exact difference
    if fraction >= 0.5 {
        let a = total * fraction;
        (a, total - a)
    } else {
        let b = total * (1.0 - fraction);
        (total - b, b)
    }
}

/// Splits (ε, δ) into a structure and a leaf part with ε₁ + ε₂ = ε and
/// δ₁ + δ₂ = δ holding exactly in floating point.
pub fn split_budget(budget: EpsilonDelta, structure_fraction: f64, delta_split: f64) -> BudgetSplit {
    let (eps1, eps2) = split_exact(budget.epsilon(), structure_fraction);
    let (delta1, delta2) = split_exact(budget.delta(), delta_split);
    debug_assert_eq!(eps1 + eps2, budget.epsilon());
    debug_assert_eq!(delta1 + delta2, budget.delta());
    BudgetSplit { eps1, delta1, eps2, delta2 }
}

/// Every input and output of the privacy calibration for one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccountingTranscript {
    pub epsilon: f64,
    pub delta: f64,
    pub structure_fraction: f64,
    pub delta_split: f64,
    pub eps1: f64,
    pub delta1: f64,
    pub eps2: f64,
    pub delta2: f64,
    pub num_trees: usize,
    pub max_depth: usize,
    /// Threshold queries per datapoint across the forest.
    pub m: u64,
    pub variant: Variant,
    pub sigma: f64,
    pub delta_gate: f64,
    pub tau: f64,
    /// δ of the structure part at (σ, Δ, ε₁, m).
    pub structure_delta: f64,
    pub rho: f64,
    pub rho_leaf: f64,
    pub leaf: LeafMechanismKind,
}

impl AccountingTranscript {
    /// Nodes with at most this many rows are never split.
    pub fn gate(&self) -> f64 {
        self.tau - self.delta_gate - 1.0
    }

    /// `(key, value)` pairs in file order.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("epsilon", self.epsilon.to_string()),
            ("delta", self.delta.to_string()),
            ("structure_fraction", self.structure_fraction.to_string()),
            ("delta_split", self.delta_split.to_string()),
            ("eps1", self.eps1.to_string()),
            ("delta1", self.delta1.to_string()),
            ("eps2", self.eps2.to_string()),
            ("delta2", self.delta2.to_string()),
            ("num_trees", self.num_trees.to_string()),
            ("max_depth", self.max_depth.to_string()),
            ("m", self.m.to_string()),
            ("oracle_variant", self.variant.as_str().to_string()),
            ("sigma", self.sigma.to_string()),
            ("delta_gate", self.delta_gate.to_string()),
            ("tau", self.tau.to_string()),
            ("structure_delta", self.structure_delta.to_string()),
            ("rho", self.rho.to_string()),
            ("rho_leaf", self.rho_leaf.to_string()),
            ("leaf_mechanism", self.leaf.as_str().to_string()),
        ]
    }

    pub fn from_fields<'a>(mut get: impl FnMut(&str) -> Option<&'a str>) -> Result<Self> {
        let mut field = |key: &str| get(key).ok_or_else(|| Error::ModelFormat(format!("missing accounting field {key}")));
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::ModelFormat(format!("bad accounting field {key}={v}")))
        }
        Ok(AccountingTranscript {
            epsilon: num("epsilon", field("epsilon")?)?,
            delta: num("delta", field("delta")?)?,
            structure_fraction: num("structure_fraction", field("structure_fraction")?)?,
            delta_split: num("delta_split", field("delta_split")?)?,
            eps1: num("eps1", field("eps1")?)?,
            delta1: num("delta1", field("delta1")?)?,
            eps2: num("eps2", field("eps2")?)?,
            delta2: num("delta2", field("delta2")?)?,
            num_trees: num("num_trees", field("num_trees")?)?,
            max_depth: num("max_depth", field("max_depth")?)?,
            m: num("m", field("m")?)?,
            variant: {
                let v = field("oracle_variant")?;
                Variant::parse(v).ok_or_else(|| Error::ModelFormat(format!("unknown oracle variant {v}")))?
            },
            sigma: num("sigma", field("sigma")?)?,
            delta_gate: num("delta_gate", field("delta_gate")?)?,
            tau: num("tau", field("tau")?)?,
            structure_delta: num("structure_delta", field("structure_delta")?)?,
            rho: num("rho", field("rho")?)?,
            rho_leaf: num("rho_leaf", field("rho_leaf")?)?,
            leaf: {
                let v = field("leaf_mechanism")?;
                LeafMechanismKind::parse(v).ok_or_else(|| Error::ModelFormat(format!("unknown leaf mechanism {v}")))?
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_split() {
        let s = split_budget(EpsilonDelta::new(2.0, 1e-6).unwrap(), 0.75, 0.5);
        assert_eq!((s.eps1, s.eps2), (1.5, 0.5));
        assert_eq!((s.delta1, s.delta2), (5e-7, 5e-7));
    }

    #[test]
    fn split_is_exact() {
        for &eps in &[0.1, 0.3, 0.7, 1.1, 2.0, 3.3, 7.77] {
            for &delta in &[1e-5, 1e-6, 3e-7, 1e-9] {
                for &f in &[0.01, 0.1, 0.3, 0.49, 0.5, 0.51, 0.6, 0.75, 0.9, 0.99] {
                    let s = split_budget(EpsilonDelta::new(eps, delta).unwrap(), f, f);
                    assert_eq!(s.eps1 + s.eps2, eps);
                    assert_eq!(s.delta1 + s.delta2, delta);
                    assert!(s.eps1 > 0.0 && s.eps2 > 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_full_structure_fraction() {
        let cfg = TrainConfig::new(EpsilonDelta::new(1.0, 1e-6).unwrap()).with_structure_fraction(1.0);
        assert!(cfg.validate().is_err());
        assert!(TrainConfig::new(EpsilonDelta::new(1.0, 1e-6).unwrap()).validate().is_ok());
    }
}
