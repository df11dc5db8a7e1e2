use rayon::prelude::*;

use crate::data::Dataset;
use crate::hh::mark_heavy_hitters;
use crate::privacy::{em_epsilon_for_rho, exp_mech_select, gaussian_leaf_counts, max_rho_for, EpsilonDelta, LeafMechanismKind};
use crate::rng::{stream_rng, Stream};
use crate::threshold::{calibrate, forest_delta, queries_per_datapoint, two_sided_delta, ThresholdOracleConfig, Variant};
use crate::tree::{grow_random_tree, FeatureSchema, NodeRule};
use crate::{Error, Result};

use super::config::{split_budget, AccountingTranscript, TrainConfig};
use super::model::{ForestModel, LeafPredictor, PrunedTree};

/// Per-tree training statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeTrace {
    pub stored_nodes: usize,
    pub placements: u64,
    pub heavy_nodes: usize,
    pub leaves: usize,
    /// Rows summed over all leaves; equals n when leaves are disjoint.
    pub leaf_rows: u64,
}

fn infeasible(e: Error) -> Error {
    match e {
        Error::NonConvergence(msg) | Error::InvalidParameter(msg) => Error::InfeasibleBudget(msg),
        other => other,
    }
}

/// Calibrates the structure part of the budget and fixes the threshold.
pub fn plan(cfg: &TrainConfig) -> Result<AccountingTranscript> {
    cfg.validate()?;
    let split = split_budget(cfg.budget, cfg.structure_fraction, cfg.delta_split);
    let m = queries_per_datapoint(cfg.num_trees, cfg.max_depth);
    let cal = calibrate(split.eps1, split.delta1, m, cfg.variant, None).map_err(infeasible)?;
    let default_tau = 1.0 + cal.delta_gate;
    let tau = match cfg.tau {
        Some(t) if t < default_tau => {
            return Err(Error::param(format!("tau must be at least 1 + delta_gate = {default_tau}, got {t}")));
        }
        Some(t) => t,
        None => default_tau,
    };
    let structure_delta = match cfg.variant {
        Variant::OneSided => forest_delta(cal.sigma, cal.delta_gate, split.eps1, m),
        Variant::TwoSided => two_sided_delta(cal.sigma, cal.delta_gate, split.eps1, m),
    };
    if !(structure_delta <= split.delta1) {
        return Err(Error::InfeasibleBudget(format!(
            "structure delta {structure_delta:e} exceeds its share {:e}",
            split.delta1
        )));
    }
    let leaf_target = EpsilonDelta::new(split.eps2, split.delta2).map_err(infeasible)?;
    let rho = max_rho_for(leaf_target).map_err(infeasible)?.rho();
    Ok(AccountingTranscript {
        epsilon: cfg.budget.epsilon(),
        delta: cfg.budget.delta(),
        structure_fraction: cfg.structure_fraction,
        delta_split: cfg.delta_split,
        eps1: split.eps1,
        delta1: split.delta1,
        eps2: split.eps2,
        delta2: split.delta2,
        num_trees: cfg.num_trees,
        max_depth: cfg.max_depth,
        m,
        variant: cfg.variant,
        sigma: cal.sigma,
        delta_gate: cal.delta_gate,
        tau,
        structure_delta,
        rho,
        rho_leaf: rho / cfg.num_trees as f64,
        leaf: cfg.leaf,
    })
}

pub fn train(data: &Dataset, schema: &FeatureSchema, cfg: &TrainConfig) -> Result<ForestModel> {
    train_with_trees(data, schema, cfg).map(|(model, _)| model)
}

/// Trains a forest and also returns per-tree statistics.
///
/// All trees share one structure budget: the oracle noise is calibrated for
/// the total number of threshold queries a single row can take part in
/// across the forest. Each leaf then receives ρ/k of the leaf budget.
pub fn train_with_trees(data: &Dataset, schema: &FeatureSchema, cfg: &TrainConfig) -> Result<(ForestModel, Vec<TreeTrace>)> {
    let labels = data.require_labels()?;
    if data.is_empty() {
        return Err(Error::Data("cannot train on an empty dataset".into()));
    }
    data.check_schema(schema)?;
    let transcript = plan(cfg)?;
    let oracle = ThresholdOracleConfig::new(transcript.sigma, transcript.tau, transcript.delta_gate, cfg.variant)?;
    let num_classes = schema.num_classes();

    let trees: Vec<(PrunedTree, TreeTrace)> = (0..cfg.num_trees as u32)
        .into_par_iter()
        .map(|t| {
            let grown = grow_random_tree(data, schema, cfg.max_depth, transcript.gate(), cfg.seed, t)?;
            let heavy = mark_heavy_hitters(grown.count_tree(), &oracle, stream_rng(cfg.seed, Stream::Threshold, t, 0))?;
            let rules: Vec<_> = heavy
                .iter()
                .map(|u| grown.rule(u).and_then(NodeRule::split).copied())
                .collect();
            let leaves = PrunedTree::leaves_of(&heavy, &rules);
            let mut leaf_rows = 0;
            let predictors = leaves
                .iter()
                .map(|&leaf| {
                    let counts = grown.class_counts(leaf, labels, num_classes);
                    leaf_rows += counts.iter().sum::<u64>();
                    let mut rng = stream_rng(cfg.seed, Stream::Leaf, t, leaf.0);
                    privatize_leaf(&counts, &transcript, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            let trace = TreeTrace {
                stored_nodes: grown.stored_nodes(),
                placements: grown.placements(),
                heavy_nodes: heavy.len(),
                leaves: leaves.len(),
                leaf_rows,
            };
            debug_assert_eq!(leaf_rows, data.len() as u64);
            Ok((PrunedTree::new(heavy, rules, leaves, predictors)?, trace))
        })
        .collect::<Result<_>>()?;

    let (trees, traces) = trees.into_iter().unzip();
    let model = ForestModel::new(schema.clone(), cfg.seed, transcript, trees)?;
    Ok((model, traces))
}

fn privatize_leaf<R: rand::Rng + ?Sized>(counts: &[u64], tr: &AccountingTranscript, rng: &mut R) -> Result<LeafPredictor> {
    Ok(match tr.leaf {
        LeafMechanismKind::ExponentialMajority => {
            let scores: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            LeafPredictor::Class(exp_mech_select(&scores, em_epsilon_for_rho(tr.rho_leaf), rng)? as u32)
        }
        LeafMechanismKind::GaussianCounts => LeafPredictor::Scores(gaussian_leaf_counts(counts, tr.num_trees, tr.rho, rng)),
    })
}
