use rayon::prelude::*;

use crate::data::Dataset;
use crate::hh::{HeavySet, NodeId};
use crate::privacy::LeafMechanismKind;
use crate::tree::{FeatureRow, FeatureSchema, SplitRule};
use crate::{Error, Result};

use super::config::AccountingTranscript;

#[derive(Debug, Clone, PartialEq)]
pub enum LeafPredictor {
    Class(u32),
    /// Class distribution.
    Scores(Vec<f64>),
}

/// A tree after pruning: the Heavy nodes with their split rules (`None` for
/// a Heavy node that could not be split) and one predictor per leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedTree {
    heavy: HeavySet,
    rules: Vec<Option<SplitRule>>,
    leaves: Vec<NodeId>,
    predictors: Vec<LeafPredictor>,
}

impl PrunedTree {
    /// Leaves implied by a Heavy set: the root when it is not Heavy, every
    /// non-Heavy child of a split Heavy node and every unsplit Heavy node.
    pub fn leaves_of(heavy: &HeavySet, rules: &[Option<SplitRule>]) -> Vec<NodeId> {
        if heavy.is_empty() {
            return vec![NodeId::ROOT];
        }
        let mut leaves = Vec::new();
        for (u, rule) in heavy.iter().zip(rules) {
            if rule.is_some() {
                leaves.extend([u.left(), u.right()].into_iter().filter(|c| !heavy.contains(*c)));
            } else {
                leaves.push(u);
            }
        }
        leaves.sort_unstable();
        leaves
    }

    pub fn new(
        heavy: HeavySet,
        rules: Vec<Option<SplitRule>>,
        leaves: Vec<NodeId>,
        predictors: Vec<LeafPredictor>,
    ) -> Result<Self> {
        if rules.len() != heavy.len() {
            return Err(Error::MalformedTree("one rule slot per Heavy node is required".into()));
        }
        if !heavy.is_upward_closed() {
            return Err(Error::MalformedTree("Heavy set is not upward-closed".into()));
        }
        for (u, rule) in heavy.iter().zip(&rules) {
            let child_heavy = heavy.contains(u.left()) || heavy.contains(u.right());
            if rule.is_none() && child_heavy {
                return Err(Error::MalformedTree(format!("unsplit Heavy node {u} has Heavy children")));
            }
        }
        if leaves != Self::leaves_of(&heavy, &rules) {
            return Err(Error::MalformedTree("leaf set does not match the Heavy set".into()));
        }
        if predictors.len() != leaves.len() {
            return Err(Error::MalformedTree("one predictor per leaf is required".into()));
        }
        Ok(PrunedTree { heavy, rules, leaves, predictors })
    }

    pub fn heavy(&self) -> &HeavySet {
        &self.heavy
    }

    pub fn rules(&self) -> &[Option<SplitRule>] {
        &self.rules
    }

    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn predictors(&self) -> &[LeafPredictor] {
        &self.predictors
    }

    /// Leaf reached by `row`.
    pub fn route<R: FeatureRow + ?Sized>(&self, row: &R) -> NodeId {
        let mut u = NodeId::ROOT;
        while let Ok(i) = self.heavy.labels().binary_search(&u) {
            match &self.rules[i] {
                Some(rule) => u = rule.route(u, row),
                None => break,
            }
        }
        u
    }

    pub fn leaf_predictor<R: FeatureRow + ?Sized>(&self, row: &R) -> &LeafPredictor {
        let leaf = self.route(row);
        let i = self.leaves.binary_search(&leaf).expect("every routed node is a leaf");
        &self.predictors[i]
    }
}

/// A trained forest. Immutable; prediction is read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub(crate) schema: FeatureSchema,
    pub(crate) seed: u64,
    pub(crate) transcript: AccountingTranscript,
    pub(crate) trees: Vec<PrunedTree>,
}

impl ForestModel {
    pub fn new(schema: FeatureSchema, seed: u64, transcript: AccountingTranscript, trees: Vec<PrunedTree>) -> Result<Self> {
        if trees.len() != transcript.num_trees || trees.is_empty() {
            return Err(Error::MalformedTree("tree count does not match the transcript".into()));
        }
        let k = schema.num_classes();
        for t in &trees {
            for p in t.predictors() {
                let ok = match (p, transcript.leaf) {
                    (LeafPredictor::Class(c), LeafMechanismKind::ExponentialMajority) => (*c as usize) < k,
                    (LeafPredictor::Scores(s), LeafMechanismKind::GaussianCounts) => s.len() == k,
                    _ => false,
                };
                if !ok {
                    return Err(Error::MalformedTree("leaf predictor does not fit the leaf mechanism".into()));
                }
            }
        }
        Ok(ForestModel { schema, seed, transcript, trees })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn transcript(&self) -> &AccountingTranscript {
        &self.transcript
    }

    pub fn trees(&self) -> &[PrunedTree] {
        &self.trees
    }

    pub fn num_leaves(&self) -> usize {
        self.trees.iter().map(|t| t.leaves().len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: u32,
    /// Vote shares under majority voting, mean leaf distribution otherwise.
    pub scores: Vec<f64>,
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn predict<R: FeatureRow + ?Sized>(model: &ForestModel, row: &R) -> Prediction {
    let k = model.schema.num_classes();
    let mut scores = vec![0.0; k];
    for tree in &model.trees {
        match tree.leaf_predictor(row) {
            LeafPredictor::Class(c) => scores[*c as usize] += 1.0,
            LeafPredictor::Scores(s) => scores.iter_mut().zip(s).for_each(|(a, b)| *a += b),
        }
    }
    let n = model.trees.len() as f64;
    scores.iter_mut().for_each(|s| *s /= n);
    Prediction { class: argmax(&scores) as u32, scores }
}

/// Predicted class for every row, in row order.
pub fn predict_dataset(model: &ForestModel, data: &Dataset) -> Result<Vec<u32>> {
    data.check_schema(&model.schema)?;
    Ok((0..data.len()).into_par_iter().map(|i| predict(model, &data.row(i)).class).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub rows: usize,
    pub correct: usize,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
}

impl Metrics {
    pub fn from_predictions(truth: &[u32], predicted: &[u32], num_classes: usize) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::Data("cannot evaluate on an empty set".into()));
        }
        if truth.len() != predicted.len() {
            return Err(Error::Data("prediction and label counts differ".into()));
        }
        let mut confusion = vec![vec![0u64; num_classes]; num_classes];
        let mut correct = 0;
        for (&y, &p) in truth.iter().zip(predicted) {
            confusion[y as usize][p as usize] += 1;
            correct += usize::from(y == p);
        }
        Ok(Metrics { accuracy: correct as f64 / truth.len() as f64, rows: truth.len(), correct, confusion })
    }
}

pub fn evaluate(model: &ForestModel, data: &Dataset) -> Result<Metrics> {
    let truth = data.require_labels()?;
    let predicted = predict_dataset(model, data)?;
    Metrics::from_predictions(truth, &predicted, model.schema.num_classes())
}
