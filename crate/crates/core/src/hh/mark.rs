use std::collections::HashMap;
use std::io::Write;

use rand::Rng;

use crate::threshold::{CheckThreshold, Decision, GaussianSparseThreshold, ThresholdOracleConfig};
use crate::{Error, Result};

use super::count_tree::{CountTree, NO_PARENT};
use super::node::NodeId;

/// Nodes marked Heavy, ascending by label. Always upward-closed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeavySet {
    labels: Vec<NodeId>,
}

impl HeavySet {
    pub fn from_sorted(labels: Vec<NodeId>) -> Result<Self> {
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedTree("heavy labels must be strictly ascending".into()));
        }
        let set = HeavySet { labels };
        if !set.is_upward_closed() {
            return Err(Error::MalformedTree("heavy set is not upward-closed".into()));
        }
        Ok(set)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.labels.binary_search(&node).is_ok()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.labels.iter().copied()
    }

    pub fn labels(&self) -> &[NodeId] {
        &self.labels
    }

    pub fn is_upward_closed(&self) -> bool {
        self.labels.iter().all(|n| n.parent().is_none_or(|p| self.contains(p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Unmarked,
    Heavy,
    Light,
}

/// Marks heavy hitters with the sparse Gaussian threshold described by
/// `cfg`. Requires τ ≥ 1 + Δ so that empty subtrees can be skipped.
pub fn mark_heavy_hitters<R: Rng>(tree: &CountTree, cfg: &ThresholdOracleConfig, rng: R) -> Result<HeavySet> {
    if !cfg.empty_is_bottom() {
        return Err(Error::param(format!(
            "skipping empty subtrees needs tau >= 1 + delta_gate (tau={}, delta_gate={})",
            cfg.tau(),
            cfg.delta_gate()
        )));
    }
    tree.validate()?;
    let mut oracle = GaussianSparseThreshold::new(*cfg, rng);
    Ok(mark_with_oracle(tree, &mut oracle))
}

/// Runs the marking with an arbitrary oracle. Nodes that are not stored are
/// never queried, which matches any oracle that answers Bottom on empty
/// counts.
///
/// The recursion is the three-phase binary search over layers: query the
/// middle layer of the current subtree, recurse below the nodes that came
/// back Heavy, then recurse on the top half. Nodes are queried in ascending
/// label order within every layer, so each layer is consumed as a queue.
pub fn mark_with_oracle<O: CheckThreshold + ?Sized>(tree: &CountTree, oracle: &mut O) -> HeavySet {
    let height = tree.height();
    if tree.layer(0).is_empty() {
        return HeavySet::empty();
    }
    let mut marker = Marker {
        tree,
        oracle,
        heads: vec![0; height],
        marks: (0..height).map(|d| vec![Mark::Unmarked; tree.layer(d).len()]).collect(),
    };
    marker.run(NodeId::ROOT, 0, height);
    let labels = marker
        .marks
        .iter()
        .enumerate()
        .flat_map(|(d, marks)| {
            marks
                .iter()
                .zip(tree.layer(d))
                .filter(|(m, _)| **m == Mark::Heavy)
                .map(|(_, n)| n.label)
        })
        .collect();
    HeavySet { labels }
}

struct Marker<'a, O: ?Sized> {
    tree: &'a CountTree,
    oracle: &'a mut O,
    heads: Vec<usize>,
    marks: Vec<Vec<Mark>>,
}

impl<O: CheckThreshold + ?Sized> Marker<'_, O> {
    fn run(&mut self, root: NodeId, root_depth: usize, h: usize) {
        let mid = h / 2;
        let layer = root_depth + mid;
        let (lo, hi) = root.descendant_range(mid);
        let (a, b) = self.take(layer, lo, hi);

        // Phase I
        for i in a..b {
            match self.marks[layer][i] {
                Mark::Heavy => continue,
                Mark::Light => panic!(
                    "middle-layer node {} was already marked Light",
                    self.tree.layer(layer)[i].label
                ),
                Mark::Unmarked => {}
            }
            let node = self.tree.layer(layer)[i];
            match self.oracle.check(node.label, node.count) {
                Decision::Top => self.mark_heavy(layer, i),
                Decision::Bottom => self.marks[layer][i] = Mark::Light,
            }
        }

        // Phase II
        if h >= 3 {
            let below = h - mid - 1;
            for i in a..b {
                if self.marks[layer][i] != Mark::Heavy {
                    continue;
                }
                let u = self.tree.layer(layer)[i].label;
                for child in [u.left(), u.right()] {
                    if self.is_stored_next(layer + 1, child) {
                        self.run(child, layer + 1, below);
                    }
                }
            }
        }

        // Phase III
        if h >= 2 {
            self.run(root, root_depth, mid);
        }
    }

    /// Advances the queue of `layer` past labels below `lo` and returns the
    /// index range of stored labels in `[lo, hi)`.
    fn take(&mut self, layer: usize, lo: u128, hi: u128) -> (usize, usize) {
        let nodes = self.tree.layer(layer);
        let mut head = self.heads[layer];
        debug_assert!(head == 0 || nodes[head - 1].label.0 < lo, "layer {layer} queue moved backwards");
        while head < nodes.len() && nodes[head].label.0 < lo {
            head += 1;
        }
        let start = head;
        while head < nodes.len() && nodes[head].label.0 < hi {
            head += 1;
        }
        self.heads[layer] = head;
        (start, head)
    }

    fn is_stored_next(&mut self, layer: usize, label: NodeId) -> bool {
        let nodes = self.tree.layer(layer);
        let mut head = self.heads[layer];
        while head < nodes.len() && nodes[head].label < label {
            head += 1;
        }
        self.heads[layer] = head;
        head < nodes.len() && nodes[head].label == label
    }

    fn mark_heavy(&mut self, mut layer: usize, mut idx: usize) {
        loop {
            match self.marks[layer][idx] {
                Mark::Heavy => return,
                Mark::Light => panic!(
                    "ancestor {} of a Top node was already marked Light",
                    self.tree.layer(layer)[idx].label
                ),
                Mark::Unmarked => self.marks[layer][idx] = Mark::Heavy,
            }
            let parent = self.tree.layer(layer)[idx].parent;
            if parent == NO_PARENT {
                return;
            }
            layer -= 1;
            idx = parent as usize;
        }
    }
}

/// Largest height accepted by [`mark_heavy_hitters_reference`].
pub const REFERENCE_MAX_HEIGHT: usize = 22;

/// Non-skipping reference implementation that walks every label of the
/// complete tree, empty or not, and accepts any τ. Exponential in the
/// height; intended for cross-checking on small trees.
pub fn mark_heavy_hitters_reference<O: CheckThreshold + ?Sized>(tree: &CountTree, oracle: &mut O) -> Result<HeavySet> {
    let h = tree.height();
    if h > REFERENCE_MAX_HEIGHT {
        return Err(Error::param(format!("reference marking supports height <= {REFERENCE_MAX_HEIGHT}")));
    }
    let mut r = Reference { tree, oracle, marks: HashMap::new() };
    r.run(NodeId::ROOT, h);
    let mut labels: Vec<NodeId> = r.marks.into_iter().filter(|(_, m)| *m == Mark::Heavy).map(|(l, _)| l).collect();
    labels.sort_unstable();
    Ok(HeavySet { labels })
}

struct Reference<'a, O: ?Sized> {
    tree: &'a CountTree,
    oracle: &'a mut O,
    marks: HashMap<NodeId, Mark>,
}

impl<O: CheckThreshold + ?Sized> Reference<'_, O> {
    fn is_light(&self, u: NodeId) -> bool {
        u.path_from_root().any(|a| self.marks.get(&a) == Some(&Mark::Light))
    }

    fn run(&mut self, root: NodeId, h: usize) {
        let mid = h / 2;
        let (lo, hi) = root.descendant_range(mid);
        for label in lo..hi {
            let u = NodeId(label);
            if self.marks.get(&u) == Some(&Mark::Heavy) || self.is_light(u) {
                continue;
            }
            match self.oracle.check(u, self.tree.count(u)) {
                Decision::Top => {
                    for a in u.path_from_root() {
                        self.marks.insert(a, Mark::Heavy);
                    }
                }
                Decision::Bottom => {
                    self.marks.insert(u, Mark::Light);
                }
            }
        }
        if h >= 3 {
            let (lo, hi) = root.descendant_range(mid + 1);
            for label in lo..hi {
                let v = NodeId(label);
                if !self.is_light(v) {
                    self.run(v, h - mid - 1);
                }
            }
        }
        if h >= 2 {
            self.run(root, mid);
        }
    }
}

/// Exactly the stored nodes with count > τ.
///
/// When τ < 0 every empty node also satisfies the rule; those are not
/// materialised, see [`empty_nodes_exceed`].
pub fn brute_force_heavy(tree: &CountTree, tau: f64) -> HeavySet {
    let labels = tree.iter().filter(|n| n.count as f64 > tau).map(|n| n.label).collect();
    HeavySet { labels }
}

/// Whether empty nodes (count 0) would be heavy at threshold τ.
pub fn empty_nodes_exceed(tau: f64) -> bool {
    0.0 > tau
}

/// Smallest α such that every node with count ≥ τ + α is Heavy and every
/// node with count ≤ τ − α is not, floored at zero. Heavy labels that are
/// not stored count as empty nodes.
pub fn misclassification_margin(tree: &CountTree, heavy: &HeavySet, tau: f64) -> f64 {
    let mut alpha: f64 = 0.0;
    for node in tree.iter() {
        if !heavy.contains(node.label) {
            alpha = alpha.max(node.count as f64 - tau);
        }
    }
    for label in heavy.iter() {
        alpha = alpha.max(tau - tree.count(label) as f64);
    }
    alpha
}

/// Debug dump: one `label<TAB>depth<TAB>count` line per Heavy node,
/// ascending by label.
pub fn write_heavy_dump<W: Write>(mut out: W, tree: &CountTree, heavy: &HeavySet) -> std::io::Result<()> {
    for label in heavy.iter() {
        writeln!(out, "{}\t{}\t{}", label, label.depth(), tree.count(label))?;
    }
    Ok(())
}
