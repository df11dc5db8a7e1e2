use std::collections::BTreeMap;

use crate::{Error, Result};

use super::node::{NodeId, MAX_DEPTH};

pub const NO_PARENT: u32 = u32::MAX;

/// A stored (non-empty) node: its label, count and the index of its parent
/// in the previous layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    pub label: NodeId,
    pub count: u64,
    pub parent: u32,
}

/// Sparse count tree over heap-labelled nodes.
///
/// Only non-empty nodes are stored, one ascending vector per depth. These
/// vectors double as the per-layer queues of the heavy-hitter pass. The tree
/// may carry layers beyond `height` (a grown tree keeps its leaf layer
/// there); heavy-hitter detection only looks at the first `height` layers.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTree {
    height: usize,
    layers: Vec<Vec<TreeNode>>,
}

impl CountTree {
    /// Checks ordering, parent links and count additivity.
    pub fn from_layers(height: usize, layers: Vec<Vec<TreeNode>>) -> Result<Self> {
        let tree = CountTree { height, layers };
        tree.validate()?;
        Ok(tree)
    }

    pub(crate) fn from_layers_unchecked(height: usize, layers: Vec<Vec<TreeNode>>) -> Self {
        CountTree { height, layers }
    }

    /// Builds a tree from counts at depth `height - 1`, deriving every
    /// internal count as the sum of its children.
    pub fn from_leaf_counts(height: usize, leaves: impl IntoIterator<Item = (NodeId, u64)>) -> Result<Self> {
        if height == 0 || height > MAX_DEPTH + 1 {
            return Err(Error::MalformedTree(format!("height {height} out of range")));
        }
        let mut bottom: BTreeMap<NodeId, u64> = BTreeMap::new();
        for (leaf, count) in leaves {
            if leaf.depth() != height - 1 {
                return Err(Error::MalformedTree(format!(
                    "leaf {leaf} has depth {}, expected {}",
                    leaf.depth(),
                    height - 1
                )));
            }
            if count > 0 {
                *bottom.entry(leaf).or_insert(0) += count;
            }
        }
        let mut per_depth: Vec<Vec<(NodeId, u64)>> = vec![Vec::new(); height];
        per_depth[height - 1] = bottom.into_iter().collect();
        for d in (0..height - 1).rev() {
            let mut layer: Vec<(NodeId, u64)> = Vec::new();
            for &(label, count) in &per_depth[d + 1] {
                let p = label.parent().expect("non-root");
                match layer.last_mut() {
                    Some((l, c)) if *l == p => *c += count,
                    _ => layer.push((p, count)),
                }
            }
            per_depth[d] = layer;
        }
        let mut layers: Vec<Vec<TreeNode>> = Vec::with_capacity(height);
        for (d, nodes) in per_depth.into_iter().enumerate() {
            let mut out = Vec::with_capacity(nodes.len());
            let mut cursor = 0usize;
            for (label, count) in nodes {
                let parent = if d == 0 {
                    NO_PARENT
                } else {
                    let prev: &Vec<TreeNode> = &layers[d - 1];
                    let p = label.parent().expect("non-root");
                    while prev[cursor].label != p {
                        cursor += 1;
                    }
                    cursor as u32
                };
                out.push(TreeNode { label, count, parent });
            }
            layers.push(out);
        }
        Ok(CountTree { height, layers })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, depth: usize) -> &[TreeNode] {
        self.layers.get(depth).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn layers(&self) -> &[Vec<TreeNode>] {
        &self.layers
    }

    pub fn root_count(&self) -> u64 {
        self.layer(0).first().map(|n| n.count).unwrap_or(0)
    }

    /// Number of stored nodes within the first `height` layers.
    pub fn stored_nodes(&self) -> usize {
        self.layers.iter().take(self.height).map(Vec::len).sum()
    }

    pub fn find(&self, label: NodeId) -> Option<(usize, usize)> {
        let d = label.depth();
        let layer = self.layers.get(d)?;
        layer.binary_search_by(|n| n.label.cmp(&label)).ok().map(|i| (d, i))
    }

    /// Count of `label`, zero when it is not stored.
    pub fn count(&self, label: NodeId) -> u64 {
        self.find(label).map(|(d, i)| self.layers[d][i].count).unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TreeNode> {
        self.layers.iter().take(self.height).flatten()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedTree(m));
        if self.height == 0 || self.height > MAX_DEPTH + 1 {
            return bad(format!("height {} out of range", self.height));
        }
        if self.layers.len() < self.height {
            return bad(format!("{} layers for height {}", self.layers.len(), self.height));
        }
        if self.layers.len() > MAX_DEPTH + 1 {
            return bad(format!("{} layers exceed the label width", self.layers.len()));
        }
        match self.layers[0].as_slice() {
            [] => {
                if self.layers.iter().any(|l| !l.is_empty()) {
                    return bad("nodes stored below an empty root".into());
                }
                return Ok(());
            }
            [root] if root.label == NodeId::ROOT && root.parent == NO_PARENT => {}
            _ => return bad("layer 0 must hold exactly the root".into()),
        }
        for d in 0..self.layers.len() {
            let layer = &self.layers[d];
            for (i, node) in layer.iter().enumerate() {
                if node.count == 0 {
                    return bad(format!("empty node {} stored", node.label));
                }
                if node.label.depth() != d {
                    return bad(format!("node {} stored at depth {d}", node.label));
                }
                if i > 0 && layer[i - 1].label >= node.label {
                    return bad(format!("layer {d} is not strictly ascending at {}", node.label));
                }
                if d > 0 {
                    let prev = &self.layers[d - 1];
                    let p = node.parent as usize;
                    if p >= prev.len() || Some(prev[p].label) != node.label.parent() {
                        return bad(format!("node {} has a wrong parent link", node.label));
                    }
                }
            }
            if d + 1 < self.layers.len() {
                // additivity wherever children are stored
                let mut sums = vec![0u64; layer.len()];
                let mut has_child = vec![false; layer.len()];
                for child in &self.layers[d + 1] {
                    sums[child.parent as usize] += child.count;
                    has_child[child.parent as usize] = true;
                }
                for (i, node) in layer.iter().enumerate() {
                    if has_child[i] && sums[i] != node.count {
                        return bad(format!(
                            "node {} has count {} but its children sum to {}",
                            node.label, node.count, sums[i]
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}
