use crate::data::{Column, Dataset};
use crate::hh::{CountTree, HeavySet, NodeId, TreeNode, MAX_DEPTH, NO_PARENT};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

use super::schema::FeatureSchema;
use super::split::{draw_split, DrawOutcome, PathState, SplitRule};

/// Read access to the features of one row.
pub trait FeatureRow {
    fn numeric(&self, feature: usize) -> f64;
    fn category(&self, feature: usize) -> u32;
}

/// What happened at a stored node above the bottom layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeRule {
    /// Count at or below the gate; no rule was drawn.
    Unsplit,
    /// No feature could be split any further.
    ForcedLeaf,
    Split(SplitRule),
}

impl NodeRule {
    pub fn split(&self) -> Option<&SplitRule> {
        match self {
            NodeRule::Split(r) => Some(r),
            _ => None,
        }
    }
}

impl SplitRule {
    /// Child of `node` that `row` is routed to.
    pub fn route<R: FeatureRow + ?Sized>(&self, node: NodeId, row: &R) -> NodeId {
        let f = self.feature as usize;
        let left = match self.kind {
            super::SplitKind::Threshold(_) => self.goes_left_numeric(row.numeric(f)),
            super::SplitKind::CategoryIs(_) => self.goes_left_category(row.category(f)),
        };
        node.child(!left)
    }
}

/// A random tree grown to depth `d` over a dataset. Layers `0..d` form the
/// count tree handed to the heavy-hitter pass; layer `d` holds the bottom
/// nodes. Every stored node covers a contiguous range of `order`.
#[derive(Debug, Clone)]
pub struct GrownTree {
    max_depth: usize,
    counts: CountTree,
    bottom: Vec<TreeNode>,
    rules: Vec<Vec<NodeRule>>,
    starts: Vec<Vec<u32>>,
    order: Vec<u32>,
    placements: u64,
}

impl GrownTree {
    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Count tree over depths `0..d` (height `d`).
    pub fn count_tree(&self) -> &CountTree {
        &self.counts
    }

    /// Stored nodes at depth `d`.
    pub fn bottom_layer(&self) -> &[TreeNode] {
        &self.bottom
    }

    pub fn stored_nodes(&self) -> usize {
        self.counts.stored_nodes() + self.bottom.len()
    }

    /// Element placements performed by partitioning.
    pub fn placements(&self) -> u64 {
        self.placements
    }

    fn layer(&self, depth: usize) -> &[TreeNode] {
        if depth == self.max_depth {
            &self.bottom
        } else {
            self.counts.layer(depth)
        }
    }

    fn locate(&self, label: NodeId) -> Option<(usize, usize)> {
        let depth = label.depth();
        if depth > self.max_depth {
            return None;
        }
        let idx = self.layer(depth).binary_search_by_key(&label, |n| n.label).ok()?;
        Some((depth, idx))
    }

    /// Rule at a stored node above depth `d`.
    pub fn rule(&self, label: NodeId) -> Option<&NodeRule> {
        let (depth, idx) = self.locate(label)?;
        self.rules.get(depth).map(|r| &r[idx])
    }

    pub fn count(&self, label: NodeId) -> u64 {
        self.locate(label).map_or(0, |(d, i)| self.layer(d)[i].count)
    }

    /// Row indices covered by a node; empty when the node is not stored.
    pub fn members(&self, label: NodeId) -> &[u32] {
        match self.locate(label) {
            Some((d, i)) => {
                let node = &self.layer(d)[i];
                let start = self.starts[d][i] as usize;
                &self.order[start..start + node.count as usize]
            }
            None => &[],
        }
    }

    /// Per-class counts of the rows covered by a node.
    pub fn class_counts(&self, label: NodeId, labels: &[u32], num_classes: usize) -> Vec<u64> {
        let mut counts = vec![0u64; num_classes];
        for &i in self.members(label) {
            counts[labels[i as usize] as usize] += 1;
        }
        counts
    }

    /// All drawn split rules keyed by label, ascending.
    pub fn split_rules(&self) -> impl Iterator<Item = (NodeId, SplitRule)> + '_ {
        self.rules.iter().enumerate().flat_map(move |(d, rules)| {
            rules.iter().zip(self.counts.layer(d)).filter_map(|(r, n)| r.split().map(|s| (n.label, *s)))
        })
    }
}

/// Grows a random tree of depth `max_depth` whose split at label `i` is
/// drawn from a stream keyed by `(seed, tree, i)`, so the structure never
/// depends on the data. Nodes holding at most `gate` rows are not split.
pub fn grow_random_tree(
    data: &Dataset,
    schema: &FeatureSchema,
    max_depth: usize,
    gate: f64,
    seed: u64,
    tree: u32,
) -> Result<GrownTree> {
    if max_depth == 0 || max_depth > MAX_DEPTH {
        return Err(Error::param(format!("max depth must be in 1..={MAX_DEPTH}, got {max_depth}")));
    }
    if !(gate >= 0.0) {
        return Err(Error::param(format!("gate must be non-negative, got {gate}")));
    }
    data.check_schema(schema)?;
    let n = data.len();
    let mut g = Grower {
        data,
        max_depth,
        gate,
        seed,
        tree,
        layers: vec![Vec::new(); max_depth + 1],
        rules: vec![Vec::new(); max_depth],
        starts: vec![Vec::new(); max_depth + 1],
        order: (0..n as u32).collect(),
        placements: 0,
    };
    if n > 0 {
        g.push(0, TreeNode { label: NodeId::ROOT, count: n as u64, parent: NO_PARENT }, 0);
        let mut state = PathState::root(schema);
        g.grow(0, 0, &mut state);
    }
    let Grower { mut layers, rules, starts, order, placements, .. } = g;
    let bottom = layers.pop().unwrap();
    Ok(GrownTree {
        max_depth,
        counts: CountTree::from_layers_unchecked(max_depth, layers),
        bottom,
        rules,
        starts,
        order,
        placements,
    })
}

struct Grower<'a> {
    data: &'a Dataset,
    max_depth: usize,
    gate: f64,
    seed: u64,
    tree: u32,
    layers: Vec<Vec<TreeNode>>,
    rules: Vec<Vec<NodeRule>>,
    starts: Vec<Vec<u32>>,
    order: Vec<u32>,
    placements: u64,
}

impl Grower<'_> {
    fn push(&mut self, depth: usize, node: TreeNode, start: u32) -> usize {
        self.layers[depth].push(node);
        self.starts[depth].push(start);
        if depth < self.max_depth {
            self.rules[depth].push(NodeRule::Unsplit);
        }
        self.layers[depth].len() - 1
    }

    fn grow(&mut self, depth: usize, idx: usize, state: &mut PathState) {
        if depth == self.max_depth {
            return;
        }
        let node = self.layers[depth][idx];
        if node.count as f64 <= self.gate {
            return;
        }
        let mut rng = stream_rng(self.seed, Stream::Split, self.tree, node.label.0);
        let rule = match draw_split(state, &mut rng) {
            DrawOutcome::ForcedLeaf => {
                self.rules[depth][idx] = NodeRule::ForcedLeaf;
                return;
            }
            DrawOutcome::Split(rule) => rule,
        };
        self.rules[depth][idx] = NodeRule::Split(rule);

        let start = self.starts[depth][idx];
        let n_left = self.partition(start as usize, node.count as usize, &rule);
        self.placements += node.count;
        let children = [
            (node.label.left(), start, n_left as u64, true),
            (node.label.right(), start + n_left as u32, node.count - n_left as u64, false),
        ];
        for (label, child_start, count, left) in children {
            if count == 0 {
                continue;
            }
            let child = self.push(depth + 1, TreeNode { label, count, parent: idx as u32 }, child_start);
            let undo = state.descend(&rule, left);
            self.grow(depth + 1, child, state);
            state.undo(undo);
        }
    }

    /// Moves rows routed left to the front of `order[start..start+len]` and
    /// returns how many there are.
    fn partition(&mut self, start: usize, len: usize, rule: &SplitRule) -> usize {
        let slice = &mut self.order[start..start + len];
        let (mut i, mut j) = (0, len);
        match (self.data.column(rule.feature as usize), rule.kind) {
            (Column::Numeric(v), super::SplitKind::Threshold(t)) => {
                while i < j {
                    if v[slice[i] as usize] <= t {
                        i += 1;
                    } else {
                        j -= 1;
                        slice.swap(i, j);
                    }
                }
            }
            (Column::Categorical(v), super::SplitKind::CategoryIs(c)) => {
                while i < j {
                    if v[slice[i] as usize] == c {
                        i += 1;
                    } else {
                        j -= 1;
                        slice.swap(i, j);
                    }
                }
            }
            _ => unreachable!("schema was checked"),
        }
        i
    }
}

/// Leaf of the pruned tree that `row` falls into: descend from the root
/// while the current node is Heavy and has a split rule.
pub fn resolve_leaf<R: FeatureRow + ?Sized>(tree: &GrownTree, heavy: &HeavySet, row: &R) -> NodeId {
    let mut u = NodeId::ROOT;
    while u.depth() < tree.max_depth() && heavy.contains(u) {
        match tree.rule(u).and_then(NodeRule::split) {
            Some(rule) => u = rule.route(u, row),
            None => break,
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Value;
    use crate::tree::FeatureSpec;

    fn schema() -> FeatureSchema {
        FeatureSchema::new(
            "y",
            vec!["a".into(), "b".into()],
            vec![FeatureSpec::numeric("x", 0.0, 1.0), FeatureSpec::categorical("c", ["p", "q", "r"])],
        )
        .unwrap()
    }

    fn data(n: usize, offset: usize) -> Dataset {
        let xs = (0..n).map(|i| ((i + offset) as f64 * 0.618_034) % 1.0).collect();
        let cs = (0..n).map(|i| ((i + offset) % 3) as u32).collect();
        let ys = (0..n).map(|i| ((i + offset) % 2) as u32).collect();
        Dataset::new(vec![Column::Numeric(xs), Column::Categorical(cs)], Some(ys)).unwrap()
    }

    #[test]
    fn placements_are_n_times_d() {
        let d = data(300, 0);
        let t = grow_random_tree(&d, &schema(), 12, 0.0, 5, 0).unwrap();
        assert_eq!(t.placements(), 300 * 12);
        assert_eq!(t.bottom_layer().iter().map(|n| n.count).sum::<u64>(), 300);
        t.count_tree().validate().unwrap();
        assert_eq!(t.count_tree().root_count(), 300);
    }

    #[test]
    fn members_match_routing() {
        let d = data(200, 0);
        let s = schema();
        let t = grow_random_tree(&d, &s, 8, 0.0, 1, 3).unwrap();
        for (label, rule) in t.split_rules() {
            for &i in t.members(label) {
                let child = rule.route(label, &d.row(i as usize));
                assert!(t.members(child).contains(&i));
            }
        }
    }

    #[test]
    fn structure_is_data_independent() {
        let s = schema();
        let a = grow_random_tree(&data(200, 0), &s, 10, 0.0, 42, 1).unwrap();
        let b = grow_random_tree(&data(200, 1000), &s, 10, 0.0, 42, 1).unwrap();
        let rules_b: std::collections::HashMap<_, _> = b.split_rules().collect();
        let mut shared = 0;
        for (label, rule) in a.split_rules() {
            if let Some(rb) = rules_b.get(&label) {
                assert_eq!(*rb, rule);
                shared += 1;
            }
        }
        assert!(shared > 10);
    }

    #[test]
    fn gate_stops_small_nodes() {
        let d = data(100, 0);
        let t = grow_random_tree(&d, &schema(), 30, 5.0, 2, 0).unwrap();
        for (depth, layer) in t.count_tree().layers().iter().enumerate() {
            for n in layer {
                let rule = t.rule(n.label).unwrap();
                if n.count <= 5 {
                    assert_eq!(*rule, NodeRule::Unsplit);
                } else {
                    assert_ne!(*rule, NodeRule::Unsplit, "depth {depth}");
                }
            }
        }
    }

    #[test]
    fn one_hot_never_repeats_on_a_path() {
        let s = FeatureSchema::new("y", vec!["a".into()], vec![FeatureSpec::categorical("c", ["p", "q", "r"])]).unwrap();
        let d = Dataset::new(vec![Column::Categorical(vec![0, 1, 2, 2, 1])], Some(vec![0; 5])).unwrap();
        let t = grow_random_tree(&d, &s, 10, 0.0, 0, 0).unwrap();
        for layer in t.count_tree().layers() {
            for n in layer {
                if let Some(NodeRule::Split(r)) = t.rule(n.label) {
                    let mut used = vec![r.kind];
                    let mut u = n.label;
                    while let Some(p) = u.parent() {
                        let pr = t.rule(p).unwrap().split().unwrap();
                        assert!(!used.contains(&pr.kind));
                        used.push(pr.kind);
                        u = p;
                    }
                }
            }
        }
        // three categories allow at most three splits on any path
        assert!(t.count_tree().layers().iter().skip(4).all(|l| l.is_empty()));
    }

    #[test]
    fn resolve_examples() {
        let s = schema();
        let d = data(64, 0);
        let t = grow_random_tree(&d, &s, 6, 0.0, 9, 0).unwrap();
        let row = d.row_values(0);
        assert_eq!(resolve_leaf(&t, &HeavySet::empty(), &row[..]), NodeId::ROOT);
        let all: Vec<NodeId> = t.count_tree().iter().map(|n| n.label).collect();
        let mut all_sorted = all.clone();
        all_sorted.sort();
        let heavy = HeavySet::from_sorted(all_sorted).unwrap();
        for i in 0..d.len() {
            let leaf = resolve_leaf(&t, &heavy, &d.row(i));
            assert_eq!(leaf.depth(), 6);
            assert!(t.members(leaf).contains(&(i as u32)));
        }
    }

    #[test]
    fn resolve_on_seven_node_example() {
        // root and its left child split on x at 0.5 / 0.25; heavy = {1, 2, 4}
        let s = FeatureSchema::new("y", vec!["a".into()], vec![FeatureSpec::numeric("x", 0.0, 1.0)]).unwrap();
        let d = Dataset::new(vec![Column::Numeric(vec![0.1, 0.2, 0.05, 0.3, 0.9])], Some(vec![0; 5])).unwrap();
        let t = grow_random_tree(&d, &s, 4, 0.0, 0, 0).unwrap();
        let heavy = HeavySet::from_sorted(vec![NodeId(1), NodeId(2), NodeId(4)]).unwrap();
        let row = [Value::Num(0.0)];
        // the minimum value goes left at every split
        assert_eq!(resolve_leaf(&t, &heavy, &row[..]), NodeId(8));
    }

    #[test]
    fn rejects_schema_mismatch() {
        let d = Dataset::new(vec![Column::Numeric(vec![0.5])], Some(vec![0])).unwrap();
        assert!(grow_random_tree(&d, &schema(), 3, 0.0, 0, 0).is_err());
    }
}
