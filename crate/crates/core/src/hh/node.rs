use std::fmt;

/// Heap-style node label: the root is 1 and the children of `i` are `2i`
/// and `2i + 1`. Labels are 128-bit, which supports depths up to 126.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u128);

pub const MAX_DEPTH: usize = 126;

impl NodeId {
    pub const ROOT: NodeId = NodeId(1);

    pub fn new(label: u128) -> Option<Self> {
        (label >= 1).then_some(NodeId(label))
    }

    pub fn label(self) -> u128 {
        self.0
    }

    pub fn depth(self) -> usize {
        (127 - self.0.leading_zeros()) as usize
    }

    pub fn is_root(self) -> bool {
        self.0 == 1
    }

    pub fn parent(self) -> Option<NodeId> {
        (self.0 > 1).then_some(NodeId(self.0 >> 1))
    }

    pub fn left(self) -> NodeId {
        NodeId(self.0 << 1)
    }

    pub fn right(self) -> NodeId {
        NodeId((self.0 << 1) | 1)
    }

    pub fn child(self, right: bool) -> NodeId {
        NodeId((self.0 << 1) | right as u128)
    }

    /// Ancestor at `depth`, which must not exceed this node's depth.
    pub fn ancestor_at(self, depth: usize) -> NodeId {
        NodeId(self.0 >> (self.depth() - depth))
    }

    pub fn is_ancestor_or_self_of(self, other: NodeId) -> bool {
        let (a, b) = (self.depth(), other.depth());
        a <= b && other.0 >> (b - a) == self.0
    }

    /// Labels in the subtree of `self` that sit `levels` below it form the
    /// half-open range returned here.
    pub fn descendant_range(self, levels: usize) -> (u128, u128) {
        (self.0 << levels, (self.0 + 1) << levels)
    }

    /// Root, then every node down to and including `self`.
    pub fn path_from_root(self) -> impl Iterator<Item = NodeId> {
        let d = self.depth();
        (0..=d).map(move |k| NodeId(self.0 >> (d - k)))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
