//! Private heavy-hitter detection on hierarchical counts.

mod baseline;
mod count_tree;
mod mark;
mod node;

pub use baseline::{baseline_sigma, baseline_topdown, binary_search_sigma};
pub use count_tree::{CountTree, TreeNode, NO_PARENT};
pub use mark::{
    brute_force_heavy, empty_nodes_exceed, mark_heavy_hitters, mark_heavy_hitters_reference,
    mark_with_oracle, misclassification_margin, write_heavy_dump, HeavySet,
};
pub use node::{NodeId, MAX_DEPTH};
