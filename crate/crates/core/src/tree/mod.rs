//! Feature schemas, data-independent random split draws and tree growth.

mod grow;
mod schema;
mod split;

pub use grow::{grow_random_tree, resolve_leaf, FeatureRow, GrownTree, NodeRule};
pub use schema::{FeatureKind, FeatureSchema, FeatureSpec};
pub use split::{draw_split, DrawOutcome, PathState, SplitKind, SplitRule};
