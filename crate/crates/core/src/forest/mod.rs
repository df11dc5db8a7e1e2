//! Forest training under a single joint heavy-hitter budget, prediction,
//! evaluation and the versioned model file.

mod config;
mod format;
mod model;
mod train;

pub use config::{split_budget, AccountingTranscript, BudgetSplit, TrainConfig};
pub use format::{deserialize, load_model, save_model, serialize, MODEL_VERSION};
pub use model::{argmax, evaluate, predict, predict_dataset, ForestModel, LeafPredictor, Metrics, Prediction, PrunedTree};
pub use train::{plan, train, train_with_trees, TreeTrace};
