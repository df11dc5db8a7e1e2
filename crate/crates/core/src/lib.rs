//! Differentially private random forests built from deep, data-independent
//! random trees that are pruned by a private hierarchical heavy-hitter
//! detector.
//!
//! The crate is organised bottom-up:
//!
//! * [`privacy`]: normal CDF helpers, zCDP ↔ (ε, δ) conversion, the tight
//!   Gaussian-mechanism δ and the two leaf mechanisms.
//! * [`threshold`]: the sparse Gaussian threshold oracles (one- and
//!   two-sided), their joint-forest δ accounting and σ/Δ calibration.
//! * [`hh`]: count trees with heap-style labels, the binary-search style
//!   heavy-hitter marking, a brute-force oracle and the top-down baseline.
//! * [`tree`]: feature schemas, random split draws and tree growth.
//! * [`forest`]: training, prediction, evaluation and the model file format.
//! * [`data`], [`bench`], [`cli`]: CSV ingestion, the two-moons toy
//!   generator, benchmark sweeps and the command-line front end.

pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod forest;
pub mod hh;
pub mod privacy;
pub mod rng;
pub mod threshold;
pub mod tree;

pub use error::{Error, Result};
