//! Keyed random streams.
//!
//! Every random decision is drawn from a ChaCha stream whose key is the tuple
//! `(seed, stream kind, tree index, node label)`. Streams for different keys
//! are independent, and a stream never depends on the order in which other
//! streams were consumed, so tree structure is a function of the seed and the
//! node label alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Stream {
    Split = 1,
    Threshold = 2,
    Leaf = 3,
    Baseline = 4,
    Data = 5,
    Bench = 6,
}

pub fn stream_rng(seed: u64, stream: Stream, tree: u32, label: u128) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&tree.to_le_bytes());
    key[12..16].copy_from_slice(&(stream as u32).to_le_bytes());
    key[16..].copy_from_slice(&label.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
