//! Direct simulation of the stratified walk: trajectories, excursions from
//! level 0, empirical characteristic functions, the contour tree of an
//! excursion and the branching process it encodes.

mod branching;
mod excursion;
mod sampler;
mod tree;
mod walk;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::environment::EnvError;

pub use branching::{gw_simulate, GwEstimate, GwOptions};
pub use excursion::{
    empirical_chf, excursion_path, sample_d, truncation_bias_bound, ChfEstimate, ExcursionBatch,
    ExcursionPath, ExcursionSample, DEFAULT_CAP,
};
pub use sampler::{AliasTable, Move, Stepper};
pub use tree::{local_times, ContourTree};
pub use walk::{simulate, simulate_stream, LevelCounts, TrajectorySummary, WalkState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("no untruncated samples")]
    Empty,
    #[error("direction has dimension {got}, environment has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("path is not an excursion: {0}")]
    NotExcursion(String),
}

/// Generator for stream `stream` of `seed`. Distinct streams are independent
/// and every draw is a pure function of (seed, stream, position).
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(0);
    rng
}
