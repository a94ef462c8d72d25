use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::sequences::{SeqError, SequenceSet, Side};

use super::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GwOptions {
    pub runs: u64,
    /// A run whose population reaches this size is counted as surviving.
    pub survive_at: u64,
    /// Runs alive after this many generations are counted as undecided.
    pub max_generations: usize,
}

impl Default for GwOptions {
    fn default() -> Self {
        Self {
            runs: 1_000_000,
            survive_at: 64,
            max_generations: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GwEstimate {
    pub runs: u64,
    pub extinct: u64,
    pub survived: u64,
    pub undecided: u64,
    /// Fraction of runs that died out.
    pub estimate: f64,
    pub stderr: f64,
}

/// Extinction frequency of the branching process of a one-sided excursion:
/// one individual at level 1, and each individual at level k has a
/// Geometric number of children, P(j) = p'^j (1 − p') with p' = 1/(1 + a_k).
pub fn gw_simulate(seq: &mut SequenceSet, side: Side, seed: u64, options: &GwOptions) -> Result<GwEstimate, SeqError> {
    let mut up = Vec::with_capacity(options.max_generations + 1);
    up.push(0.0);
    for k in 1..=options.max_generations {
        up.push(1.0 / (1.0 + seq.side_odds(side, k)?));
    }
    let outcomes: Vec<Option<bool>> = (0..options.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = stream_rng(seed, run);
            let mut z = 1u64;
            for &p in &up[1..] {
                let mut next = 0u64;
                for _ in 0..z {
                    while rng.random::<f64>() < p {
                        next += 1;
                    }
                }
                z = next;
                if z == 0 {
                    return Some(true);
                }
                if z >= options.survive_at {
                    return Some(false);
                }
            }
            None
        })
        .collect();
    let extinct = outcomes.iter().filter(|o| **o == Some(true)).count() as u64;
    let survived = outcomes.iter().filter(|o| **o == Some(false)).count() as u64;
    let n = options.runs.max(1) as f64;
    let estimate = extinct as f64 / n;
    Ok(GwEstimate {
        runs: options.runs,
        extinct,
        survived,
        undecided: options.runs - extinct - survived,
        estimate,
        stderr: (estimate * (1.0 - estimate) / n).sqrt(),
    })
}
