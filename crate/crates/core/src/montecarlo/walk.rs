use std::collections::BTreeMap;

use serde::Serialize;

use crate::environment::{Site, StratifiedEnvironment, MAX_DIM};

use super::sampler::{Move, Stepper};
use super::{stream_rng, McError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WalkState {
    pub position: Site,
    pub level: i64,
    pub step_count: u64,
}

impl WalkState {
    pub fn origin() -> Self {
        Self {
            position: [0; MAX_DIM],
            level: 0,
            step_count: 0,
        }
    }

    pub fn is_origin(&self) -> bool {
        self.level == 0 && self.position.iter().all(|&x| x == 0)
    }

    /// Takes one step of the chain.
    pub fn advance(&mut self, step: Move, point: impl FnOnce(usize) -> Site) {
        match step {
            Move::Up => self.level += 1,
            Move::Down => self.level -= 1,
            Move::Horizontal(i) => {
                let k = point(i);
                for (x, dx) in self.position.iter_mut().zip(k) {
                    *x += dx;
                }
            }
        }
        self.step_count += 1;
    }
}

/// Departures from one level, split by move.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LevelCounts {
    pub up: u64,
    pub down: u64,
    /// Indexed like the support of the level's horizontal law.
    pub horizontal: Vec<u64>,
}

impl LevelCounts {
    pub fn total(&self) -> u64 {
        self.up + self.down + self.horizontal.iter().sum::<u64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub steps: u64,
    pub returns_to_origin: u64,
    /// Time spent at each level, over times 0..steps.
    pub level_histogram: BTreeMap<i64, u64>,
    pub max_abs_level: u64,
    pub final_state: WalkState,
    pub transitions: BTreeMap<i64, LevelCounts>,
}

pub fn simulate(env: &StratifiedEnvironment, seed: u64, steps: u64) -> Result<TrajectorySummary, McError> {
    simulate_stream(env, seed, 0, steps)
}

/// `steps` transitions from the origin using stream `stream` of `seed`.
pub fn simulate_stream(
    env: &StratifiedEnvironment,
    seed: u64,
    stream: u64,
    steps: u64,
) -> Result<TrajectorySummary, McError> {
    let mut rng = stream_rng(seed, stream);
    let mut stepper = Stepper::new(env);
    let mut state = WalkState::origin();
    let mut returns = 0;
    let mut max_abs = 0u64;
    let mut transitions: BTreeMap<i64, LevelCounts> = BTreeMap::new();
    for _ in 0..steps {
        let level = state.level;
        let step = stepper.draw(level, &mut rng)?;
        let counts = transitions.entry(level).or_default();
        match step {
            Move::Up => counts.up += 1,
            Move::Down => counts.down += 1,
            Move::Horizontal(i) => {
                if counts.horizontal.len() <= i {
                    counts.horizontal.resize(i + 1, 0);
                }
                counts.horizontal[i] += 1;
            }
        }
        let point = match step {
            Move::Horizontal(i) => stepper.point(level, i)?,
            _ => [0; MAX_DIM],
        };
        state.advance(step, |_| point);
        max_abs = max_abs.max(state.level.unsigned_abs());
        if state.is_origin() {
            returns += 1;
        }
    }
    let level_histogram = transitions.iter().map(|(&n, c)| (n, c.total())).collect();
    Ok(TrajectorySummary {
        steps,
        returns_to_origin: returns,
        level_histogram,
        max_abs_level: max_abs,
        final_state: state,
        transitions,
    })
}
