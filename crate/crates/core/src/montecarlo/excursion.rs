use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::environment::{Site, StratifiedEnvironment, MAX_DIM};

use super::sampler::{Move, Stepper};
use super::walk::WalkState;
use super::{stream_rng, McError};

/// Default step cap of one excursion.
pub const DEFAULT_CAP: u64 = 10_000_000;

/// Horizontal displacement accumulated between leaving level 0 and the first
/// return to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExcursionSample {
    pub displacement: Site,
    pub length: u64,
    pub truncated: bool,
}

/// Vertical skeleton of one excursion: the levels Y_0 = 0, Y_1, …, Y_σ = 0
/// and the number of horizontal steps taken at each of Y_0, …, Y_{σ−1}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcursionPath {
    pub levels: Vec<i64>,
    pub holds: Vec<u64>,
    pub sample: ExcursionSample,
}

fn run<R: Rng + ?Sized>(
    stepper: &mut Stepper,
    rng: &mut R,
    cap: u64,
    mut path: Option<&mut ExcursionPath>,
) -> Result<ExcursionSample, McError> {
    let mut state = WalkState::origin();
    loop {
        if state.step_count >= cap {
            return Ok(ExcursionSample {
                displacement: state.position,
                length: state.step_count,
                truncated: true,
            });
        }
        let level = state.level;
        let step = stepper.draw(level, rng)?;
        let point = match step {
            Move::Horizontal(i) => stepper.point(level, i)?,
            _ => [0; MAX_DIM],
        };
        state.advance(step, |_| point);
        if let Some(p) = path.as_deref_mut() {
            match step {
                Move::Horizontal(_) => *p.holds.last_mut().expect("one hold per visit") += 1,
                _ => {
                    p.levels.push(state.level);
                    if state.level != 0 {
                        p.holds.push(0);
                    }
                }
            }
        }
        if !matches!(step, Move::Horizontal(_)) && state.level == 0 {
            return Ok(ExcursionSample {
                displacement: state.position,
                length: state.step_count,
                truncated: false,
            });
        }
    }
}

/// One excursion on stream `stream` of `seed`, with its vertical skeleton.
pub fn excursion_path(
    env: &StratifiedEnvironment,
    seed: u64,
    stream: u64,
    cap: u64,
) -> Result<ExcursionPath, McError> {
    let mut stepper = Stepper::new(env);
    let mut rng = stream_rng(seed, stream);
    let mut path = ExcursionPath {
        levels: vec![0],
        holds: vec![0],
        sample: ExcursionSample {
            displacement: [0; MAX_DIM],
            length: 0,
            truncated: false,
        },
    };
    path.sample = run(&mut stepper, &mut rng, cap, Some(&mut path))?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcursionBatch {
    pub samples: Vec<ExcursionSample>,
    pub truncated: usize,
    pub cap: u64,
}

impl ExcursionBatch {
    pub fn truncated_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.truncated as f64 / self.samples.len() as f64
        }
    }

    pub fn untruncated(&self) -> usize {
        self.samples.len() - self.truncated
    }
}

/// |E e^{itu·D} − E[e^{itu·D} | not truncated]| ≤ 2·P(truncated).
pub fn truncation_bias_bound(batch: &ExcursionBatch) -> f64 {
    2.0 * batch.truncated_fraction()
}

/// `count` excursions, excursion j drawn from stream j of `seed`.
pub fn sample_d(
    env: &StratifiedEnvironment,
    seed: u64,
    count: u64,
    cap: u64,
) -> Result<ExcursionBatch, McError> {
    let samples: Vec<ExcursionSample> = (0..count)
        .into_par_iter()
        .map_init(
            || Stepper::new(env),
            |stepper, j| run(stepper, &mut stream_rng(seed, j), cap, None),
        )
        .collect::<Result<_, _>>()?;
    let truncated = samples.iter().filter(|s| s.truncated).count();
    Ok(ExcursionBatch {
        samples,
        truncated,
        cap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChfEstimate {
    pub value: Complex64,
    /// sqrt((Var Re + Var Im)/N) with sample variances.
    pub stderr: f64,
    pub count: usize,
}

/// Mean of e^{itu·D} over the untruncated samples.
pub fn empirical_chf(samples: &[ExcursionSample], u: &[f64], t: f64) -> Result<ChfEstimate, McError> {
    if u.len() > MAX_DIM {
        return Err(McError::Dimension {
            expected: MAX_DIM,
            got: u.len(),
        });
    }
    let phases: Vec<f64> = samples
        .iter()
        .filter(|s| !s.truncated)
        .map(|s| t * u.iter().zip(&s.displacement).map(|(a, &k)| a * k as f64).sum::<f64>())
        .collect();
    let n = phases.len();
    if n == 0 {
        return Err(McError::Empty);
    }
    let nf = n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for &x in &phases {
        re += x.cos();
        im += x.sin();
    }
    let (re, im) = (re / nf, im / nf);
    let stderr = if n > 1 {
        let ss: f64 = phases
            .iter()
            .map(|&x| (x.cos() - re).powi(2) + (x.sin() - im).powi(2))
            .sum();
        (ss / (nf - 1.0) / nf).sqrt()
    } else {
        0.0
    };
    Ok(ChfEstimate {
        value: Complex64::new(re, im),
        stderr,
        count: n,
    })
}
