use rand::Rng;

use crate::environment::{EnvError, Site, StratifiedEnvironment};

/// Walker's alias table for a finite law.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    pub fn new(masses: &[f64]) -> Self {
        let k = masses.len();
        let total: f64 = masses.iter().sum();
        let mut scaled: Vec<f64> = masses.iter().map(|m| m * k as f64 / total).collect();
        let mut prob = vec![1.0; k];
        let mut alias: Vec<usize> = (0..k).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..k).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        Self { prob, alias }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let x = rng.random::<f64>() * self.prob.len() as f64;
        let i = (x as usize).min(self.prob.len() - 1);
        if x - (i as f64) < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }

    /// Probability that [`AliasTable::sample`] returns `i`.
    pub fn probability(&self, i: usize) -> f64 {
        let k = self.prob.len() as f64;
        let own = self.prob[i];
        let borrowed: f64 = (0..self.prob.len())
            .filter(|&j| j != i && self.alias[j] == i)
            .map(|j| 1.0 - self.prob[j])
            .sum();
        (own + borrowed) / k
    }
}

/// Support sizes above which the alias method replaces a linear scan.
const ALIAS_ABOVE: usize = 8;

#[derive(Debug, Clone)]
enum Horizontal {
    Linear(Vec<f64>),
    Alias(AliasTable),
}

#[derive(Debug, Clone)]
struct LevelSampler {
    p: f64,
    pq: f64,
    points: Vec<Site>,
    draw: Horizontal,
}

impl LevelSampler {
    fn new(env: &StratifiedEnvironment, level: i64) -> Result<Self, EnvError> {
        let law = env.stratum(level)?;
        let mu = law.mu();
        let draw = if mu.len() > ALIAS_ABOVE {
            Horizontal::Alias(AliasTable::new(mu.masses()))
        } else {
            let mut acc = 0.0;
            Horizontal::Linear(
                mu.masses()
                    .iter()
                    .map(|m| {
                        acc += m;
                        acc
                    })
                    .collect(),
            )
        };
        Ok(Self {
            p: law.p(),
            pq: law.p() + law.q(),
            points: mu.points().to_vec(),
            draw,
        })
    }
}

/// One transition: up, down, or a horizontal jump by the support point with
/// the given index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Up,
    Down,
    Horizontal(usize),
}

/// Transition sampler with per-level laws cached on first use.
#[derive(Debug, Clone)]
pub struct Stepper {
    env: StratifiedEnvironment,
    above: Vec<Option<LevelSampler>>,
    below: Vec<Option<LevelSampler>>,
}

impl Stepper {
    pub fn new(env: &StratifiedEnvironment) -> Self {
        Self {
            env: env.clone(),
            above: Vec::new(),
            below: Vec::new(),
        }
    }

    pub fn env(&self) -> &StratifiedEnvironment {
        &self.env
    }

    fn level(&mut self, n: i64) -> Result<&LevelSampler, EnvError> {
        let (slots, i) = if n >= 0 {
            (&mut self.above, n as usize)
        } else {
            (&mut self.below, (-n - 1) as usize)
        };
        if slots.len() <= i {
            slots.resize(i + 1, None);
        }
        if slots[i].is_none() {
            slots[i] = Some(LevelSampler::new(&self.env, n)?);
        }
        Ok(slots[i].as_ref().expect("filled above"))
    }

    /// Draws the next move from level `n`.
    pub fn draw<R: Rng + ?Sized>(&mut self, n: i64, rng: &mut R) -> Result<Move, EnvError> {
        let s = self.level(n)?;
        let x = rng.random::<f64>();
        Ok(if x < s.p {
            Move::Up
        } else if x < s.pq {
            Move::Down
        } else {
            Move::Horizontal(match &s.draw {
                Horizontal::Alias(table) => table.sample(rng),
                Horizontal::Linear(cum) => {
                    let y = rng.random::<f64>() * cum[cum.len() - 1];
                    cum.iter().position(|&c| y < c).unwrap_or(cum.len() - 1)
                }
            })
        })
    }

    /// Support point with index `i` of the law at level `n`.
    pub fn point(&mut self, n: i64, i: usize) -> Result<Site, EnvError> {
        Ok(self.level(n)?.points[i])
    }
}
