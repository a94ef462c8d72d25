use serde::Serialize;

use super::McError;

/// Plane tree read off the contour of a one-signed excursion of the
/// vertical chain: each step away from 0 creates a child of the current
/// node, each step towards 0 returns to the parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContourTree {
    pub parent: Vec<Option<usize>>,
    /// Generation of each node; the root, created by the first step, is generation 1.
    pub generation: Vec<usize>,
}

impl ContourTree {
    /// Tree of the excursion `levels` = (0, ±1, …, 0).
    pub fn from_levels(levels: &[i64]) -> Result<Self, McError> {
        let bad = |msg: &str| Err(McError::NotExcursion(msg.into()));
        if levels.len() < 3 || levels[0] != 0 || *levels.last().expect("nonempty") != 0 {
            return bad("must start and end at 0 with at least one visit away");
        }
        let sign = levels[1].signum();
        let mut tree = ContourTree {
            parent: Vec::new(),
            generation: Vec::new(),
        };
        let mut stack: Vec<usize> = Vec::new();
        for (k, w) in levels.windows(2).enumerate() {
            let (from, to) = (w[0] * sign, w[1] * sign);
            if (1..levels.len() - 1).contains(&(k + 1)) && to <= 0 {
                return bad("returns to 0 before the end");
            }
            match to - from {
                1 => {
                    tree.parent.push(stack.last().copied());
                    tree.generation.push(to as usize);
                    stack.push(tree.parent.len() - 1);
                }
                -1 => {
                    stack.pop();
                }
                _ => return bad("steps must be ±1"),
            }
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Z_n, indexed by n (entry 0 is 0).
    pub fn generation_sizes(&self) -> Vec<u64> {
        let top = self.generation.iter().copied().max().unwrap_or(0);
        let mut z = vec![0; top + 2];
        for &g in &self.generation {
            z[g] += 1;
        }
        z
    }
}

/// N_n = #{k < σ : |Y_k| = n}, indexed by n.
pub fn local_times(levels: &[i64]) -> Vec<u64> {
    let body = &levels[..levels.len().saturating_sub(1)];
    let top = body.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
    let mut n = vec![0; top + 1];
    for &l in body {
        n[l.unsigned_abs() as usize] += 1;
    }
    n
}
