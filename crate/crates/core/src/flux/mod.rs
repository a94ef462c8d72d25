//! Directional flux: R_k^l(u), T_k^l(u), the κ accumulators and the φ family.

mod phi;
mod profile;

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::environment::MAX_DIM;
use crate::sequences::{SeqError, Side};

pub use phi::{phi, phi_inverse, phi_squared, prepare, PhiSequence, PhiVariant, Prepared};
pub use profile::{flux_r, flux_t, FluxProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluxError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("{side:?} index {index} not materialized")]
    Window { side: Side, index: u64 },
    #[error("invalid direction: {0}")]
    Direction(String),
    #[error("indices out of order: k = {k} > l = {l}")]
    Order { k: i64, l: i64 },
}

/// A unit vector of R^d with non-negative first coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    dim: usize,
    coords: [f64; MAX_DIM],
}

impl Direction {
    pub fn new(coords: &[f64]) -> Result<Self, FluxError> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(FluxError::Direction(format!("{} coordinates", coords.len())));
        }
        let norm = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(FluxError::Direction(format!("norm {norm}")));
        }
        if coords[0] < 0.0 {
            return Err(FluxError::Direction(format!("first coordinate {}", coords[0])));
        }
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            dim: coords.len(),
            coords: c,
        })
    }

    /// The first basis vector of R^d.
    pub fn axis(dim: usize) -> Self {
        let mut coords = [0.0; MAX_DIM];
        coords[0] = 1.0;
        Self { dim, coords }
    }

    /// (cos θ, sin θ) for θ ∈ [−π/2, π/2].
    pub fn planar(theta: f64) -> Result<Self, FluxError> {
        if theta.abs() > PI / 2.0 + 1e-15 {
            return Err(FluxError::Direction(format!("angle {theta}")));
        }
        Ok(Self {
            dim: 2,
            coords: [theta.cos().max(0.0), theta.sin(), 0.0],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn dot(&self, v: &[f64; MAX_DIM]) -> f64 {
        self.coords.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// A quadrature node on the half sphere: direction, angle (d = 2) and weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionNode {
    pub direction: Direction,
    pub theta: f64,
    pub weight: f64,
}

/// Quadrature over the half sphere. For d = 1 this is the single point +1
/// with weight 1; for d = 2 the composite midpoint rule in θ ∈ [−π/2, π/2].
pub fn direction_grid(dim: usize, nodes: usize) -> Result<Vec<DirectionNode>, FluxError> {
    match dim {
        1 => Ok(vec![DirectionNode {
            direction: Direction::axis(1),
            theta: 0.0,
            weight: 1.0,
        }]),
        2 => {
            if nodes == 0 {
                return Err(FluxError::Direction("zero quadrature nodes".into()));
            }
            let h = PI / nodes as f64;
            (0..nodes)
                .map(|j| {
                    let theta = -PI / 2.0 + (j as f64 + 0.5) * h;
                    Ok(DirectionNode {
                        direction: Direction::planar(theta)?,
                        theta,
                        weight: h,
                    })
                })
                .collect()
        }
        _ => Err(FluxError::Direction(format!(
            "no direction quadrature for d = {dim}"
        ))),
    }
}
