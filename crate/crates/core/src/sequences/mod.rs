//! Vertical sequences ρ_n, v_±, w_±, ψ and the generalized inverse.

mod inverse;
mod set;
mod vertical;

use serde::Serialize;
use thiserror::Error;

use crate::environment::EnvError;

pub use inverse::{
    generalized_inverse, GenInverse, Generator, MonotoneCache, MonotoneSequence, Prefix, Probe,
    Saturation, DEFAULT_CACHE_CAP,
};
pub use set::{PsiKind, SequenceSet, SeriesView, Tail, BALANCE_TOLERANCE, DEFAULT_LEVEL_CAP, LOG_RANGE};
pub use vertical::{
    vertical_classification, vertical_classification_with, DivergenceEvidence, SideBehaviour,
    VerticalClass, VerticalReport, VerticalThresholds,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("index {index} is beyond the computable horizon")]
    Horizon { index: u64 },
    #[error("generator broke monotonicity at index {index} (value {value})")]
    NotMonotone { index: u64, value: f64 },
}

/// Half-line of levels: n ≥ 0 or n ≤ −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

/// The four partial-sum sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Series {
    VPlus,
    VMinus,
    WPlus,
    WMinus,
}

impl Series {
    pub fn v(side: Side) -> Self {
        match side {
            Side::Plus => Series::VPlus,
            Side::Minus => Series::VMinus,
        }
    }

    pub fn w(side: Side) -> Self {
        match side {
            Side::Plus => Series::WPlus,
            Side::Minus => Series::WMinus,
        }
    }

    pub fn side(self) -> Side {
        match self {
            Series::VPlus | Series::WPlus => Side::Plus,
            Series::VMinus | Series::WMinus => Side::Minus,
        }
    }

    pub fn is_w(self) -> bool {
        matches!(self, Series::WPlus | Series::WMinus)
    }
}
