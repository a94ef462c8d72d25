//! Recurrence classification: closed-form rules for the known families and a
//! numerical diagnostic on the main criterion series.

mod chung_fuchs;
mod closed;
mod series;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::chi::ChiError;
use crate::environment::{EnvError, StratifiedEnvironment};
use crate::flux::FluxError;
use crate::sequences::{vertical_classification, SeqError, SequenceSet, VerticalClass};

pub use chung_fuchs::{chung_fuchs_integral, directional_integrands, ChungFuchs, IntegrandNode, IntegrandRow};
pub use closed::{
    antisymmetric_classify, halfpipe_classify, halfpipe_sum, periodic_drift_classify,
    vertical_scale_classify, HalfPipeSum, Reflection,
};
pub use series::{
    criterion_term, log_grid, log_log_fit, series_diagnostic, transience_sufficient, Fit,
    DirectionInverse, SeriesContext, SeriesDiagnostics, SeriesTerm, Sufficiency, TransienceReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriterionError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error(transparent)]
    Chi(#[from] ChiError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("precondition not met: {0}")]
    Precondition(String),
    #[error("inverse at {x} is infinite")]
    Saturated { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Recurrent,
    Transient,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Recurrent => "Recurrent",
            Verdict::Transient => "Transient",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

/// The rule that produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// The vertical birth–death chain is transient.
    VerticalComponent,
    /// d ≥ 3.
    HighDimension,
    /// Antisymmetric power-law family: thresholds α ≥ 1 (d = 1), α ≥ 3 (d = 2).
    AntisymmetricPowerLaw,
    /// Antisymmetric environment: the one-sided φ_{u,++} series.
    AntisymmetricSeries,
    /// Σ 1/ρ_n < ∞, d = 1: sign of Σ η_n/ρ_n.
    HalfPipe,
    /// ψ(n) ≍ n in d = 2, so Σ ψ(n)^{-2} < ∞.
    VerticalScale,
    /// d = 1, bounded periodic ρ: the drift sums over one period decide.
    PeriodicDrift,
    /// Slope fit of the main criterion series.
    SeriesDiagnostic,
    /// Slope fit of the sufficient transience series Σ ∫ φ_u(n)^{-d} du.
    TransienceSeries,
}

impl Rule {
    pub fn label(self) -> &'static str {
        match self {
            Rule::VerticalComponent => "vertical component transient",
            Rule::HighDimension => "dimension d >= 3",
            Rule::AntisymmetricPowerLaw => "antisymmetric power-law threshold",
            Rule::AntisymmetricSeries => "antisymmetric one-sided series",
            Rule::HalfPipe => "half-pipe drift sum",
            Rule::VerticalScale => "vertical scale series",
            Rule::PeriodicDrift => "periodic drift sums",
            Rule::SeriesDiagnostic => "criterion series slope",
            Rule::TransienceSeries => "transience series slope",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub rule: Rule,
    pub detail: String,
    pub diagnostics: Option<SeriesDiagnostics>,
}

impl Classification {
    pub(crate) fn new(verdict: Verdict, rule: Rule, detail: impl Into<String>) -> Self {
        Self {
            verdict,
            rule,
            detail: detail.into(),
            diagnostics: None,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.verdict, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyOptions {
    /// Largest n of the diagnostic grid.
    pub n_max: u64,
    /// Number of log-spaced grid points.
    pub points: usize,
    /// Slope margin around −1.
    pub margin: f64,
    /// Midpoint nodes in θ for d = 2.
    pub theta_nodes: usize,
    /// Allowed relative gap between the θ-rule and its doubled version.
    pub quadrature_tolerance: f64,
    /// Horizon of the vertical classification.
    pub vertical_horizon: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            n_max: 100_000,
            points: 24,
            margin: 0.15,
            theta_nodes: 64,
            quadrature_tolerance: 0.01,
            vertical_horizon: 1 << 20,
        }
    }
}

/// Runs the cascade: vertical transience, d ≥ 3, closed-form rules, then
/// the series diagnostic.
pub fn classify(env: &StratifiedEnvironment, options: &ClassifyOptions) -> Result<Classification, CriterionError> {
    let mut seq = SequenceSet::new(env)?;
    let vertical = vertical_classification(&mut seq, options.vertical_horizon);
    if vertical.class == VerticalClass::Transient {
        return Ok(Classification::new(
            Verdict::Transient,
            Rule::VerticalComponent,
            format!("v_+: {:?}, v_-: {:?}", vertical.plus, vertical.minus),
        ));
    }
    if env.dim() >= 3 {
        return Ok(Classification::new(
            Verdict::Transient,
            Rule::HighDimension,
            format!("d = {}", env.dim()),
        ));
    }
    if let Some(c) = closed::power_law_threshold(env) {
        return Ok(c);
    }
    for rule in [closed::halfpipe_rule, vertical_scale_classify, periodic_drift_classify] {
        if let Some(c) = rule(&mut seq)? {
            return Ok(c);
        }
    }
    let diagnostic = series_diagnostic(&mut seq, options)?;
    if diagnostic.verdict != Verdict::Inconclusive {
        return Ok(diagnostic);
    }
    let sufficient = transience_sufficient(&mut seq, options)?;
    if sufficient.verdict == Sufficiency::Transient {
        return Ok(Classification {
            verdict: Verdict::Transient,
            rule: Rule::TransienceSeries,
            detail: sufficient.detail(),
            diagnostics: diagnostic.diagnostics,
        });
    }
    Ok(diagnostic)
}
