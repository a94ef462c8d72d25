use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use strata_core::montecarlo::DEFAULT_CAP;

#[derive(Debug, Parser, Serialize)]
#[command(name = "strata", version, about = "Recurrence analysis for random walks in stratified environments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Environment document (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, env = "STRATA_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Largest n of the series grid.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub n_max: u64,

    /// Points of the log-spaced n grid.
    #[arg(long, global = true, default_value_t = 24)]
    pub points: usize,

    #[arg(long, global = true)]
    pub t_min: Option<f64>,

    #[arg(long, global = true)]
    pub t_max: Option<f64>,

    #[arg(long, global = true)]
    pub t_points: Option<usize>,

    /// Midpoint nodes in θ for d = 2.
    #[arg(long, global = true, default_value_t = 64)]
    pub theta_nodes: usize,

    /// Slope margin around −1 in the series diagnostic.
    #[arg(long, global = true, default_value_t = 0.15)]
    pub margin: f64,

    /// Directory for CSV/JSON outputs and the run manifest.
    #[arg(long, global = true, env = "STRATA_OUT")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Run even if the environment fails the standing hypotheses.
    #[arg(long, global = true)]
    pub skip_validation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Check the standing hypotheses level by level.
    Validate {
        #[arg(long, allow_negative_numbers = true)]
        lo: Option<i64>,
        #[arg(long, allow_negative_numbers = true)]
        hi: Option<i64>,
    },
    /// Decide recurrence or transience.
    Classify,
    /// Compare χ_D from continued fractions with Monte Carlo excursions.
    ChiCompare {
        /// Explicit t values, comma separated.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Step cap of one excursion.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// Direction angle for d = 2.
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
    },
    /// Classify over a sweep of one numeric field of the config.
    Scan {
        /// Field name in "family", or a dotted path from the document root.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        /// Number of evenly spaced values, endpoints included.
        #[arg(long, default_value_t = 0)]
        steps: usize,
        /// Explicit values, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["from", "to"])]
        values: Vec<f64>,
    },
    /// Emit a curve for external plotting.
    Curve {
        #[arg(long, value_enum)]
        which: CurveKind,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Classify => "classify",
            Command::ChiCompare { .. } => "chi-compare",
            Command::Scan { .. } => "scan",
            Command::Curve { .. } => "curve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Phi,
    Psi,
    CriterionTerms,
    Integrand,
}

impl CurveKind {
    pub fn stem(self) -> &'static str {
        match self {
            CurveKind::Phi => "curve_phi",
            CurveKind::Psi => "curve_psi",
            CurveKind::CriterionTerms => "curve_criterion_terms",
            CurveKind::Integrand => "curve_integrand",
        }
    }
}

impl Cli {
    /// Explicit values win; otherwise a grid from --t-min/--t-max/--t-points,
    /// log-spaced when t_min > 0 and linear from 0.
    pub fn t_grid(&self, explicit: &[f64], default: (f64, f64, usize)) -> Vec<f64> {
        if !explicit.is_empty() {
            return explicit.to_vec();
        }
        let lo = self.t_min.unwrap_or(default.0);
        let hi = self.t_max.unwrap_or(default.1);
        let points = self.t_points.unwrap_or(default.2);
        match points {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..points)
                .map(|i| {
                    let s = i as f64 / (points - 1) as f64;
                    if i == 0 {
                        lo
                    } else if i + 1 == points {
                        hi
                    } else if lo > 0.0 {
                        (lo.ln() + s * (hi / lo).ln()).exp()
                    } else {
                        lo + s * (hi - lo)
                    }
                })
                .collect(),
        }
    }
}
