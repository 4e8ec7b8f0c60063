//! Sweep evaluation and the pieces behind the `secrely` subcommands.

mod figures;
mod output;
mod validate;

pub use figures::{figure_definitions, write_figures, FigureDef, FigureSeries};
pub use output::{format_float, write_csv, write_json, OutputFormat};
pub use validate::{mc_standard_error, run_validation, MetricKind, ValidationLine, ValidationOptions, ValidationReport};

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analytic::ClosedFormContext;
use crate::config::{ConfigFile, SecrecyMetrics, SystemConfig, ValidConfig};
use crate::error::Error;
use crate::monte_carlo::{estimate_metrics, MetricEstimates, SimulationPlan};
use crate::quadrature::{oracle_metrics, OracleMode, QuadratureSettings};
use crate::sweep::{SweepAxis, SweepFile, SweepSpec};

/// Failures surfaced by the CLI, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error at {point}: {source}")]
    Numerical { point: String, source: Error },
    #[error("I/O error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::ValidationFailed(_) => 1,
            HarnessError::Config(_) => 2,
            HarnessError::Numerical { .. } => 3,
            HarnessError::Io(_) => 4,
        }
    }

    fn at_point(point: String, err: Error) -> Self {
        match err {
            Error::Range { .. } => HarnessError::Config(format!("{point}: {err}")),
            other => HarnessError::Numerical { point, source: other },
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("cannot read {}: {e}", path.display())))
}

/// Reads and validates a JSON configuration file.
pub fn load_config(path: &Path) -> Result<SystemConfig, HarnessError> {
    let text = read_file(path)?;
    let file: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    let config = file.into_config();
    config
        .validate()
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    Ok(config)
}

/// Reads a sweep file and binds it to `base`. Without a path the sweep is the
/// single point described by `base`.
pub fn load_sweep(path: Option<&Path>, base: SystemConfig) -> Result<SweepSpec, HarnessError> {
    let spec = match path {
        None => SweepSpec::single_point(base).map_err(|e| HarnessError::Config(e.to_string()))?,
        Some(path) => {
            let text = read_file(path)?;
            let file: SweepFile = serde_json::from_str(&text)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
            file.into_spec(base)
        }
    };
    spec.check_grid()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(spec)
}

/// Which pipelines run alongside the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pipelines {
    pub oracle: Option<QuadratureSettings>,
    pub monte_carlo: Option<MonteCarloOptions>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloOptions {
    pub n_trials: u64,
    pub seed: u64,
}

/// One output row per grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResultRow {
    pub axis_value: f64,
    pub axis_value_linear: f64,
    pub p_nonzero_analytic: f64,
    pub sop_analytic: f64,
    pub ergodic_analytic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_nonzero_mc: Option<crate::config::EstimateWithCI>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sop_mc: Option<crate::config::EstimateWithCI>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ergodic_mc: Option<crate::config::EstimateWithCI>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_nonzero_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sop_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ergodic_oracle: Option<f64>,
    pub warnings: Vec<String>,
}

impl SweepResultRow {
    pub fn analytic(&self) -> SecrecyMetrics {
        SecrecyMetrics {
            p_nonzero: self.p_nonzero_analytic,
            sop: self.sop_analytic,
            ergodic_capacity: self.ergodic_analytic,
        }
    }
}

/// Seed for the Monte Carlo run at grid index `index`; keeps grid points
/// statistically independent while staying a pure function of `seed`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn point_label(axis: SweepAxis, value: f64) -> String {
    format!("{} = {}", axis.name(), format_float(value))
}

/// Evaluates one grid point.
pub fn evaluate_point(
    axis: SweepAxis,
    index: usize,
    value: f64,
    config: &ValidConfig,
    pipelines: &Pipelines,
    n_workers: usize,
) -> Result<SweepResultRow, HarnessError> {
    let at = |e: Error| HarnessError::at_point(point_label(axis, value), e);
    let ctx = ClosedFormContext::new(config).map_err(at)?;
    let analytic = ctx.metrics().map_err(at)?;

    let oracle = pipelines
        .oracle
        .map(|s| oracle_metrics(config, &s, OracleMode::Reduced))
        .transpose()
        .map_err(at)?;

    let mc: Option<MetricEstimates> = pipelines
        .monte_carlo
        .map(|mc| {
            estimate_metrics(&SimulationPlan {
                config: *config,
                n_trials: mc.n_trials,
                seed: point_seed(mc.seed, index),
                n_workers,
            })
        })
        .transpose()
        .map_err(at)?;

    Ok(SweepResultRow {
        axis_value: value,
        axis_value_linear: axis.linear_value(value),
        p_nonzero_analytic: analytic.p_nonzero,
        sop_analytic: analytic.sop,
        ergodic_analytic: analytic.ergodic_capacity,
        p_nonzero_mc: mc.map(|m| m.p_nonzero),
        sop_mc: mc.map(|m| m.sop),
        ergodic_mc: mc.map(|m| m.ergodic),
        p_nonzero_oracle: oracle.map(|o| o.p_nonzero),
        sop_oracle: oracle.map(|o| o.sop),
        ergodic_oracle: oracle.map(|o| o.ergodic_capacity),
        warnings: ctx.warnings().to_vec(),
    })
}

/// Evaluates every grid point, returning rows in grid order.
///
/// Without Monte Carlo the grid points run concurrently; with it they run in
/// order and each simulation uses all `n_workers`.
pub fn evaluate_sweep(
    spec: &SweepSpec,
    pipelines: &Pipelines,
    n_workers: usize,
) -> Result<Vec<SweepResultRow>, HarnessError> {
    if let Some(mc) = pipelines.monte_carlo {
        if mc.n_trials == 0 {
            return Err(HarnessError::Config("--trials must be at least 1".to_string()));
        }
    }
    spec.check_grid()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let points: Vec<(usize, f64, ValidConfig)> = spec
        .grid
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            spec.config_at(v)
                .validate()
                .map(|c| (i, v, c))
                .map_err(|e| HarnessError::Config(format!("{}: {e}", point_label(spec.axis, v))))
        })
        .collect::<Result<_, _>>()?;

    let eval = |&(i, v, ref c): &(usize, f64, ValidConfig)| {
        evaluate_point(spec.axis, i, v, c, pipelines, n_workers)
    };
    if pipelines.monte_carlo.is_some() {
        points.iter().map(eval).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n_workers.max(1))
            .build()
            .map_err(|e| HarnessError::Io(format!("cannot start worker pool: {e}")))?;
        pool.install(|| points.par_iter().map(eval).collect())
    }
}
