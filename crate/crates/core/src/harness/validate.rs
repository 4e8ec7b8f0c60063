use std::fmt;

use super::{evaluate_sweep, format_float, HarnessError, MonteCarloOptions, Pipelines, SweepResultRow};
use crate::config::EstimateWithCI;
use crate::quadrature::QuadratureSettings;
use crate::sweep::SweepSpec;

pub const ORACLE_PROB_TOL: f64 = 1e-7;
pub const ORACLE_ERGODIC_REL_TOL: f64 = 1e-6;
pub const MC_SIGMAS: f64 = 3.0;
pub const COMPLEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    PNonzero,
    Sop,
    Ergodic,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::PNonzero, MetricKind::Sop, MetricKind::Ergodic];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::PNonzero => "p_nonzero",
            MetricKind::Sop => "sop",
            MetricKind::Ergodic => "ergodic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    fn is_probability(self) -> bool {
        self != MetricKind::Ergodic
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub n_trials: u64,
    pub seed: u64,
    pub quadrature: QuadratureSettings,
    /// Shifts the named analytic metric before comparison. Only for exercising
    /// the failure path.
    pub corrupt: Option<MetricKind>,
}

/// One comparison in the report.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationLine {
    pub axis_value: f64,
    pub metric: MetricKind,
    pub analytic: f64,
    pub oracle: f64,
    pub oracle_ok: bool,
    pub mc: f64,
    /// Standard error used for the MC comparison, see [`mc_standard_error`].
    pub mc_se: f64,
    pub mc_ok: bool,
    /// `Some` only at zero target rate, where SOP + P must equal one.
    pub complement_ok: Option<bool>,
}

impl ValidationLine {
    pub fn passed(&self) -> bool {
        self.oracle_ok && self.mc_ok && self.complement_ok.unwrap_or(true)
    }

    pub fn z_score(&self) -> f64 {
        let d = (self.analytic - self.mc).abs();
        if self.mc_se > 0.0 {
            d / self.mc_se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub axis_name: &'static str,
    pub lines: Vec<ValidationLine>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(ValidationLine::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationLine> {
        self.lines.iter().filter(|l| !l.passed())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>14} {:>10} {:>22} {:>22} {:>10} {:>22} {:>10} {:>7}  status",
            self.axis_name, "metric", "analytic", "oracle", "|a-o|", "mc", "mc_se", "z"
        )?;
        for l in &self.lines {
            let mut status = String::from(if l.passed() { "PASS" } else { "FAIL" });
            if !l.oracle_ok {
                status.push_str(" oracle");
            }
            if !l.mc_ok {
                status.push_str(" mc");
            }
            if l.complement_ok == Some(false) {
                status.push_str(" complement");
            }
            writeln!(
                f,
                "{:>14} {:>10} {:>22.15e} {:>22.15e} {:>10.3e} {:>22.15e} {:>10.3e} {:>7.3}  {}",
                format_float(l.axis_value),
                l.metric.name(),
                l.analytic,
                l.oracle,
                (l.analytic - l.oracle).abs(),
                l.mc,
                l.mc_se,
                l.z_score(),
                status
            )?;
        }
        let failed = self.failures().count();
        if failed == 0 {
            writeln!(f, "PASS: {} comparisons", self.lines.len())
        } else {
            writeln!(f, "FAIL: {failed} of {} comparisons", self.lines.len())
        }
    }
}

/// Standard error for comparing `analytic` with a Monte Carlo estimate: the
/// estimate's own standard error, or for a proportion with no hits (or no
/// misses) the binomial error at the analytic value.
pub fn mc_standard_error(analytic: f64, mc: &EstimateWithCI, probability: bool) -> f64 {
    if mc.std_error > 0.0 || !probability {
        return mc.std_error;
    }
    let p = analytic.clamp(0.0, 1.0);
    (p * (1.0 - p) / mc.n_samples as f64).sqrt()
}

fn compare(
    row: &SweepResultRow,
    metric: MetricKind,
    analytic: f64,
    oracle: f64,
    mc: &EstimateWithCI,
    complement_ok: Option<bool>,
) -> ValidationLine {
    let oracle_ok = if metric.is_probability() {
        (analytic - oracle).abs() <= ORACLE_PROB_TOL
    } else {
        (analytic - oracle).abs() <= ORACLE_ERGODIC_REL_TOL * oracle.abs().max(f64::MIN_POSITIVE)
    };
    let mc_se = mc_standard_error(analytic, mc, metric.is_probability());
    let mut line = ValidationLine {
        axis_value: row.axis_value,
        metric,
        analytic,
        oracle,
        oracle_ok,
        mc: mc.mean,
        mc_se,
        mc_ok: false,
        complement_ok,
    };
    line.mc_ok = line.z_score() <= MC_SIGMAS;
    line
}

fn missing(what: &str) -> HarnessError {
    HarnessError::Numerical {
        point: "validation".to_string(),
        source: crate::error::Error::Domain(format!("{what} pipeline produced no result")),
    }
}

/// Runs closed forms, quadrature oracle and Monte Carlo at every grid point
/// and compares them.
pub fn run_validation(
    spec: &SweepSpec,
    options: &ValidationOptions,
    n_workers: usize,
) -> Result<ValidationReport, HarnessError> {
    let pipelines = Pipelines {
        oracle: Some(options.quadrature),
        monte_carlo: Some(MonteCarloOptions {
            n_trials: options.n_trials,
            seed: options.seed,
        }),
    };
    let rows = evaluate_sweep(spec, &pipelines, n_workers)?;
    let mut lines = Vec::with_capacity(rows.len() * 3);
    for (row, value) in rows.iter().zip(&spec.grid) {
        let rate = spec.config_at(*value).target_rate;
        let mut analytic = row.analytic();
        match options.corrupt {
            Some(MetricKind::PNonzero) => analytic.p_nonzero += 1e-3,
            Some(MetricKind::Sop) => analytic.sop += 1e-3,
            Some(MetricKind::Ergodic) => analytic.ergodic_capacity *= 1.001,
            None => {}
        }
        let complement = (rate == 0.0)
            .then(|| (analytic.sop - (1.0 - analytic.p_nonzero)).abs() <= COMPLEMENT_TOL);
        let triples = [
            (MetricKind::PNonzero, analytic.p_nonzero, row.p_nonzero_oracle, row.p_nonzero_mc),
            (MetricKind::Sop, analytic.sop, row.sop_oracle, row.sop_mc),
            (MetricKind::Ergodic, analytic.ergodic_capacity, row.ergodic_oracle, row.ergodic_mc),
        ];
        for (metric, a, o, mc) in triples {
            let o = o.ok_or_else(|| missing("oracle"))?;
            let mc = mc.ok_or_else(|| missing("Monte Carlo"))?;
            let c = if metric == MetricKind::Ergodic { None } else { complement };
            lines.push(compare(row, metric, a, o, &mc, c));
        }
    }
    Ok(ValidationReport {
        axis_name: spec.axis.name(),
        lines,
    })
}
