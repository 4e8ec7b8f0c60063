//! Numerical evaluation of the defining integrals of the secrecy metrics.
//!
//! These only use the two SNR densities (and, in [`OracleMode::Reduced`],
//! their distribution functions); none of the closed-form metric algebra is
//! shared with [`crate::analytic`]. That makes them the reference the closed
//! forms are checked against.

use std::f64::consts::{LN_2, LOG2_E};

use super::{integrate_segments, scale_breakpoints, QuadratureSettings};
use crate::analytic::ClosedFormContext;
use crate::config::{SecrecyMetrics, ValidConfig};
use crate::error::{Error, Result};

/// How the inner integral of each double integral is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    /// Inner integrals replaced by the term-wise distribution functions.
    #[default]
    Reduced,
    /// Inner integrals computed by quadrature as well. Slow; intended for
    /// debugging and agrees with `Reduced` to about 1e-6.
    Nested,
}

/// Tolerances for the inner integrals in nested mode.
fn inner_settings(outer: &QuadratureSettings) -> QuadratureSettings {
    QuadratureSettings {
        abs_tol: outer.abs_tol.max(1e-11),
        rel_tol: outer.rel_tol.max(1e-10),
        ..*outer
    }
}

/// Loosened outer tolerances for nested mode.
fn nested_outer(outer: &QuadratureSettings) -> QuadratureSettings {
    QuadratureSettings {
        abs_tol: outer.abs_tol.max(1e-8),
        rel_tol: outer.rel_tol.max(1e-8),
        ..*outer
    }
}

/// `P(γ_opr > x)` by integrating the destination density over `[x, ∞)`.
pub fn oracle_ccdf_gamma_opr(
    ctx: &ClosedFormContext,
    x: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let points = scale_breakpoints(x, &ctx.scales(), settings.tail_cutoff_multiplier);
    let v = integrate_segments(|t| ctx.pdf_gamma_opr(t), &points, settings)?;
    Ok(v.value.clamp(0.0, 1.0))
}

/// `P(γ_opr,e <= x)` by integrating the eavesdropper density over `[0, x]`.
fn quadrature_cdf_gamma_opr_e(
    ctx: &ClosedFormContext,
    x: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let scales = [ctx.avg_snr_se(), ctx.eve_combined()];
    let mut points = scale_breakpoints(0.0, &scales, settings.tail_cutoff_multiplier);
    points.retain(|&p| p < x);
    points.push(x);
    let v = integrate_segments(|t| ctx.pdf_gamma_opr_e(t), &points, settings)?;
    Ok(v.value.clamp(0.0, 1.0))
}

struct Densities<'a> {
    ctx: &'a ClosedFormContext,
    mode: OracleMode,
    inner: QuadratureSettings,
}

impl Densities<'_> {
    fn eve_cdf(&self, x: f64) -> Result<f64> {
        match self.mode {
            OracleMode::Reduced => self.ctx.cdf_gamma_opr_e(x),
            OracleMode::Nested => quadrature_cdf_gamma_opr_e(self.ctx, x, &self.inner),
        }
    }

    fn dest_ccdf(&self, x: f64) -> Result<f64> {
        match self.mode {
            OracleMode::Reduced => self.ctx.ccdf_gamma_opr(x),
            OracleMode::Nested => oracle_ccdf_gamma_opr(self.ctx, x, &self.inner),
        }
    }
}

fn prepare(
    config: &ValidConfig,
    settings: &QuadratureSettings,
    mode: OracleMode,
) -> Result<(ClosedFormContext, QuadratureSettings, QuadratureSettings)> {
    settings.check()?;
    let ctx = ClosedFormContext::new(config)?;
    let (outer, inner) = match mode {
        OracleMode::Reduced => (*settings, *settings),
        OracleMode::Nested => (nested_outer(settings), inner_settings(settings)),
    };
    Ok((ctx, outer, inner))
}

/// `P(γ_opr > γ_opr,e) = ∫ f_opr(x) F_e(x) dx`.
pub fn oracle_prob_nonzero(
    config: &ValidConfig,
    settings: &QuadratureSettings,
    mode: OracleMode,
) -> Result<f64> {
    let (ctx, outer, inner) = prepare(config, settings, mode)?;
    let d = Densities { ctx: &ctx, mode, inner };
    let points = scale_breakpoints(0.0, &ctx.scales(), outer.tail_cutoff_multiplier);
    let v = integrate_segments(|x| Ok(ctx.pdf_gamma_opr(x)? * d.eve_cdf(x)?), &points, &outer)?;
    Ok(v.value.clamp(0.0, 1.0))
}

/// `1 - ∫ f_e(y) P(γ_opr > 2^Rs (1+y) - 1) dy`.
pub fn oracle_sop(
    config: &ValidConfig,
    settings: &QuadratureSettings,
    mode: OracleMode,
) -> Result<f64> {
    let (ctx, outer, inner) = prepare(config, settings, mode)?;
    let d = Densities { ctx: &ctx, mode, inner };
    let threshold = (config.target_rate * LN_2).exp();
    let points = scale_breakpoints(0.0, &ctx.scales(), outer.tail_cutoff_multiplier);
    let v = integrate_segments(
        |y| {
            let boundary = threshold * (1.0 + y) - 1.0;
            Ok(ctx.pdf_gamma_opr_e(y)? * d.dest_ccdf(boundary.max(0.0))?)
        },
        &points,
        &outer,
    )?;
    Ok((1.0 - v.value).clamp(0.0, 1.0))
}

/// Ergodic secrecy capacity as the difference of the two one-sided
/// expectations `E[C_M; γ_opr > γ_opr,e] - E[C_E; γ_opr > γ_opr,e]`.
pub fn oracle_ergodic_capacity(
    config: &ValidConfig,
    settings: &QuadratureSettings,
    mode: OracleMode,
) -> Result<f64> {
    let (ctx, outer, inner) = prepare(config, settings, mode)?;
    let d = Densities { ctx: &ctx, mode, inner };
    let points = scale_breakpoints(0.0, &ctx.scales(), outer.tail_cutoff_multiplier);
    let main = integrate_segments(
        |x| Ok(x.ln_1p() * ctx.pdf_gamma_opr(x)? * d.eve_cdf(x)?),
        &points,
        &outer,
    )?;
    let eve = integrate_segments(
        |y| Ok(y.ln_1p() * ctx.pdf_gamma_opr_e(y)? * d.dest_ccdf(y)?),
        &points,
        &outer,
    )?;
    let value = config.rate_prefactor.factor() * LOG2_E * (main.value - eve.value);
    if value < -1e-9 {
        return Err(Error::Cancellation(format!(
            "oracle ergodic capacity is negative ({value:e})"
        )));
    }
    Ok(value.max(0.0))
}

pub fn oracle_metrics(
    config: &ValidConfig,
    settings: &QuadratureSettings,
    mode: OracleMode,
) -> Result<SecrecyMetrics> {
    Ok(SecrecyMetrics {
        p_nonzero: oracle_prob_nonzero(config, settings, mode)?,
        sop: oracle_sop(config, settings, mode)?,
        ergodic_capacity: oracle_ergodic_capacity(config, settings, mode)?,
    })
}
