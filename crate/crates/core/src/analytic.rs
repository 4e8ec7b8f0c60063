//! Closed-form densities and secrecy metrics.
//!
//! Notation used below:
//!
//! * `s  = γ̄_SD`, the direct-link mean SNR;
//! * `c  = γ̄_c`, the combined mean SNR of a relay path;
//! * `se = γ̄_SE`, `ce = γ̄_ce` on the eavesdropper side;
//! * `g_n = c·[n(1-ρ)+ρ]/n`, the mean of the n-th exponential component of
//!   the selected relay's SNR under outdated selection;
//! * `w_n = C(N,n)(-1)^(n-1)`, the alternating binomial weights (Σ w_n = 1).
//!
//! The destination SNR density is a signed mixture of hypoexponentials,
//! `f(x) = Σ w_n (e^(-x/g_n) - e^(-x/s)) / (g_n - s)`, and the eavesdropper
//! SNR is a single hypoexponential with means `ce` and `se`.
//!
//! Every expression divides by `g_n - s` and `ce - se`. These are removable
//! singularities; rather than carrying confluent limit forms the context nudges
//! `s` (or `se`) by a relative 1e-6 when a denominator gets within
//! `singularity_eps` of zero, and records a warning.

use crate::config::{RatePrefactor, SecrecyMetrics, ValidConfig};
use crate::error::{Error, Result};
use crate::numeric::{binomial, CompensatedSum};
use crate::special::exp_e1_product;

pub const DEFAULT_SINGULARITY_EPS: f64 = 1e-9;
/// Relative perturbation applied to a coinciding mean.
pub const SINGULARITY_NUDGE: f64 = 1e-6;
/// Largest relay count the alternating binomial sums are trusted for.
pub const MAX_RELAYS: u32 = 25;
/// Negative excursions of a non-negative quantity beyond this fraction of the
/// largest summand are reported as a cancellation failure.
pub const CANCELLATION_TOL: f64 = 1e-9;

/// One component of the binomial expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayTerm {
    pub n: u32,
    /// `C(N,n)(-1)^(n-1)`.
    pub weight: f64,
    /// `c·[n(1-ρ)+ρ]/n`.
    pub g: f64,
    /// `1/((ce-se)(g-s))`.
    pub a: f64,
}

/// Precomputed, desingularized state for the closed forms of one config.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormContext {
    config: ValidConfig,
    sd: f64,
    se: f64,
    ce: f64,
    terms: Vec<RelayTerm>,
    singularity_eps: f64,
    warnings: Vec<String>,
}

impl ClosedFormContext {
    pub fn new(config: &ValidConfig) -> Result<Self> {
        Self::with_singularity_eps(config, DEFAULT_SINGULARITY_EPS)
    }

    pub fn with_singularity_eps(config: &ValidConfig, singularity_eps: f64) -> Result<Self> {
        if !(singularity_eps > 0.0 && singularity_eps < SINGULARITY_NUDGE) {
            return Err(Error::range(
                "singularity_eps",
                format!("{singularity_eps} must lie in (0, {SINGULARITY_NUDGE})"),
            ));
        }
        let n_relays = config.n_relays;
        if n_relays > MAX_RELAYS {
            return Err(Error::Cancellation(format!(
                "N = {n_relays} exceeds {MAX_RELAYS}: the alternating binomial sum \
                 loses about 2^N in relative precision"
            )));
        }

        let c = config.relay_combined();
        let rho = config.rho;
        let gs: Vec<f64> = (1..=n_relays)
            .map(|n| {
                let n = f64::from(n);
                c * (n * (1.0 - rho) + rho) / n
            })
            .collect();

        let mut warnings = Vec::new();
        let near = |a: f64, b: f64| (a - b).abs() < singularity_eps * b;

        let mut sd = config.avg_snr_sd;
        if gs.iter().any(|&g| near(g, sd)) {
            sd = [1.0 + SINGULARITY_NUDGE, 1.0 - SINGULARITY_NUDGE]
                .into_iter()
                .map(|f| config.avg_snr_sd * f)
                .find(|&cand| !gs.iter().any(|&g| near(g, cand)))
                .ok_or_else(|| {
                    Error::NonFinite("could not desingularize avg_snr_sd".to_string())
                })?;
            warnings.push(format!(
                "avg_snr_sd nudged from {} to {sd}: coincides with a relay component mean",
                config.avg_snr_sd
            ));
        }

        let ce = config.eve_combined();
        let mut se = config.avg_snr_se;
        if near(ce, se) {
            se *= 1.0 + SINGULARITY_NUDGE;
            warnings.push(format!(
                "avg_snr_se nudged from {} to {se}: coincides with the eavesdropper relay-path mean",
                config.avg_snr_se
            ));
        }

        let terms = gs
            .into_iter()
            .zip(1..=n_relays)
            .map(|(g, n)| {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                RelayTerm {
                    n,
                    weight: sign * binomial(n_relays, n),
                    g,
                    a: 1.0 / ((ce - se) * (g - sd)),
                }
            })
            .collect();

        Ok(ClosedFormContext {
            config: *config,
            sd,
            se,
            ce,
            terms,
            singularity_eps,
            warnings,
        })
    }

    pub fn config(&self) -> &ValidConfig {
        &self.config
    }

    pub fn terms(&self) -> &[RelayTerm] {
        &self.terms
    }

    pub fn g_terms(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.g).collect()
    }

    pub fn a_terms(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.a).collect()
    }

    /// Direct-link mean actually used (after any nudge).
    pub fn avg_snr_sd(&self) -> f64 {
        self.sd
    }

    /// Eavesdropper direct-link mean actually used (after any nudge).
    pub fn avg_snr_se(&self) -> f64 {
        self.se
    }

    pub fn eve_combined(&self) -> f64 {
        self.ce
    }

    pub fn singularity_eps(&self) -> f64 {
        self.singularity_eps
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Every exponential scale appearing in the densities.
    pub fn scales(&self) -> Vec<f64> {
        let mut v = self.g_terms();
        v.extend([self.sd, self.se, self.ce]);
        v
    }

    /// Density of the destination SNR `γ_opr`.
    pub fn pdf_gamma_opr(&self, gamma: f64) -> Result<f64> {
        check_argument(gamma)?;
        let sd_tail = (-gamma / self.sd).exp();
        let sum: CompensatedSum = self
            .terms
            .iter()
            .map(|t| t.weight / (t.g - self.sd) * ((-gamma / t.g).exp() - sd_tail))
            .collect();
        non_negative(&sum, "destination SNR density")
    }

    /// `P(γ_opr > gamma)`, integrated term by term.
    pub fn ccdf_gamma_opr(&self, gamma: f64) -> Result<f64> {
        check_argument(gamma)?;
        let sd_part = self.sd * (-gamma / self.sd).exp();
        let sum: CompensatedSum = self
            .terms
            .iter()
            .map(|t| t.weight * (t.g * (-gamma / t.g).exp() - sd_part) / (t.g - self.sd))
            .collect();
        probability(sum.value(), "destination SNR survival function")
    }

    pub fn cdf_gamma_opr(&self, gamma: f64) -> Result<f64> {
        check_argument(gamma)?;
        let sd_part = self.sd * (-gamma / self.sd).exp_m1();
        // 1 - Σ w (g e^{-x/g} - s e^{-x/s})/(g-s), rewritten with expm1 so
        // small arguments keep their relative accuracy.
        let sum: CompensatedSum = self
            .terms
            .iter()
            .map(|t| -t.weight * (t.g * (-gamma / t.g).exp_m1() - sd_part) / (t.g - self.sd))
            .collect();
        probability(sum.value(), "destination SNR distribution function")
    }

    /// Density of the eavesdropper SNR `γ_opr,e`.
    pub fn pdf_gamma_opr_e(&self, gamma: f64) -> Result<f64> {
        check_argument(gamma)?;
        let v = ((-gamma / self.ce).exp() - (-gamma / self.se).exp()) / (self.ce - self.se);
        Ok(v.max(0.0))
    }

    /// Distribution function of `γ_opr,e`:
    /// `[ce(1 - e^(-x/ce)) - se(1 - e^(-x/se))] / (ce - se)`.
    pub fn cdf_gamma_opr_e(&self, gamma: f64) -> Result<f64> {
        check_argument(gamma)?;
        let v = (-self.ce * (-gamma / self.ce).exp_m1() + self.se * (-gamma / self.se).exp_m1())
            / (self.ce - self.se);
        Ok(v.clamp(0.0, 1.0))
    }

    /// Probability that the secrecy capacity is strictly positive,
    /// `P(γ_opr > γ_opr,e)`.
    pub fn prob_nonzero_secrecy(&self) -> Result<f64> {
        let (s, se, ce) = (self.sd, self.se, self.ce);
        let ce_w = ce / (ce - se);
        let se_w = se / (ce - se);
        let sum: CompensatedSum = self
            .terms
            .iter()
            .map(|t| {
                let g = t.g;
                let bracket = ce_w * (parallel(g, ce) - parallel(s, ce))
                    - se_w * (parallel(g, se) - parallel(s, se));
                t.weight * (1.0 - bracket / (g - s))
            })
            .collect();
        probability(sum.value(), "non-zero secrecy probability")
    }

    /// Secrecy outage probability at the configured target rate.
    pub fn secrecy_outage_prob(&self) -> Result<f64> {
        self.secrecy_outage_prob_at(self.config.target_rate)
    }

    /// `P(Cs < rate)` with the outage threshold `2^rate` on `(1+γ_opr)/(1+γ_opr,e)`.
    pub fn secrecy_outage_prob_at(&self, rate: f64) -> Result<f64> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::range("target_rate", format!("{rate} is not a finite rate >= 0")));
        }
        let (s, se, ce) = (self.sd, self.se, self.ce);
        let threshold = (rate * std::f64::consts::LN_2).exp();
        let one_minus = 1.0 - threshold;
        let sd_part = s
            * (one_minus / s).exp()
            * (1.0 / (threshold / s + 1.0 / ce) - 1.0 / (threshold / s + 1.0 / se));
        let sum: CompensatedSum = self
            .terms
            .iter()
            .map(|t| {
                let g = t.g;
                let g_part = g
                    * (one_minus / g).exp()
                    * (1.0 / (threshold / g + 1.0 / ce) - 1.0 / (threshold / g + 1.0 / se));
                t.weight * t.a * (g_part - sd_part)
            })
            .collect();
        probability(1.0 - sum.value(), "secrecy outage probability")
    }

    /// Ergodic secrecy capacity in bits/s/Hz under the configured prefactor.
    ///
    /// Each term has the form `∫ ln(1+x) e^(-zx) dx = e^z E1(z) / z`, with `z`
    /// the sum of two inverse means.
    pub fn ergodic_secrecy_capacity(&self) -> Result<f64> {
        let (s, se, ce) = (self.sd, self.se, self.ce);
        let log_moment = |z: f64| -> Result<f64> {
            if !(z > 0.0 && z.is_finite()) {
                return Err(Error::NonFinite(format!("E1 argument {z} is not positive")));
            }
            Ok(exp_e1_product(z)? / z)
        };

        let lm_s = log_moment(1.0 / s)?;
        let lm_s_ce = log_moment(1.0 / s + 1.0 / ce)?;
        let lm_s_se = log_moment(1.0 / s + 1.0 / se)?;

        let mut sum = CompensatedSum::new();
        for t in &self.terms {
            let g = t.g;
            let bracket = (ce - se) * (log_moment(1.0 / g)? - lm_s)
                - (ce + g) * log_moment(1.0 / g + 1.0 / ce)?
                + (ce + s) * lm_s_ce
                + (se + g) * log_moment(1.0 / g + 1.0 / se)?
                - (se + s) * lm_s_se;
            sum.add(t.weight * t.a * bracket);
        }

        let value = sum.value() * self.config.rate_prefactor.factor() / std::f64::consts::LN_2;
        let scale = sum.largest_term() * self.config.rate_prefactor.factor() / std::f64::consts::LN_2;
        if value >= 0.0 {
            Ok(value)
        } else if value >= -CANCELLATION_TOL * scale.max(1e-300) {
            Ok(0.0)
        } else {
            Err(Error::Cancellation(format!(
                "ergodic secrecy capacity evaluated to {value:e}"
            )))
        }
    }

    pub fn metrics(&self) -> Result<SecrecyMetrics> {
        Ok(SecrecyMetrics {
            p_nonzero: self.prob_nonzero_secrecy()?,
            sop: self.secrecy_outage_prob()?,
            ergodic_capacity: self.ergodic_secrecy_capacity()?,
        })
    }

    /// Whether capacities are reported with the ½ factor.
    pub fn rate_prefactor(&self) -> RatePrefactor {
        self.config.rate_prefactor
    }
}

/// `1/(1/a + 1/b)`.
fn parallel(a: f64, b: f64) -> f64 {
    1.0 / (1.0 / a + 1.0 / b)
}

fn check_argument(gamma: f64) -> Result<()> {
    if gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("SNR argument must be >= 0, got {gamma}")))
    }
}

fn non_negative(sum: &CompensatedSum, what: &str) -> Result<f64> {
    let v = sum.value();
    if v >= 0.0 {
        Ok(v)
    } else if v >= -CANCELLATION_TOL * sum.largest_term() {
        Ok(0.0)
    } else {
        Err(Error::Cancellation(format!(
            "{what} evaluated to {v:e} (largest term {:e})",
            sum.largest_term()
        )))
    }
}

fn probability(v: f64, what: &str) -> Result<f64> {
    if (-CANCELLATION_TOL..=1.0 + CANCELLATION_TOL).contains(&v) {
        Ok(v.clamp(0.0, 1.0))
    } else {
        Err(Error::Cancellation(format!("{what} evaluated to {v:e}, outside [0, 1]")))
    }
}
