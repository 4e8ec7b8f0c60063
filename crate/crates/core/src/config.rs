//! Model parameters and result containers.
//!
//! All average SNRs are held on a linear scale. The JSON configuration format
//! carries them in dB (`*_db` fields); conversion happens once, in
//! [`ConfigFile::into_config`].

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether the secrecy capacity carries the ½ half-duplex factor.
///
/// The ergodic capacity closed form is stated with the ½ factor while the
/// outage expression uses the rate threshold `2^Rs` (no ½). `Half` is the
/// default; `Unit` doubles capacity-valued outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatePrefactor {
    #[default]
    Half,
    Unit,
}

impl RatePrefactor {
    /// Multiplier applied to `log2(1+a) - log2(1+b)`.
    pub fn factor(self) -> f64 {
        match self {
            RatePrefactor::Half => 0.5,
            RatePrefactor::Unit => 1.0,
        }
    }
}

/// System parameters for one evaluation point. SNRs are linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_relays: u32,
    /// Power correlation between the selection-time and transmission-time
    /// relay SNRs; 1 is perfect CSI, 0 fully outdated.
    pub rho: f64,
    pub avg_snr_sd: f64,
    pub avg_snr_sr: f64,
    pub avg_snr_rd: f64,
    pub avg_snr_se: f64,
    pub avg_snr_sb: f64,
    pub avg_snr_be: f64,
    /// Target secrecy rate in bits/s/Hz.
    pub target_rate: f64,
    #[serde(default)]
    pub rate_prefactor: RatePrefactor,
}

impl SystemConfig {
    /// Checks every range invariant and attaches the derived combined SNRs.
    pub fn validate(&self) -> Result<ValidConfig> {
        if self.n_relays == 0 {
            return Err(Error::range("n_relays", "at least one relay is required"));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::range(
                "rho",
                format!("{} is not in [0, 1]", self.rho),
            ));
        }
        for (field, value) in [
            ("avg_snr_sd", self.avg_snr_sd),
            ("avg_snr_sr", self.avg_snr_sr),
            ("avg_snr_rd", self.avg_snr_rd),
            ("avg_snr_se", self.avg_snr_se),
            ("avg_snr_sb", self.avg_snr_sb),
            ("avg_snr_be", self.avg_snr_be),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::range(
                    field,
                    format!("{value} must be a finite positive linear SNR"),
                ));
            }
        }
        if !(self.target_rate.is_finite() && self.target_rate >= 0.0) {
            return Err(Error::range(
                "target_rate",
                format!("{} must be finite and non-negative", self.target_rate),
            ));
        }

        let relay_combined = combined_snr(self.avg_snr_sr, self.avg_snr_rd);
        let eve_combined = combined_snr(self.avg_snr_sb, self.avg_snr_be);
        for (field, value) in [
            ("avg_snr_sr/avg_snr_rd", relay_combined),
            ("avg_snr_sb/avg_snr_be", eve_combined),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::range(
                    field,
                    format!("combined SNR {value} is not a finite positive number"),
                ));
            }
        }

        Ok(ValidConfig {
            config: *self,
            relay_combined,
            eve_combined,
        })
    }

    /// Sets both relay hops so that the combined relay SNR equals `combined`.
    pub fn with_relay_combined(mut self, combined: f64) -> Self {
        self.avg_snr_sr = 2.0 * combined;
        self.avg_snr_rd = 2.0 * combined;
        self
    }

    /// Sets both eavesdropper relay hops so that their combination equals `combined`.
    pub fn with_eve_combined(mut self, combined: f64) -> Self {
        self.avg_snr_sb = 2.0 * combined;
        self.avg_snr_be = 2.0 * combined;
        self
    }

    /// Operating point used throughout the figures: five relays, `Rs = 2`,
    /// combined relay SNRs at half of the corresponding direct-link SNR.
    pub fn figure_defaults(rho: f64, avg_snr_sd_db: f64, avg_snr_se_db: f64) -> Self {
        let sd = db_to_linear(avg_snr_sd_db);
        let se = db_to_linear(avg_snr_se_db);
        SystemConfig {
            n_relays: 5,
            rho,
            avg_snr_sd: sd,
            avg_snr_sr: 1.0,
            avg_snr_rd: 1.0,
            avg_snr_se: se,
            avg_snr_sb: 1.0,
            avg_snr_be: 1.0,
            target_rate: 2.0,
            rate_prefactor: RatePrefactor::Half,
        }
        .with_relay_combined(0.5 * sd)
        .with_eve_combined(0.5 * se)
    }
}

/// Harmonic-style combination `ab/(a+b)`: the mean of `min(X, Y)` for
/// independent exponentials with means `a` and `b`.
pub fn combined_snr(a: f64, b: f64) -> f64 {
    a * b / (a + b)
}

/// A [`SystemConfig`] that passed validation, with derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidConfig {
    config: SystemConfig,
    relay_combined: f64,
    eve_combined: f64,
}

impl ValidConfig {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    /// Combined mean SNR of a legitimate two-hop relay path.
    pub fn relay_combined(&self) -> f64 {
        self.relay_combined
    }

    /// Combined mean SNR of the eavesdropper's relay path.
    pub fn eve_combined(&self) -> f64 {
        self.eve_combined
    }
}

impl Deref for ValidConfig {
    type Target = SystemConfig;

    fn deref(&self) -> &SystemConfig {
        &self.config
    }
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "linear_to_db requires a positive argument, got {x}"
        )));
    }
    Ok(10.0 * x.log10())
}

/// On-disk JSON form of [`SystemConfig`], with SNRs in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_relays: u32,
    pub rho: f64,
    pub avg_snr_sd_db: f64,
    pub avg_snr_sr_db: f64,
    pub avg_snr_rd_db: f64,
    pub avg_snr_se_db: f64,
    pub avg_snr_sb_db: f64,
    pub avg_snr_be_db: f64,
    pub target_rate: f64,
    #[serde(default)]
    pub rate_prefactor: RatePrefactor,
}

impl ConfigFile {
    pub fn into_config(self) -> SystemConfig {
        SystemConfig {
            n_relays: self.n_relays,
            rho: self.rho,
            avg_snr_sd: db_to_linear(self.avg_snr_sd_db),
            avg_snr_sr: db_to_linear(self.avg_snr_sr_db),
            avg_snr_rd: db_to_linear(self.avg_snr_rd_db),
            avg_snr_se: db_to_linear(self.avg_snr_se_db),
            avg_snr_sb: db_to_linear(self.avg_snr_sb_db),
            avg_snr_be: db_to_linear(self.avg_snr_be_db),
            target_rate: self.target_rate,
            rate_prefactor: self.rate_prefactor,
        }
    }
}

/// The three secrecy metrics at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecrecyMetrics {
    pub p_nonzero: f64,
    pub sop: f64,
    pub ergodic_capacity: f64,
}

/// Normal-approximation 95% two-sided quantile.
pub const Z_95: f64 = 1.96;

/// A Monte Carlo estimate with its standard error and 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

impl EstimateWithCI {
    pub fn new(mean: f64, std_error: f64, n_samples: u64) -> Self {
        let half_width = Z_95 * std_error;
        EstimateWithCI {
            mean,
            std_error,
            n_samples,
            ci95_low: mean - half_width,
            ci95_high: mean + half_width,
        }
    }

    /// Estimate of a Bernoulli proportion from `hits` out of `n` trials.
    pub fn proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        Self::new(p, se, n)
    }
}
