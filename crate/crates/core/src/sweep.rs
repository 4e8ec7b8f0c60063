//! One-dimensional parameter sweeps.

use serde::{Deserialize, Serialize};

use crate::config::{db_to_linear, SystemConfig, ValidConfig};
use crate::error::{Error, Result};

/// The parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    AvgSnrSdDb,
    Rho,
    AvgSnrSeDb,
    TargetRate,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::AvgSnrSdDb => "avg_snr_sd_db",
            SweepAxis::Rho => "rho",
            SweepAxis::AvgSnrSeDb => "avg_snr_se_db",
            SweepAxis::TargetRate => "target_rate",
        }
    }

    pub fn is_db(self) -> bool {
        matches!(self, SweepAxis::AvgSnrSdDb | SweepAxis::AvgSnrSeDb)
    }

    /// The axis value on a linear scale (identity for non-dB axes).
    pub fn linear_value(self, value: f64) -> f64 {
        if self.is_db() {
            db_to_linear(value)
        } else {
            value
        }
    }
}

/// Rules that tie the relay-path SNRs to the direct-link SNRs.
///
/// `relay_over_sd = 0.5` keeps the combined relay SNR at half of the S-D
/// SNR at every grid point; `eve_over_se` does the same on the eavesdropper
/// side.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linkage {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay_over_sd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eve_over_se: Option<f64>,
}

impl Linkage {
    /// The figure convention: both combined relay SNRs at half the direct link.
    pub fn half() -> Self {
        Linkage {
            relay_over_sd: Some(0.5),
            eve_over_se: Some(0.5),
        }
    }

    pub fn apply(&self, mut config: SystemConfig) -> SystemConfig {
        if let Some(k) = self.relay_over_sd {
            config = config.with_relay_combined(k * config.avg_snr_sd);
        }
        if let Some(k) = self.eve_over_se {
            config = config.with_eve_combined(k * config.avg_snr_se);
        }
        config
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub base: SystemConfig,
    pub linkage: Linkage,
}

impl SweepSpec {
    /// A single-point "sweep" at the base configuration's S-D SNR.
    pub fn single_point(base: SystemConfig) -> Result<Self> {
        let sd_db = crate::config::linear_to_db(base.avg_snr_sd)?;
        Ok(SweepSpec {
            axis: SweepAxis::AvgSnrSdDb,
            grid: vec![sd_db],
            base,
            linkage: Linkage::default(),
        })
    }

    pub fn check_grid(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::range("grid", "sweep grid is empty"));
        }
        if let Some(bad) = self.grid.iter().find(|v| !v.is_finite()) {
            return Err(Error::range("grid", format!("non-finite grid value {bad}")));
        }
        if let Some(w) = self.grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::range(
                "grid",
                format!("grid must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
        Ok(())
    }

    /// Configuration at one axis value, with linked parameters re-derived.
    pub fn config_at(&self, value: f64) -> SystemConfig {
        let mut cfg = self.base;
        match self.axis {
            SweepAxis::AvgSnrSdDb => cfg.avg_snr_sd = db_to_linear(value),
            SweepAxis::Rho => cfg.rho = value,
            SweepAxis::AvgSnrSeDb => cfg.avg_snr_se = db_to_linear(value),
            SweepAxis::TargetRate => cfg.target_rate = value,
        }
        self.linkage.apply(cfg)
    }

    /// Validated configurations for every grid point, in grid order.
    pub fn points(&self) -> Result<Vec<(f64, ValidConfig)>> {
        self.check_grid()?;
        self.grid
            .iter()
            .map(|&v| Ok((v, self.config_at(v).validate()?)))
            .collect()
    }
}

/// Either an explicit list or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridFile {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl GridFile {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridFile::List(v) => v.clone(),
            GridFile::Range { start, stop, points } => linspace(*start, *stop, *points),
        }
    }
}

/// On-disk sweep description; the base configuration comes from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub axis: SweepAxis,
    pub grid: GridFile,
    #[serde(default)]
    pub linkage: Linkage,
}

impl SweepFile {
    pub fn into_spec(self, base: SystemConfig) -> SweepSpec {
        SweepSpec {
            axis: self.axis,
            grid: self.grid.values(),
            base,
            linkage: self.linkage,
        }
    }
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}
