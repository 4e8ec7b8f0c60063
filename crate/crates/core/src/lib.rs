//! Secrecy performance of a cooperative relay network with outdated
//! opportunistic relay selection.
//!
//! The crate evaluates three metrics for a source/destination pair assisted by
//! `N` relays while a passive eavesdropper listens:
//!
//! * the probability of a strictly positive secrecy capacity,
//! * the secrecy outage probability at a target rate,
//! * the ergodic secrecy capacity.
//!
//! Each metric is available three ways: closed form ([`analytic`]), direct
//! numerical integration of the defining integrals ([`quadrature`]) and a
//! seeded, parallel Monte Carlo simulation ([`monte_carlo`]). The [`harness`]
//! module wires them into parameter sweeps, CSV/JSON output, figure
//! reproduction and a three-way validation report used by the `secrely` CLI.

#![allow(clippy::excessive_precision)]

pub mod analytic;
pub mod config;
pub mod error;
pub mod harness;
pub mod monte_carlo;
pub mod numeric;
pub mod quadrature;
pub mod special;
pub mod sweep;

pub use analytic::ClosedFormContext;
pub use config::{
    db_to_linear, linear_to_db, EstimateWithCI, RatePrefactor, SecrecyMetrics, SystemConfig,
    ValidConfig,
};
pub use error::{Error, Result};
pub use monte_carlo::{estimate_metrics, MetricEstimates, SimulationPlan, TrialOutcome};
pub use quadrature::{OracleMode, QuadratureSettings};
pub use special::{exp_e1_product, exp_integral_e1, E1Result};
pub use sweep::{Linkage, SweepAxis, SweepSpec};
