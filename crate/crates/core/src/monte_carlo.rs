//! Seeded Monte Carlo simulation of the relay network.
//!
//! Each relay's end-to-end SNR `min{γ_SR, γ_RD}` is modelled directly as an
//! exponential variate with mean `γ̄_c`, drawn twice: once at selection time
//! and once at transmission time, with power correlation `ρ` between the two.
//! The relay with the best selection-time SNR is used, but it delivers its
//! transmission-time SNR.
//!
//! Trials are split into fixed-size blocks. Block `k` draws from its own
//! ChaCha8 stream (`seed`, stream `k`), so the result depends only on
//! `(config, n_trials, seed)` and never on how many workers run the blocks.
//! Block summaries are merged in block order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EstimateWithCI, ValidConfig};
use crate::error::{Error, Result};

/// Trials per RNG block.
pub const BLOCK_TRIALS: u64 = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationPlan {
    pub config: ValidConfig,
    pub n_trials: u64,
    pub seed: u64,
    /// Degree of parallelism. Has no influence on the results.
    pub n_workers: usize,
}

/// One simulated channel realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub gamma_opr: f64,
    pub gamma_opr_e: f64,
    /// `½[log2(1+γ_opr) - log2(1+γ_opr,e)]⁺`.
    pub cs_half: f64,
    /// `[log2(1+γ_opr) - log2(1+γ_opr,e)]⁺`.
    pub cs_unit: f64,
}

/// Monte Carlo estimates of the three secrecy metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimates {
    pub p_nonzero: EstimateWithCI,
    pub sop: EstimateWithCI,
    pub ergodic: EstimateWithCI,
}

/// A pair of exponential SNRs with common `mean` and power correlation `rho`.
///
/// Built from two independent unit complex Gaussians `g̃` and `w`:
/// `g = √ρ·g̃ + √(1-ρ)·w`, returning `(mean·|g̃|², mean·|g|²)`.
pub fn sample_correlated_exp_pair<R: Rng + ?Sized>(rng: &mut R, mean: f64, rho: f64) -> (f64, f64) {
    let (x_re, x_im) = complex_gaussian(rng);
    let (w_re, w_im) = complex_gaussian(rng);
    let a = rho.sqrt();
    let b = (1.0 - rho).sqrt();
    let g_re = a * x_re + b * w_re;
    let g_im = a * x_im + b * w_im;
    (
        mean * (x_re * x_re + x_im * x_im),
        mean * (g_re * g_re + g_im * g_im),
    )
}

/// `CN(0, 1)`: independent real and imaginary parts with variance ½.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    (re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
}

fn exponential<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    mean * e
}

/// Simulates one channel realization.
pub fn run_trial<R: Rng + ?Sized>(rng: &mut R, config: &ValidConfig) -> TrialOutcome {
    let relay_mean = config.relay_combined();
    let mut best_selection = f64::NEG_INFINITY;
    let mut delivered = 0.0;
    for _ in 0..config.n_relays {
        let (at_selection, at_transmission) =
            sample_correlated_exp_pair(rng, relay_mean, config.rho);
        // Strict comparison keeps the lowest index on ties.
        if at_selection > best_selection {
            best_selection = at_selection;
            delivered = at_transmission;
        }
    }
    let gamma_opr = exponential(rng, config.avg_snr_sd) + delivered;

    let direct_e = exponential(rng, config.avg_snr_se);
    let sb = exponential(rng, config.avg_snr_sb);
    let be = exponential(rng, config.avg_snr_be);
    let gamma_opr_e = direct_e + sb.min(be);

    secrecy_outcome(gamma_opr, gamma_opr_e)
}

fn secrecy_outcome(gamma_opr: f64, gamma_opr_e: f64) -> TrialOutcome {
    let cs_unit = if gamma_opr > gamma_opr_e {
        (gamma_opr.ln_1p() - gamma_opr_e.ln_1p()) * std::f64::consts::LOG2_E
    } else {
        0.0
    };
    TrialOutcome {
        gamma_opr,
        gamma_opr_e,
        cs_half: 0.5 * cs_unit,
        cs_unit,
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn block_len(n_trials: u64, block: u64) -> u64 {
    (n_trials - block * BLOCK_TRIALS).min(BLOCK_TRIALS)
}

fn n_blocks(n_trials: u64) -> u64 {
    n_trials.div_ceil(BLOCK_TRIALS)
}

/// Per-block sufficient statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct BlockSummary {
    n: u64,
    nonzero: u64,
    outage: u64,
    // Welford running mean and sum of squared deviations of cs_half.
    mean: f64,
    m2: f64,
}

impl BlockSummary {
    fn push(&mut self, outcome: &TrialOutcome, target_rate: f64) {
        self.n += 1;
        if outcome.gamma_opr > outcome.gamma_opr_e {
            self.nonzero += 1;
        }
        // Signed log-ratio, so that at zero rate every trial with
        // gamma_opr < gamma_opr_e counts as outage.
        if outcome.gamma_opr.ln_1p() - outcome.gamma_opr_e.ln_1p() < target_rate * std::f64::consts::LN_2 {
            self.outage += 1;
        }
        let delta = outcome.cs_half - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (outcome.cs_half - self.mean);
    }

    /// Chan et al. pairwise merge.
    fn merge(self, other: BlockSummary) -> BlockSummary {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb, nf) = (self.n as f64, other.n as f64, n as f64);
        BlockSummary {
            n,
            nonzero: self.nonzero + other.nonzero,
            outage: self.outage + other.outage,
            mean: self.mean + delta * nb / nf,
            m2: self.m2 + other.m2 + delta * delta * na * nb / nf,
        }
    }
}

fn worker_pool(n_workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n_workers.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))
}

fn check_plan(plan: &SimulationPlan) -> Result<()> {
    if plan.n_trials == 0 {
        return Err(Error::range("n_trials", "at least one trial is required"));
    }
    if plan.n_workers == 0 {
        return Err(Error::range("n_workers", "at least one worker is required"));
    }
    Ok(())
}

/// Runs the plan and estimates all three metrics.
///
/// The outage indicator uses the capacity without the ½ factor, matching the
/// `2^Rs` threshold of the outage closed form; the ergodic estimate is the
/// sample mean of the ½-factor capacity, doubled under `RatePrefactor::Unit`.
pub fn estimate_metrics(plan: &SimulationPlan) -> Result<MetricEstimates> {
    check_plan(plan)?;
    let config = plan.config;
    let blocks: Vec<BlockSummary> = worker_pool(plan.n_workers)?.install(|| {
        (0..n_blocks(plan.n_trials))
            .into_par_iter()
            .map(|block| {
                let mut rng = block_rng(plan.seed, block);
                let mut summary = BlockSummary::default();
                for _ in 0..block_len(plan.n_trials, block) {
                    summary.push(&run_trial(&mut rng, &config), config.target_rate);
                }
                summary
            })
            .collect()
    });
    let total = blocks
        .into_iter()
        .fold(BlockSummary::default(), BlockSummary::merge);

    let n = total.n;
    let scale = 2.0 * config.rate_prefactor.factor();
    let variance = if n > 1 { total.m2 / (n - 1) as f64 } else { 0.0 };
    Ok(MetricEstimates {
        p_nonzero: EstimateWithCI::proportion(total.nonzero, n),
        sop: EstimateWithCI::proportion(total.outage, n),
        ergodic: EstimateWithCI::new(
            scale * total.mean,
            scale * (variance / n as f64).sqrt(),
            n,
        ),
    })
}

/// All trial outcomes of a plan, in trial order.
pub fn simulate_outcomes(plan: &SimulationPlan) -> Result<Vec<TrialOutcome>> {
    check_plan(plan)?;
    let config = plan.config;
    let blocks: Vec<Vec<TrialOutcome>> = worker_pool(plan.n_workers)?.install(|| {
        (0..n_blocks(plan.n_trials))
            .into_par_iter()
            .map(|block| {
                let mut rng = block_rng(plan.seed, block);
                (0..block_len(plan.n_trials, block))
                    .map(|_| run_trial(&mut rng, &config))
                    .collect()
            })
            .collect()
    });
    Ok(blocks.concat())
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and `cdf`. Sorts `samples` in place.
pub fn ks_distance<F>(samples: &mut [f64], mut cdf: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if samples.is_empty() {
        return Err(Error::range("samples", "KS distance needs at least one sample"));
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x)?;
        let below = i as f64 / n;
        let above = (i + 1) as f64 / n;
        d = d.max((f - below).abs()).max((above - f).abs());
    }
    Ok(d)
}

/// Asymptotic KS critical value `sqrt(-ln(α/2)/2)/sqrt(n)`.
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    (-(0.5 * alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
