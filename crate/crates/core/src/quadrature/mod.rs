//! Globally adaptive Gauss–Kronrod quadrature and the integral oracles built
//! on top of it.
//!
//! The integrator is a plain 21-point Kronrod / 10-point Gauss pair with
//! bisection of the interval carrying the largest error estimate, in the
//! spirit of QUADPACK's QAG.

mod oracle;

pub use oracle::{
    oracle_ccdf_gamma_opr, oracle_ergodic_capacity, oracle_metrics, oracle_prob_nonzero,
    oracle_sop, OracleMode,
};

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and truncation rules for the oracle integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Semi-infinite integrals are truncated at this multiple of the largest
    /// exponential scale in the integrand.
    pub tail_cutoff_multiplier: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
            tail_cutoff_multiplier: 50.0,
        }
    }
}

impl QuadratureSettings {
    pub fn check(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::range("abs_tol/rel_tol", "tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::range("max_subdivisions", "must be at least 1"));
        }
        if self.tail_cutoff_multiplier.is_nan() || self.tail_cutoff_multiplier < 10.0 {
            return Err(Error::range(
                "tail_cutoff_multiplier",
                format!("{} must be >= 10", self.tail_cutoff_multiplier),
            ));
        }
        Ok(())
    }
}

/// An integral estimate and its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub est_error: f64,
}

// Kronrod abscissae on [-1, 1]; odd indices are the Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_463_440_301,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One application of the 21-point rule on `[a, b]`.
fn gauss_kronrod_21<F>(f: &mut F, a: f64, b: f64) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = finite(f(center)?, center)?;
    let mut kronrod = f_center * WGK[10];
    let mut gauss = 0.0;
    let mut abs_kronrod = kronrod.abs();
    let mut values = [(0.0, 0.0); 10];

    for (j, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * x;
        let lo = finite(f(center - dx)?, center - dx)?;
        let hi = finite(f(center + dx)?, center + dx)?;
        values[j] = (lo, hi);
        kronrod += w * (lo + hi);
        abs_kronrod += w * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }

    // QUADPACK-style error scaling.
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (f_center - mean).abs();
    for (j, &(lo, hi)) in values.iter().enumerate() {
        asc += WGK[j] * ((lo - mean).abs() + (hi - mean).abs());
    }
    let value = kronrod * half;
    let abs_value = abs_kronrod * half.abs();
    asc *= half.abs();

    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_value);
    }
    Ok(Integral { value, est_error: err })
}

fn finite(v: f64, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("integrand returned {v} at x = {x}")))
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[lo, hi]` to `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F>(f: F, lo: f64, hi: f64, settings: &QuadratureSettings) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    try_integrate_adaptive(|x| Ok(f(x)), lo, hi, settings)
}

/// Like [`integrate_adaptive`] for integrands that can fail.
pub fn try_integrate_adaptive<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    settings: &QuadratureSettings,
) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!(
            "integration bounds must be finite with lo < hi, got [{lo}, {hi}]"
        )));
    }
    let first = gauss_kronrod_21(&mut f, lo, hi)?;
    let mut heap = BinaryHeap::new();
    heap.push(Piece {
        a: lo,
        b: hi,
        value: first.value,
        error: first.est_error,
    });

    let tolerance = |value: f64| settings.abs_tol.max(settings.rel_tol * value.abs());
    let mut subdivisions = 0;
    loop {
        // Re-summing keeps the totals free of accumulated add/subtract drift.
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if error <= tolerance(value) {
            return Ok(Integral { value, est_error: error });
        }
        if subdivisions >= settings.max_subdivisions {
            return Err(Error::Convergence {
                value,
                est_error: error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Interval collapsed to adjacent floats; nothing left to refine.
            return Err(Error::Convergence {
                value,
                est_error: error,
                subdivisions,
            });
        }
        let left = gauss_kronrod_21(&mut f, worst.a, mid)?;
        let right = gauss_kronrod_21(&mut f, mid, worst.b)?;
        heap.push(Piece { a: worst.a, b: mid, value: left.value, error: left.est_error });
        heap.push(Piece { a: mid, b: worst.b, value: right.value, error: right.est_error });
        subdivisions += 1;
    }
}

/// Integrates over consecutive segments between sorted `breakpoints`,
/// summing values and error estimates.
pub fn integrate_segments<F>(
    mut f: F,
    breakpoints: &[f64],
    settings: &QuadratureSettings,
) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut total = Integral { value: 0.0, est_error: 0.0 };
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let part = try_integrate_adaptive(&mut f, w[0], w[1], settings)?;
            total.value += part.value;
            total.est_error += part.est_error;
        }
    }
    Ok(total)
}

/// Breakpoints on `[start, start + cutoff_multiplier·max(scales)]` placed at
/// fixed multiples of each exponential scale, so no segment is so wide
/// that the rule's nodes step over a narrow feature.
pub fn scale_breakpoints(start: f64, scales: &[f64], cutoff_multiplier: f64) -> Vec<f64> {
    let max_scale = scales.iter().copied().fold(0.0, f64::max);
    let end = start + cutoff_multiplier * max_scale;
    let mut points = vec![start, end];
    for &s in scales {
        for k in [0.5, 2.0, 8.0, 25.0] {
            let p = start + k * s;
            if p < end {
                points.push(p);
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}
