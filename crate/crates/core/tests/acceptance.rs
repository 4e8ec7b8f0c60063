//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line for each,
//! and exits non-zero if any failed.

#![allow(clippy::excessive_precision)]

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use secrely::harness::{figure_definitions, mc_standard_error};
use secrely::monte_carlo::{ks_critical_value, ks_distance, simulate_outcomes};
use secrely::quadrature::{integrate_segments, oracle_metrics, scale_breakpoints};
use secrely::sweep::linspace;
use secrely::{
    db_to_linear, estimate_metrics, exp_e1_product, exp_integral_e1, ClosedFormContext, EstimateWithCI,
    OracleMode, QuadratureSettings, SecrecyMetrics, SimulationPlan, SystemConfig, ValidConfig,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn config(n: u32, rho: f64, sd: f64, c: f64, se: f64, ce: f64, rate: f64) -> ValidConfig {
    SystemConfig {
        n_relays: n,
        rho,
        avg_snr_sd: sd,
        avg_snr_sr: 1.0,
        avg_snr_rd: 1.0,
        avg_snr_se: se,
        avg_snr_sb: 1.0,
        avg_snr_be: 1.0,
        target_rate: rate,
        rate_prefactor: Default::default(),
    }
    .with_relay_combined(c)
    .with_eve_combined(ce)
    .validate()
    .unwrap()
}

fn random_config(rng: &mut ChaCha8Rng, max_relays: u32) -> ValidConfig {
    let mut db = |lo: f64, hi: f64| db_to_linear(rng.random_range(lo..=hi));
    let (sd, sr, rd) = (db(-5.0, 30.0), db(-5.0, 30.0), db(-5.0, 30.0));
    let (se, sb, be) = (db(-10.0, 10.0), db(-10.0, 10.0), db(-10.0, 10.0));
    SystemConfig {
        n_relays: rng.random_range(1..=max_relays),
        rho: rng.random_range(0.0..=1.0),
        avg_snr_sd: sd,
        avg_snr_sr: sr,
        avg_snr_rd: rd,
        avg_snr_se: se,
        avg_snr_sb: sb,
        avg_snr_be: be,
        target_rate: rng.random_range(0.0..=4.0),
        rate_prefactor: Default::default(),
    }
    .validate()
    .unwrap()
}

fn figure_point(rho: f64, sd_db: f64, se_db: f64) -> ValidConfig {
    SystemConfig::figure_defaults(rho, sd_db, se_db).validate().unwrap()
}

fn metrics(cfg: &ValidConfig) -> SecrecyMetrics {
    ClosedFormContext::new(cfg).unwrap().metrics().unwrap()
}

fn describe(cfg: &ValidConfig) -> String {
    format!(
        "N={} rho={:.3} sd={:.4} c={:.4} se={:.4} ce={:.4} Rs={:.3}",
        cfg.n_relays,
        cfg.rho,
        cfg.avg_snr_sd,
        cfg.relay_combined(),
        cfg.avg_snr_se,
        cfg.eve_combined(),
        cfg.target_rate
    )
}

fn collect(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(failures.join("\n      "))
    }
}

// Reference values computed to 40 significant digits.
const E1_REFERENCE: [(f64, f64); 8] = [
    (0.01, 4.037_929_576_538_113_831_787),
    (0.1, 1.822_923_958_419_390_666_081),
    (0.5, 0.559_773_594_776_160_811_746_8),
    (1.0, 0.219_383_934_395_520_273_677_2),
    (2.0, 0.048_900_510_708_061_119_567_24),
    (5.0, 0.001_148_295_591_275_325_797_331),
    (10.0, 4.156_968_929_685_324_277_403e-6),
    (50.0, 3.783_264_029_550_459_018_699e-24),
];

// ∫₀^∞ log2(1+x) e^(-x/α) dx to 40 digits.
const LOG_INTEGRAL_REFERENCE: [(f64, f64); 4] = [
    (0.1, 0.013_209_796_780_219_237_770_21),
    (1.0, 0.860_347_382_270_885_951_190_2),
    (10.0, 29.065_148_084_148_049_846_74),
    (100.0, 588.404_823_368_347_345_476_4),
];

fn criterion_special_functions() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (x, want) in E1_REFERENCE {
        let got = exp_integral_e1(x).map_err(|e| e.to_string())?.value;
        worst = worst.max((got - want).abs());
        if (got - want).abs() > 1e-13 {
            failures.push(format!("E1({x}) = {got:e}, want {want:e}"));
        }
    }
    let tight = QuadratureSettings {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_subdivisions: 5000,
        tail_cutoff_multiplier: 45.0,
    };
    let mut worst_identity: f64 = 0.0;
    for (alpha, reference) in LOG_INTEGRAL_REFERENCE {
        let closed = alpha * std::f64::consts::LOG2_E * exp_e1_product(1.0 / alpha).map_err(|e| e.to_string())?;
        let points = scale_breakpoints(0.0, &[alpha, 1.0], tight.tail_cutoff_multiplier);
        let quad = integrate_segments(|x| Ok((x.ln_1p() * std::f64::consts::LOG2_E) * (-x / alpha).exp()), &points, &tight)
            .map_err(|e| e.to_string())?
            .value;
        worst_identity = worst_identity.max((closed - quad).abs());
        if (closed - quad).abs() > 1e-9 {
            failures.push(format!("alpha={alpha}: closed {closed} vs quadrature {quad}"));
        }
        if (closed - reference).abs() > 1e-9 {
            failures.push(format!("alpha={alpha}: closed {closed} vs reference {reference}"));
        }
    }
    collect(
        failures,
        format!("max |E1 err| {worst:.1e}, max identity gap {worst_identity:.1e}"),
    )
}

fn criterion_density_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let settings = QuadratureSettings::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let cfg = random_config(&mut rng, 10);
        let ctx = ClosedFormContext::new(&cfg).map_err(|e| e.to_string())?;
        let points = scale_breakpoints(0.0, &ctx.scales(), settings.tail_cutoff_multiplier);
        let main = integrate_segments(|x| ctx.pdf_gamma_opr(x), &points, &settings).map_err(|e| e.to_string())?;
        let eve = integrate_segments(|x| ctx.pdf_gamma_opr_e(x), &points, &settings).map_err(|e| e.to_string())?;
        for (name, v) in [("destination", main.value), ("eavesdropper", eve.value)] {
            worst = worst.max((v - 1.0).abs());
            if (v - 1.0).abs() > 1e-6 {
                failures.push(format!("{name} density integrates to {v} at {}", describe(&cfg)));
            }
        }
    }
    collect(failures, format!("50 configs, max |∫f - 1| {worst:.1e}"))
}

fn compare_oracle(cfg: &ValidConfig, settings: &QuadratureSettings, worst: &mut [f64; 3]) -> Result<Vec<String>, String> {
    let a = metrics(cfg);
    let o = oracle_metrics(cfg, settings, OracleMode::Reduced).map_err(|e| format!("{}: {e}", describe(cfg)))?;
    let gaps = [
        (a.p_nonzero - o.p_nonzero).abs(),
        (a.sop - o.sop).abs(),
        (a.ergodic_capacity - o.ergodic_capacity).abs() / o.ergodic_capacity.abs().max(f64::MIN_POSITIVE),
    ];
    let limits = [1e-7, 1e-7, 1e-6];
    let names = ["p_nonzero", "sop", "ergodic (rel)"];
    let mut failures = Vec::new();
    for i in 0..3 {
        worst[i] = worst[i].max(gaps[i]);
        if gaps[i] > limits[i] {
            failures.push(format!("{} gap {:.2e} at {}", names[i], gaps[i], describe(cfg)));
        }
    }
    Ok(failures)
}

fn criterion_closed_form_vs_oracle() -> Outcome {
    let settings = QuadratureSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = [0.0; 3];
    let mut failures = Vec::new();
    let mut count = 0;
    for _ in 0..20 {
        failures.extend(compare_oracle(&random_config(&mut rng, 10), &settings, &mut worst)?);
        count += 1;
    }
    for se_db in [-5.0, 0.0, 5.0] {
        for rho in [0.0, 0.5, 0.9, 1.0] {
            for sd_db in linspace(-5.0, 30.0, 36) {
                failures.extend(compare_oracle(&figure_point(rho, sd_db, se_db), &settings, &mut worst)?);
                count += 1;
            }
        }
    }
    collect(
        failures,
        format!(
            "{count} configs, max gaps p {:.1e}, sop {:.1e}, ergodic rel {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn z_against(analytic: f64, est: &EstimateWithCI, probability: bool) -> f64 {
    let se = mc_standard_error(analytic, est, probability);
    let d = (analytic - est.mean).abs();
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn criterion_monte_carlo() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_z: f64 = 0.0;
    for (i, sd_db) in linspace(-5.0, 30.0, 10).into_iter().enumerate() {
        let cfg = figure_point(0.5, sd_db, -5.0);
        let a = metrics(&cfg);
        let mc = estimate_metrics(&SimulationPlan {
            config: cfg,
            n_trials: 1_000_000,
            seed: 42 + i as u64,
            n_workers: workers(),
        })
        .map_err(|e| e.to_string())?;
        for (name, analytic, est, prob) in [
            ("p_nonzero", a.p_nonzero, &mc.p_nonzero, true),
            ("sop", a.sop, &mc.sop, true),
            ("ergodic", a.ergodic_capacity, &mc.ergodic, false),
        ] {
            let z = z_against(analytic, est, prob);
            worst_z = worst_z.max(z);
            if z > 3.0 {
                failures.push(format!(
                    "{name} at sd={sd_db:.2} dB: analytic {analytic:.6e}, mc {:.6e}, z {z:.2}",
                    est.mean
                ));
            }
        }
    }

    let n = 1_000_000;
    let critical = ks_critical_value(0.01, n);
    let mut worst_ks: f64 = 0.0;
    let mut ks_checks = 0;
    let mut ks = |cfg: ValidConfig, seed: u64, eavesdropper: bool| -> Result<(), String> {
        let ctx = ClosedFormContext::new(&cfg).map_err(|e| e.to_string())?;
        let outcomes = simulate_outcomes(&SimulationPlan {
            config: cfg,
            n_trials: n as u64,
            seed,
            n_workers: workers(),
        })
        .map_err(|e| e.to_string())?;
        let d = if eavesdropper {
            let mut s: Vec<f64> = outcomes.iter().map(|o| o.gamma_opr_e).collect();
            ks_distance(&mut s, |x| ctx.cdf_gamma_opr_e(x))
        } else {
            let mut s: Vec<f64> = outcomes.iter().map(|o| o.gamma_opr).collect();
            ks_distance(&mut s, |x| ctx.cdf_gamma_opr(x))
        }
        .map_err(|e| e.to_string())?;
        worst_ks = worst_ks.max(d / critical);
        ks_checks += 1;
        if d > critical {
            failures.push(format!(
                "KS {} D={d:.5} > {critical:.5} at {}",
                if eavesdropper { "gamma_opr_e" } else { "gamma_opr" },
                describe(&cfg)
            ));
        }
        Ok(())
    };
    let mut seed = 1000;
    for rho in [0.0, 0.5, 1.0] {
        for n_relays in [1, 3, 5] {
            seed += 1;
            ks(config(n_relays, rho, 2.0, 1.0, 1.0, 0.5, 2.0), seed, false)?;
        }
    }
    for (se, ce) in [(1.0, 0.5), (0.316, 0.158), (3.16, 1.58)] {
        seed += 1;
        ks(config(5, 0.5, 2.0, 1.0, se, ce, 2.0), seed, true)?;
    }
    collect(
        failures,
        format!("30 metric checks, max z {worst_z:.2}; {ks_checks} KS checks, max D/Dcrit {worst_ks:.2}"),
    )
}

fn criterion_identities() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mut cfg = *random_config(&mut rng, 10).config();
        cfg.target_rate = 0.0;
        let cfg = cfg.validate().unwrap();
        let m = metrics(&cfg);
        if (m.sop - (1.0 - m.p_nonzero)).abs() > 1e-12 {
            failures.push(format!("SOP(0) + P = {} at {}", m.sop + m.p_nonzero, describe(&cfg)));
        }
    }
    for (sd, c) in [(2.0, 1.0), (10.0, 3.0), (0.5, 0.2)] {
        let m = metrics(&config(1, 0.3, sd, c, sd, c, 1.0));
        if (m.p_nonzero - 0.5).abs() > 1e-10 {
            failures.push(format!("symmetric N=1 P = {} (sd={sd}, c={c})", m.p_nonzero));
        }
    }
    for (sd, c, se, ce, rate) in [(10.0, 5.0, 1.0, 0.5, 2.0), (1.0, 3.0, 0.3, 0.2, 0.5)] {
        let base = metrics(&config(1, 0.0, sd, c, se, ce, rate));
        for rho in [0.25, 0.5, 0.9, 1.0] {
            let m = metrics(&config(1, rho, sd, c, se, ce, rate));
            for (name, x, y) in [
                ("p_nonzero", m.p_nonzero, base.p_nonzero),
                ("sop", m.sop, base.sop),
                ("ergodic", m.ergodic_capacity, base.ergodic_capacity),
            ] {
                if (x - y).abs() > 1e-12 {
                    failures.push(format!("N=1 {name} varies with rho: {x} vs {y} at rho={rho}"));
                }
            }
        }
    }
    collect(failures, "complement, symmetry and rho-invariance hold".to_string())
}

fn criterion_trends() -> Outcome {
    let mut failures = Vec::new();
    let grid = linspace(-5.0, 30.0, 36);
    let rhos = [0.0, 0.5, 0.9, 1.0];

    for &sd in &grid {
        let p: Vec<f64> = rhos.iter().map(|&r| metrics(&figure_point(r, sd, -5.0)).p_nonzero).collect();
        if p.windows(2).any(|w| w[1] < w[0]) {
            failures.push(format!("P(Cs>0) not non-decreasing in rho at sd={sd} dB: {p:?}"));
        }
    }
    let top = metrics(&figure_point(0.5, 30.0, -5.0)).p_nonzero;
    if (1.0 - top) > 1e-3 {
        failures.push(format!("P(Cs>0) at 30 dB is {top}"));
    }

    for &sd in &grid {
        let sop: Vec<f64> = rhos.iter().map(|&r| metrics(&figure_point(r, sd, 0.0)).sop).collect();
        if sop.windows(2).any(|w| w[1] >= w[0]) {
            failures.push(format!("SOP not decreasing in rho at sd={sd} dB: {sop:?}"));
        }
    }
    for &rho in &rhos {
        let sop: Vec<f64> = grid.iter().map(|&sd| metrics(&figure_point(rho, sd, 0.0)).sop).collect();
        if sop.windows(2).any(|w| w[1] >= w[0]) {
            failures.push(format!("SOP not decreasing in sd at rho={rho}"));
        }
    }

    for &sd in &grid {
        let c: Vec<f64> = [0.0, 0.5, 0.8, 1.0]
            .iter()
            .map(|&r| metrics(&figure_point(r, sd, -5.0)).ergodic_capacity)
            .collect();
        if c.windows(2).any(|w| w[1] <= w[0]) {
            failures.push(format!("ergodic capacity not increasing in rho at sd={sd} dB: {c:?}"));
        }
    }

    let tops: Vec<f64> = [-5.0, 0.0, 5.0]
        .iter()
        .map(|&se| metrics(&figure_point(0.5, 30.0, se)).p_nonzero)
        .collect();
    let gap = tops.iter().cloned().fold(f64::MIN, f64::max) - tops.iter().cloned().fold(f64::MAX, f64::min);
    if gap >= 0.01 {
        failures.push(format!("S-E curves not converged at 30 dB: gap {gap}"));
    }
    collect(failures, format!("P(30 dB) = {top:.6}, S-E gap at 30 dB {gap:.2e}"))
}

fn run_cli(args: &[&str], workers: Option<&str>) -> Result<std::process::Output, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_secrely"));
    cmd.args(args);
    match workers {
        Some(w) => cmd.env("SECRELY_WORKERS", w),
        None => cmd.env_remove("SECRELY_WORKERS"),
    };
    cmd.output().map_err(|e| format!("cannot run secrely: {e}"))
}

fn write_inputs(dir: &Path) -> Result<(String, String), String> {
    let config = dir.join("config.json");
    let sweep = dir.join("sweep.json");
    std::fs::write(
        &config,
        r#"{"n_relays": 5, "rho": 0.5, "avg_snr_sd_db": 10, "avg_snr_sr_db": 10, "avg_snr_rd_db": 10,
            "avg_snr_se_db": -5, "avg_snr_sb_db": -2, "avg_snr_be_db": -2, "target_rate": 2}"#,
    )
    .map_err(|e| e.to_string())?;
    std::fs::write(
        &sweep,
        r#"{"axis": "avg_snr_sd_db", "grid": {"start": -5, "stop": 30, "points": 8},
            "linkage": {"relay_over_sd": 0.5, "eve_over_se": 0.5}}"#,
    )
    .map_err(|e| e.to_string())?;
    Ok((config.display().to_string(), sweep.display().to_string()))
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (config, sweep) = write_inputs(dir.path())?;
    let args = [
        "simulate", "--config", &config, "--sweep", &sweep, "--trials", "200000", "--seed", "42",
    ];
    let mut outputs = Vec::new();
    for workers in [None, None, Some("1"), Some("4")] {
        let out = run_cli(&args, workers)?;
        if !out.status.success() {
            return Err(format!(
                "simulate exited with {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        outputs.push(out.stdout);
    }
    let lines = String::from_utf8_lossy(&outputs[0]).lines().count();
    if lines != 9 {
        return Err(format!("expected header + 8 rows, got {lines} lines"));
    }
    if outputs.iter().any(|o| o != &outputs[0]) {
        return Err("CSV differs between runs or worker counts".to_string());
    }
    Ok(format!("4 runs byte-identical ({} bytes)", outputs[0].len()))
}

fn criterion_figures() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out_dir = dir.path().join("figs");
    let out = run_cli(&["figures", "--out", &out_dir.display().to_string()], None)?;
    if !out.status.success() {
        return Err(format!("figures exited with {:?}", out.status.code()));
    }
    let mut failures = Vec::new();
    let mut entries: Vec<String> = std::fs::read_dir(&out_dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    entries.sort();
    let mut expected: Vec<String> = (2..=6)
        .flat_map(|i| [format!("fig{i}.csv"), format!("fig{i}.gp")])
        .collect();
    expected.sort();
    if entries != expected {
        failures.push(format!("files {entries:?}"));
    }
    for def in figure_definitions() {
        let csv_path = out_dir.join(format!("{}.csv", def.name));
        let mut reader = csv::Reader::from_path(&csv_path).map_err(|e| e.to_string())?;
        let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
        if header != def.header() {
            failures.push(format!("{} header {header:?}", def.name));
        }
        let mut rows = 0;
        for record in reader.records() {
            let record = record.map_err(|e| e.to_string())?;
            rows += 1;
            if record.len() != header.len() || record.iter().any(|f| f.parse::<f64>().map_or(true, |v| !v.is_finite())) {
                failures.push(format!("{} row {rows} malformed", def.name));
            }
        }
        if rows < 20 {
            failures.push(format!("{} has {rows} rows", def.name));
        }
        let script = std::fs::read_to_string(out_dir.join(format!("{}.gp", def.name))).map_err(|e| e.to_string())?;
        if !script.contains(&format!("'{}.csv'", def.name)) || script.matches(".csv").count() != 1 {
            failures.push(format!("{}.gp does not reference exactly its own CSV", def.name));
        }
    }
    collect(failures, "5 CSV + 5 gnuplot scripts, schemas match".to_string())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("special-function accuracy", criterion_special_functions),
        ("density normalization", criterion_density_normalization),
        ("closed form vs quadrature oracle", criterion_closed_form_vs_oracle),
        ("closed form vs Monte Carlo", criterion_monte_carlo),
        ("algebraic identities", criterion_identities),
        ("qualitative trends", criterion_trends),
        ("CLI determinism", criterion_determinism),
        ("figure artifacts", criterion_figures),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed: Duration = start.elapsed();
        match result {
            Ok(summary) => println!("criterion {} {name}: PASS ({:.2} s) {summary}", i + 1, elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({:.2} s)\n      {detail}", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
