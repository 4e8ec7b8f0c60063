use std::io::Write;

use serde::Serialize;

use super::{HarnessError, SweepResultRow};
use crate::config::EstimateWithCI;
use crate::sweep::SweepAxis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e15)` so tiny probabilities stay readable.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn linear_column(axis: SweepAxis) -> String {
    match axis.name().strip_suffix("_db") {
        Some(stem) => format!("{stem}_linear"),
        None => format!("{}_linear", axis.name()),
    }
}

const METRICS: [&str; 3] = ["p_nonzero", "sop", "ergodic"];

fn header(axis: SweepAxis, with_mc: bool, with_oracle: bool) -> Vec<String> {
    let mut h = vec![axis.name().to_string(), linear_column(axis)];
    h.extend(METRICS.iter().map(|m| format!("{m}_analytic")));
    if with_mc {
        for m in METRICS {
            for suffix in ["mc", "mc_se", "mc_ci_low", "mc_ci_high", "mc_trials"] {
                h.push(format!("{m}_{suffix}"));
            }
        }
    }
    if with_oracle {
        h.extend(METRICS.iter().map(|m| format!("{m}_oracle")));
    }
    h.push("warnings".to_string());
    h
}

fn push_estimate(record: &mut Vec<String>, e: &Option<EstimateWithCI>) {
    match e {
        Some(e) => {
            record.push(format_float(e.mean));
            record.push(format_float(e.std_error));
            record.push(format_float(e.ci95_low));
            record.push(format_float(e.ci95_high));
            record.push(e.n_samples.to_string());
        }
        None => record.extend(std::iter::repeat_n(String::new(), 5)),
    }
}

fn csv_error(e: csv::Error) -> HarnessError {
    HarnessError::Io(e.to_string())
}

/// Writes rows as CSV. MC and oracle column groups appear when any row
/// carries them.
pub fn write_csv<W: Write>(out: W, axis: SweepAxis, rows: &[SweepResultRow]) -> Result<(), HarnessError> {
    let with_mc = rows.iter().any(|r| r.p_nonzero_mc.is_some());
    let with_oracle = rows.iter().any(|r| r.p_nonzero_oracle.is_some());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(axis, with_mc, with_oracle)).map_err(csv_error)?;
    for r in rows {
        let mut rec = vec![
            format_float(r.axis_value),
            format_float(r.axis_value_linear),
            format_float(r.p_nonzero_analytic),
            format_float(r.sop_analytic),
            format_float(r.ergodic_analytic),
        ];
        if with_mc {
            push_estimate(&mut rec, &r.p_nonzero_mc);
            push_estimate(&mut rec, &r.sop_mc);
            push_estimate(&mut rec, &r.ergodic_mc);
        }
        if with_oracle {
            for v in [r.p_nonzero_oracle, r.sop_oracle, r.ergodic_oracle] {
                rec.push(v.map(format_float).unwrap_or_default());
            }
        }
        rec.push(r.warnings.join("; "));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonSweep<'a> {
    axis: SweepAxis,
    rows: &'a [SweepResultRow],
}

pub fn write_json<W: Write>(mut out: W, axis: SweepAxis, rows: &[SweepResultRow]) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, &JsonSweep { axis, rows })
        .map_err(|e| HarnessError::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
