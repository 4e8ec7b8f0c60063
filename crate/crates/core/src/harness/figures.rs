use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{evaluate_sweep, format_float, HarnessError, MetricKind, Pipelines};
use crate::config::{db_to_linear, SystemConfig};
use crate::sweep::{linspace, Linkage, SweepAxis, SweepSpec};

/// Lower and upper end of the S-D SNR axis shared by every figure, in dB.
pub const FIGURE_AXIS_DB: (f64, f64) = (-5.0, 30.0);
pub const FIGURE_POINTS: usize = 36;

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSeries {
    pub column: String,
    pub title: String,
    pub rho: f64,
    pub avg_snr_se_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureDef {
    pub name: &'static str,
    pub title: &'static str,
    pub metric: MetricKind,
    pub ylabel: &'static str,
    pub log_y: bool,
    pub series: Vec<FigureSeries>,
}

impl FigureDef {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["avg_snr_sd_db".to_string(), "avg_snr_sd_linear".to_string()];
        h.extend(self.series.iter().map(|s| s.column.clone()));
        h
    }
}

fn rho_series(metric: MetricKind, rhos: &[f64], se_db: f64) -> Vec<FigureSeries> {
    rhos.iter()
        .map(|&rho| FigureSeries {
            column: format!("{}_rho_{}", metric.name(), format_float(rho)),
            title: format!("rho = {}", format_float(rho)),
            rho,
            avg_snr_se_db: se_db,
        })
        .collect()
}

fn se_series(metric: MetricKind, rho: f64, se_dbs: &[f64]) -> Vec<FigureSeries> {
    se_dbs
        .iter()
        .map(|&se| FigureSeries {
            column: format!("{}_se_{}db", metric.name(), format_float(se)),
            title: format!("avg SNR S-E = {} dB", format_float(se)),
            rho,
            avg_snr_se_db: se,
        })
        .collect()
}

/// The five reproduced figures. All share N = 5, R_s = 2 and the half-SNR
/// linkage of both two-hop links to their direct counterparts.
pub fn figure_definitions() -> Vec<FigureDef> {
    use MetricKind::*;
    vec![
        FigureDef {
            name: "fig2",
            title: "Non-zero secrecy probability for different values of rho",
            metric: PNonzero,
            ylabel: "P(C_s > 0)",
            log_y: false,
            series: rho_series(PNonzero, &[0.0, 0.5, 0.9, 1.0], -5.0),
        },
        FigureDef {
            name: "fig3",
            title: "Non-zero secrecy probability for different S-E SNR, rho = 0.5",
            metric: PNonzero,
            ylabel: "P(C_s > 0)",
            log_y: false,
            series: se_series(PNonzero, 0.5, &[-5.0, 0.0, 5.0]),
        },
        FigureDef {
            name: "fig4",
            title: "Secrecy outage probability for different values of rho",
            metric: Sop,
            ylabel: "Secrecy outage probability",
            log_y: true,
            series: rho_series(Sop, &[0.0, 0.5, 0.9, 1.0], 0.0),
        },
        FigureDef {
            name: "fig5",
            title: "Secrecy outage probability for different S-E SNR, rho = 0.5",
            metric: Sop,
            ylabel: "Secrecy outage probability",
            log_y: true,
            series: se_series(Sop, 0.5, &[-5.0, 0.0, 5.0]),
        },
        FigureDef {
            name: "fig6",
            title: "Average secrecy capacity for different values of rho",
            metric: Ergodic,
            ylabel: "Average secrecy capacity (bits/s/Hz)",
            log_y: false,
            series: rho_series(Ergodic, &[0.0, 0.5, 0.8, 1.0], -5.0),
        },
    ]
}

fn series_spec(s: &FigureSeries, grid: &[f64]) -> SweepSpec {
    SweepSpec {
        axis: SweepAxis::AvgSnrSdDb,
        grid: grid.to_vec(),
        base: SystemConfig::figure_defaults(s.rho, FIGURE_AXIS_DB.0, s.avg_snr_se_db),
        linkage: Linkage::half(),
    }
}

/// Evaluates a figure: one row per axis point, one column per series after
/// the two axis columns.
pub fn figure_table(def: &FigureDef, n_workers: usize) -> Result<Vec<Vec<f64>>, HarnessError> {
    let grid = linspace(FIGURE_AXIS_DB.0, FIGURE_AXIS_DB.1, FIGURE_POINTS);
    let mut table: Vec<Vec<f64>> = grid.iter().map(|&v| vec![v, db_to_linear(v)]).collect();
    for s in &def.series {
        let rows = evaluate_sweep(&series_spec(s, &grid), &Pipelines::default(), n_workers)?;
        for (out, r) in table.iter_mut().zip(&rows) {
            out.push(match def.metric {
                MetricKind::PNonzero => r.p_nonzero_analytic,
                MetricKind::Sop => r.sop_analytic,
                MetricKind::Ergodic => r.ergodic_analytic,
            });
        }
    }
    Ok(table)
}

fn gnuplot_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

pub fn plot_script(def: &FigureDef) -> String {
    let mut g = String::new();
    let csv = format!("{}.csv", def.name);
    let _ = writeln!(g, "# {}: {}", def.name, def.title);
    let _ = writeln!(g, "set terminal pngcairo size 800,600 enhanced");
    let _ = writeln!(g, "set output {}", gnuplot_quote(&format!("{}.png", def.name)));
    let _ = writeln!(g, "set datafile separator ','");
    let _ = writeln!(g, "set key autotitle columnhead");
    let _ = writeln!(g, "set title {} noenhanced", gnuplot_quote(def.title));
    let _ = writeln!(g, "set xlabel 'Average S-D SNR (dB)'");
    let _ = writeln!(g, "set ylabel {} noenhanced", gnuplot_quote(def.ylabel));
    let _ = writeln!(g, "set xrange [{}:{}]", FIGURE_AXIS_DB.0, FIGURE_AXIS_DB.1);
    if def.log_y {
        let _ = writeln!(g, "set logscale y");
        let _ = writeln!(g, "set format y '10^{{%L}}'");
    }
    let _ = writeln!(g, "set grid");
    let _ = writeln!(g, "set key bottom right");
    let plots: Vec<String> = def
        .series
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let file = if i == 0 { gnuplot_quote(&csv) } else { "''".to_string() };
            format!(
                "{file} using 1:{} with linespoints title {} noenhanced",
                i + 3,
                gnuplot_quote(&s.title)
            )
        })
        .collect();
    let _ = writeln!(g, "plot {}", plots.join(", \\\n     "));
    g
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|e| HarnessError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes `figN.csv` and `figN.gp` for every figure into `dir`, returning the
/// paths written.
pub fn write_figures(dir: &Path, n_workers: usize) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for def in figure_definitions() {
        let table = figure_table(&def, n_workers)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| HarnessError::Io(e.to_string());
        w.write_record(def.header()).map_err(io)?;
        for row in &table {
            w.write_record(row.iter().map(|&v| format_float(v))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;

        let csv_path = dir.join(format!("{}.csv", def.name));
        write_file(&csv_path, &bytes)?;
        let gp_path = dir.join(format!("{}.gp", def.name));
        write_file(&gp_path, plot_script(&def).as_bytes())?;
        written.push(csv_path);
        written.push(gp_path);
    }
    Ok(written)
}
