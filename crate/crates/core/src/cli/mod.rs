//! Command-line front end that turns a run configuration into an ordered report.
//!
//! Rows are ordered by method (`oracle`, `sc`, `shoot`, `ghost`), then `n`,
//! then `σ` descending, then `X` ascending. Extrapolated ghost rows carry
//! `σ = 0` and close each order's ghost block. Every point is computed before
//! anything is written, so a failed run leaves no report behind.

pub mod args;
pub mod config;
pub mod parse;
pub mod report;

use std::io::Write;

use rayon::prelude::*;

use crate::exact_series::{build_series, PerturbationSeries};
use crate::ghost_reg::{sigma_extrapolate, sigma_sweep, SigmaSweepRow};
use crate::quad_engine::QuadConfig;
use crate::sc_method::{sc_energy, shooting_parts, to_real};
use crate::{Error, Real, Result};

pub use config::{Format, Method, RunConfig, Settings};
pub use parse::{parse_grid, parse_perturbation};
pub use report::{ReportRow, CSV_HEADER};

use report::{ExactEnergy, Extrapolation, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// A finished run: the rendered report and the human-readable summary lines.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: String,
    pub summary: Vec<String>,
}

fn pairs(order: usize, xs: &[Real]) -> Vec<(usize, Real)> {
    (1..=order).flat_map(|n| xs.iter().map(move |&x| (n, x))).collect()
}

fn sc_rows(cfg: &RunConfig, series: &PerturbationSeries, q: &QuadConfig) -> Result<Vec<ReportRow>> {
    pairs(cfg.order, &cfg.x_grid)
        .par_iter()
        .map(|&(n, x)| {
            let r = sc_energy(n, x, series, q)?;
            let mut row = ReportRow::new("sc", n, r.ratio, 0.0, r.oracle);
            row.x_cut = Some(x);
            row.numerator_re = Some(r.numerator);
            row.numerator_im = Some(0.0);
            row.denominator_re = Some(r.denominator);
            row.denominator_im = Some(0.0);
            Ok(row)
        })
        .collect()
}

fn shoot_rows(cfg: &RunConfig, series: &PerturbationSeries, q: &QuadConfig) -> Result<Vec<ReportRow>> {
    pairs(cfg.order, &cfg.x_grid)
        .par_iter()
        .map(|&(n, x)| {
            let (num, den) = shooting_parts(n, x, series, q)?;
            let ratio = num / den;
            if !ratio.is_finite() {
                return Err(Error::NonFinite { at: x });
            }
            let mut row = ReportRow::new("shoot", n, ratio, 0.0, to_real(series.energy(n)?));
            row.x_cut = Some(x);
            row.numerator_re = Some(num);
            row.numerator_im = Some(0.0);
            row.denominator_re = Some(den);
            row.denominator_im = Some(0.0);
            Ok(row)
        })
        .collect()
}

fn ghost_row(r: &SigmaSweepRow) -> ReportRow {
    let mut row = ReportRow::new("ghost", r.n, r.ratio.re, r.ratio.im, r.oracle);
    row.sigma = Some(r.sigma);
    row.x_cut = Some(r.x_cut);
    row.numerator_re = Some(r.numerator.re);
    row.numerator_im = Some(r.numerator.im);
    row.denominator_re = Some(r.denominator.re);
    row.denominator_im = Some(r.denominator.im);
    row
}

fn ghost_rows(
    cfg: &RunConfig,
    series: &PerturbationSeries,
    q: &QuadConfig,
    fits: &mut Vec<Extrapolation>,
) -> Result<Vec<ReportRow>> {
    let sweeps: Vec<Vec<SigmaSweepRow>> = pairs(cfg.order, &cfg.x_grid)
        .par_iter()
        .map(|&(n, x)| sigma_sweep(n, &cfg.sigma_grid, x, series, q))
        .collect::<Result<_>>()?;
    let nx = cfg.x_grid.len();
    let mut rows = Vec::new();
    for (n, block) in (1..=cfg.order).zip(sweeps.chunks(nx)) {
        for si in 0..cfg.sigma_grid.len() {
            rows.extend(block.iter().map(|sweep| ghost_row(&sweep[si])));
        }
        if cfg.extrapolate {
            for sweep in block {
                let fit = sigma_extrapolate(sweep, cfg.fit)?;
                let x = sweep[0].x_cut;
                let oracle = sweep[0].oracle;
                let mut row = ReportRow::new("ghost-extrapolated", n, fit.limit, 0.0, oracle);
                row.sigma = Some(0.0);
                row.x_cut = Some(x);
                rows.push(row);
                fits.push(Extrapolation {
                    n,
                    x_cut: x,
                    model: fit.model.tag(),
                    limit: fit.limit,
                    residual: fit.residual,
                    oracle,
                });
            }
        }
    }
    Ok(rows)
}

/// Computes every requested point and renders the report in memory.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let q = QuadConfig::with_rtol(cfg.tol);
    q.validate()?;
    let series = build_series(&cfg.perturbation, cfg.order)?;
    let exact: Vec<ExactEnergy> = series
        .orders
        .iter()
        .map(|o| ExactEnergy {
            n: o.n,
            energy: o.energy.to_string(),
        })
        .collect();

    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut summary = Vec::new();
    for method in cfg.method.expand() {
        match method {
            Method::Oracle => {
                rows.extend(series.orders.iter().map(|o| {
                    let e = to_real(&o.energy);
                    ReportRow::new("oracle", o.n, e, 0.0, e)
                }));
                summary.extend(exact.iter().map(|e| format!("E{} = {}", e.n, e.energy)));
            }
            Method::Sc => rows.extend(sc_rows(cfg, &series, &q)?),
            Method::Shoot => rows.extend(shoot_rows(cfg, &series, &q)?),
            Method::Ghost => rows.extend(ghost_rows(cfg, &series, &q, &mut fits)?),
            Method::All => unreachable!("expanded above"),
        }
    }
    summary.extend(fits.iter().map(|f| {
        format!(
            "n={} x_cut={} extrapolated = {:.16e} ± {:.3e} ({} fit, oracle {:.16e})",
            f.n, f.x_cut, f.limit, f.residual, f.model, f.oracle
        )
    }));

    let report = match cfg.format {
        Format::Csv => report::to_csv(&rows),
        Format::Json => report::to_json(&Report {
            perturbation: cfg.perturbation.to_string(),
            order: cfg.order,
            exact,
            rows,
            extrapolations: fits,
        }),
    };
    Ok(RunOutput { report, summary })
}

/// Runs and writes the report. Summary lines go to stdout when the report
/// goes to a file, and to stderr when the report itself is on stdout.
pub fn execute(cfg: &RunConfig) -> i32 {
    let out = match run(cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &out.report).inspect_err(|_| {
            let _ = std::fs::remove_file(path);
        }),
        None => std::io::stdout().write_all(out.report.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    for line in &out.summary {
        if cfg.output.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    EXIT_OK
}
