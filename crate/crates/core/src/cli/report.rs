//! Report rows and their CSV and JSON renderings.

use serde::Serialize;

use crate::Real;

pub const CSV_HEADER: &str = "method,n,sigma,x_cut,numerator_re,numerator_im,denominator_re,denominator_im,ratio_re,ratio_im,oracle,abs_err";

/// One computed point. Absent values render as empty CSV fields and JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: String,
    pub n: usize,
    pub sigma: Option<Real>,
    pub x_cut: Option<Real>,
    pub numerator_re: Option<Real>,
    pub numerator_im: Option<Real>,
    pub denominator_re: Option<Real>,
    pub denominator_im: Option<Real>,
    pub ratio_re: Real,
    pub ratio_im: Real,
    pub oracle: Real,
    /// Always `|ratio_re - oracle|`.
    pub abs_err: Real,
}

impl ReportRow {
    pub fn new(method: &str, n: usize, ratio_re: Real, ratio_im: Real, oracle: Real) -> Self {
        Self {
            method: method.to_string(),
            n,
            sigma: None,
            x_cut: None,
            numerator_re: None,
            numerator_im: None,
            denominator_re: None,
            denominator_im: None,
            ratio_re,
            ratio_im,
            oracle,
            abs_err: (ratio_re - oracle).abs(),
        }
    }
}

/// Scalars carry 17 significant digits.
fn num(v: Real) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<Real>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.method.clone(),
            r.n.to_string(),
            opt(r.sigma),
            opt(r.x_cut),
            opt(r.numerator_re),
            opt(r.numerator_im),
            opt(r.denominator_re),
            opt(r.denominator_im),
            num(r.ratio_re),
            num(r.ratio_im),
            num(r.oracle),
            num(r.abs_err),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Exact energy as printed by the oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactEnergy {
    pub n: usize,
    pub energy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub n: usize,
    pub x_cut: Real,
    pub model: &'static str,
    pub limit: Real,
    pub residual: Real,
    pub oracle: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub perturbation: String,
    pub order: usize,
    pub exact: Vec<ExactEnergy>,
    pub rows: Vec<ReportRow>,
    pub extrapolations: Vec<Extrapolation>,
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
