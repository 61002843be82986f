//! Run configuration: optional `key = value` file overlaid by flags.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::ghost_reg::{FitModel, DEFAULT_SIGMA_GRID};
use crate::poly::RationalPoly;
use crate::{Error, Real, Result};

use super::parse::{parse_grid, parse_perturbation};

/// Highest perturbation order a run may request.
pub const MAX_ORDER: usize = 10;
pub const DEFAULT_XCUT: Real = 6.0;
pub const DEFAULT_TOL: Real = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Oracle,
    Sc,
    Shoot,
    Ghost,
    All,
}

impl Method {
    /// Concrete methods in report order.
    pub fn expand(self) -> Vec<Method> {
        match self {
            Method::All => vec![Method::Oracle, Method::Sc, Method::Shoot, Method::Ghost],
            m => vec![m],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Sc => "sc",
            Method::Shoot => "shoot",
            Method::Ghost => "ghost",
            Method::All => "all",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

fn parse_format(s: &str) -> Result<Format> {
    match s.trim() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
    }
}

fn parse_fit(s: &str) -> Result<FitModel> {
    match s.trim() {
        "even" => Ok(FitModel::Even),
        "linear" => Ok(FitModel::Linear),
        "quadratic" => Ok(FitModel::Quadratic),
        other => Err(Error::InvalidArgument(format!("unknown fit model {other:?}"))),
    }
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::InvalidArgument(format!("expected a boolean, got {other:?}"))),
    }
}

/// Unvalidated settings; `None` means "not given at this layer".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub perturbation: Option<String>,
    pub order: Option<String>,
    pub xcut: Option<String>,
    pub xcut_grid: Option<String>,
    pub sigma_grid: Option<String>,
    pub tol: Option<String>,
    pub extrapolate: Option<bool>,
    pub fit: Option<String>,
    pub format: Option<String>,
    pub output: Option<String>,
}

impl Settings {
    /// Reads a `key = value` file; `#` starts a comment, `_` and `-` are interchangeable in keys.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                column: 1,
                message: format!("line {}: expected key = value", i + 1),
            })?;
            let value = value.trim().trim_matches('"').to_string();
            match key.trim().replace('_', "-").as_str() {
                "perturbation" => s.perturbation = Some(value),
                "order" => s.order = Some(value),
                "xcut" => s.xcut = Some(value),
                "xcut-grid" => s.xcut_grid = Some(value),
                "sigma-grid" => s.sigma_grid = Some(value),
                "tol" => s.tol = Some(value),
                "extrapolate" => s.extrapolate = Some(parse_bool(&value)?),
                "fit" => s.fit = Some(value),
                "format" => s.format = Some(value),
                "output" => s.output = Some(value),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "line {}: unknown key {other:?}",
                        i + 1
                    )))
                }
            }
        }
        Ok(s)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        Self::from_config_text(&std::fs::read_to_string(path)?)
    }

    /// `self` with every field that `top` sets replaced. A cutoff given at the
    /// top layer, single or grid, replaces both cutoff fields below it.
    pub fn overlay(mut self, top: Settings) -> Settings {
        if top.xcut.is_some() || top.xcut_grid.is_some() {
            self.xcut = top.xcut;
            self.xcut_grid = top.xcut_grid;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if top.$f.is_some() { self.$f = top.$f; } )* };
        }
        take!(perturbation, order, sigma_grid, tol, extrapolate, fit, format, output);
        self
    }
}

/// Validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub perturbation: RationalPoly,
    pub order: usize,
    /// Ascending, non-empty.
    pub x_grid: Vec<Real>,
    /// Descending, non-empty, all positive.
    pub sigma_grid: Vec<Real>,
    pub tol: Real,
    pub extrapolate: bool,
    pub fit: FitModel,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_settings(method: Method, s: &Settings) -> Result<Self> {
        let text = s
            .perturbation
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("a perturbation is required".into()))?;
        let perturbation = parse_perturbation(text)?;
        let order = match &s.order {
            Some(o) => o
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("order: cannot read {o:?}")))?,
            None => 1,
        };
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidArgument(format!(
                "order must lie in 1..={MAX_ORDER}, got {order}"
            )));
        }
        let x_grid = match (&s.xcut, &s.xcut_grid) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument("give either xcut or xcut-grid".into()))
            }
            (Some(x), None) => {
                let g = parse_grid(x)?;
                if g.len() != 1 {
                    return Err(Error::InvalidArgument("xcut takes a single value".into()));
                }
                g
            }
            (None, Some(g)) => parse_grid(g)?,
            (None, None) => vec![DEFAULT_XCUT],
        };
        let mut sigma_grid = match &s.sigma_grid {
            Some(g) => parse_grid(g)?,
            None => DEFAULT_SIGMA_GRID.to_vec(),
        };
        sigma_grid.sort_by(|a, b| b.total_cmp(a));
        if sigma_grid.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument("mixing strengths must be positive".into()));
        }
        let tol = match &s.tol {
            Some(t) => t
                .trim()
                .parse::<Real>()
                .ok()
                .filter(|t| *t > 0.0 && *t < 1.0)
                .ok_or_else(|| Error::InvalidArgument(format!("tol must lie in (0, 1), got {t:?}")))?,
            None => DEFAULT_TOL,
        };
        Ok(RunConfig {
            method,
            perturbation,
            order,
            x_grid,
            sigma_grid,
            tol,
            extrapolate: s.extrapolate.unwrap_or(false),
            fit: s.fit.as_deref().map(parse_fit).transpose()?.unwrap_or(FitModel::Even),
            format: s.format.as_deref().map(parse_format).transpose()?.unwrap_or(Format::Csv),
            output: s.output.as_ref().map(PathBuf::from),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Settings {
        Settings {
            perturbation: Some("x^4".into()),
            ..Settings::default()
        }
    }

    #[test]
    fn defaults() {
        let c = RunConfig::from_settings(Method::Ghost, &base()).unwrap();
        assert_eq!(c.order, 1);
        assert_eq!(c.x_grid, vec![DEFAULT_XCUT]);
        assert_eq!(c.sigma_grid, DEFAULT_SIGMA_GRID.to_vec());
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.fit, FitModel::Even);
        assert!(!c.extrapolate);
    }

    #[test]
    fn config_file_and_precedence() {
        let file = Settings::from_config_text(
            "# run\nperturbation = \"x^2\"\norder=3\nxcut_grid = 4:6:1\nformat = json\nextrapolate = yes\n",
        )
        .unwrap();
        let flags = Settings {
            order: Some("2".into()),
            xcut: Some("5".into()),
            ..Settings::default()
        };
        let merged = file.overlay(flags);
        let c = RunConfig::from_settings(Method::Sc, &merged).unwrap();
        assert_eq!(c.order, 2);
        assert_eq!(c.x_grid, vec![5.0]);
        assert_eq!(c.format, Format::Json);
        assert!(c.extrapolate);
        assert_eq!(c.perturbation, RationalPoly::x_pow(2).unwrap());
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(Settings::from_config_text("colour = blue").is_err());
        assert!(Settings::from_config_text("order 3").is_err());
        let bad = |f: fn(&mut Settings)| {
            let mut s = base();
            f(&mut s);
            RunConfig::from_settings(Method::Sc, &s).is_err()
        };
        assert!(bad(|s| s.perturbation = None));
        assert!(bad(|s| s.order = Some("0".into())));
        assert!(bad(|s| s.order = Some("11".into())));
        assert!(bad(|s| s.xcut = Some("4,5".into())));
        assert!(bad(|s| s.sigma_grid = Some("0.1,0".into())));
        assert!(bad(|s| s.tol = Some("-1".into())));
        assert!(bad(|s| s.format = Some("xml".into())));
        assert!(bad(|s| s.fit = Some("cubic".into())));
    }

    #[test]
    fn sigma_grid_sorted_descending() {
        let mut s = base();
        s.sigma_grid = Some("1e-3,1e-1,1e-2".into());
        let c = RunConfig::from_settings(Method::Ghost, &s).unwrap();
        assert_eq!(c.sigma_grid, vec![1e-1, 1e-2, 1e-3]);
    }
}
