//! The parametric route: `En` read off from trial solutions at a finite cutoff.
//!
//! Treating `En` as a free parameter `α`, the n-th order equation
//! `(H0 - E0) ψn = (α - Ṽn) ψ0` with `ψn(0) = ψn'(0) = 0` has the closed form
//!
//! ```text
//! ψn(α, x) = -ψ0(x) [α J(1; x) - J(Ṽn; x)]
//! ```
//!
//! so `ψn(1, x) - ψn(0, x) = F(x) = -ψ0(x) J(1; x)` for every order, and the
//! condition `ψn(En, X) = 0` gives `En = -ψn(0, X) / F(X) = J(Ṽn; X) / J(1; X)`.
//! Both `J` factors grow like `exp(X²) / X`; only their ratio settles.
//!
//! The lower integration constants are zero. Any other choice shifts `ψn` by a
//! multiple of `ψ0`, which decays like `exp(-X²/2)` and cannot move the ratio
//! as `X` grows.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::basis::{psi0, E0};
use crate::exact_series::PerturbationSeries;
use crate::ode::System;
use crate::poly::RealPoly;
use crate::quad_engine::{nested_j, nested_j_many, QuadConfig};
use crate::{Error, Real, Result};

/// Lowest cutoff at which the parametric ratio is evaluated.
pub const MIN_CUTOFF: Real = 3.0;

pub(crate) fn to_real(q: &BigRational) -> Real {
    q.to_f64().unwrap_or(Real::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionMethod {
    ClosedForm,
    Shooting,
}

/// `ψn(α, x)` together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricSolution {
    pub n: usize,
    pub alpha: Real,
    pub x: Real,
    pub value: Real,
    pub method: SolutionMethod,
}

/// One cutoff of the parametric sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScSweepRow {
    pub n: usize,
    pub x_cut: Real,
    /// `J(Ṽn; X)`.
    pub numerator: Real,
    /// `J(1; X)`.
    pub denominator: Real,
    pub ratio: Real,
    pub oracle: Real,
    pub abs_err: Real,
    /// `J(1; X) · 2X · exp(-X²)`, which tends to `√π / 2`.
    pub scaled_denominator: Real,
}

/// `(J(1; x), J(Ṽn; x))` from one shared pass.
fn j_pair(n: usize, x: Real, series: &PerturbationSeries, cfg: &QuadConfig) -> Result<(Real, Real)> {
    if x == 0.0 {
        return Ok((0.0, 0.0));
    }
    let v = RealPoly::from(series.v_eff(n)?);
    let r = nested_j_many(&[RealPoly::one(), v], x, 0.0, cfg)?;
    Ok((r[0].outer.re, r[1].outer.re))
}

/// `ψn(α, x)` from the Dalgarno–Lewis closed form.
pub fn psi_n_closed_form(
    n: usize,
    alpha: Real,
    x: Real,
    series: &PerturbationSeries,
    cfg: &QuadConfig,
) -> Result<Real> {
    let (j_one, j_v) = j_pair(n, x, series, cfg)?;
    Ok(-psi0(x) * (alpha * j_one - j_v))
}

/// `-u'' + (x² - E0) u = (α - Ṽn) ψ0` as a first-order system.
struct Inhomogeneous {
    alpha: Real,
    v_eff: RealPoly,
}

impl System for Inhomogeneous {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, x: Real, u: &[Real], du: &mut [Real]) {
        du[0] = u[1];
        du[1] = (x * x - E0) * u[0] - (self.alpha - self.v_eff.eval(x)) * psi0(x);
    }
}

/// `ψn(α, x)` by direct integration of the n-th order equation from the origin.
pub fn psi_n_shoot(
    n: usize,
    alpha: Real,
    x: Real,
    series: &PerturbationSeries,
    cfg: &QuadConfig,
) -> Result<Real> {
    cfg.check_cutoff(x)?;
    let sys = Inhomogeneous {
        alpha,
        v_eff: RealPoly::from(series.v_eff(n)?),
    };
    let out = cfg.integrator().integrate(&sys, 0.0, &[0.0, 0.0], x)?;
    if !out.y[0].is_finite() {
        return Err(Error::NonFinite { at: x });
    }
    Ok(out.y[0])
}

pub fn solve_parametric(
    n: usize,
    alpha: Real,
    x: Real,
    series: &PerturbationSeries,
    cfg: &QuadConfig,
    method: SolutionMethod,
) -> Result<ParametricSolution> {
    let value = match method {
        SolutionMethod::ClosedForm => psi_n_closed_form(n, alpha, x, series, cfg)?,
        SolutionMethod::Shooting => psi_n_shoot(n, alpha, x, series, cfg)?,
    };
    Ok(ParametricSolution {
        n,
        alpha,
        x,
        value,
        method,
    })
}

/// `F(x) = -ψ0(x) J(1; x)`.
pub fn universal_f(x: Real, cfg: &QuadConfig) -> Result<Real> {
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(-psi0(x) * nested_j(&RealPoly::one(), x, 0.0, cfg)?.outer.re)
}

fn check_sweep_cutoff(x: Real, cfg: &QuadConfig) -> Result<()> {
    cfg.check_cutoff(x)?;
    if x < MIN_CUTOFF {
        return Err(Error::InvalidArgument(format!(
            "cutoff {x} below the sweep minimum {MIN_CUTOFF}"
        )));
    }
    Ok(())
}

/// `En ≈ J(Ṽn; X) / J(1; X)` at the cutoff `X`.
pub fn sc_energy(
    n: usize,
    x: Real,
    series: &PerturbationSeries,
    cfg: &QuadConfig,
) -> Result<ScSweepRow> {
    check_sweep_cutoff(x, cfg)?;
    let oracle = to_real(series.energy(n)?);
    let (denominator, numerator) = j_pair(n, x, series, cfg)?;
    let ratio = numerator / denominator;
    Ok(ScSweepRow {
        n,
        x_cut: x,
        numerator,
        denominator,
        ratio,
        oracle,
        abs_err: (ratio - oracle).abs(),
        scaled_denominator: denominator * 2.0 * x * (-x * x).exp(),
    })
}

/// `-ψn(0, X) / [ψn(1, X) - ψn(0, X)]` from closed-form trial solutions.
pub fn parametric_ratio(
    n: usize,
    x: Real,
    series: &PerturbationSeries,
    cfg: &QuadConfig,
) -> Result<Real> {
    check_sweep_cutoff(x, cfg)?;
    let (j_one, j_v) = j_pair(n, x, series, cfg)?;
    let p = psi0(x);
    let at_zero = -p * (0.0 * j_one - j_v);
    let at_one = -p * (j_one - j_v);
    Ok(-at_zero / (at_one - at_zero))
}

/// Numerator `-ψn(0, X)` and denominator `ψn(1, X) - ψn(0, X)` by shooting.
pub fn shooting_parts(
    n: usize,
    x: Real,
    series: &PerturbationSeries,
    cfg: &QuadConfig,
) -> Result<(Real, Real)> {
    check_sweep_cutoff(x, cfg)?;
    let at_zero = psi_n_shoot(n, 0.0, x, series, cfg)?;
    let at_one = psi_n_shoot(n, 1.0, x, series, cfg)?;
    Ok((-at_zero, at_one - at_zero))
}

/// Parametric ratio over a grid of cutoffs, in grid order.
pub fn divergence_diagnostics(
    n: usize,
    grid: &[Real],
    series: &PerturbationSeries,
    cfg: &QuadConfig,
) -> Result<Vec<ScSweepRow>> {
    grid.par_iter()
        .map(|&x| sc_energy(n, x, series, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_series::build_series;
    use crate::poly::RationalPoly;

    fn quartic(n: usize) -> PerturbationSeries {
        build_series(&RationalPoly::x_pow(4).unwrap(), n).unwrap()
    }

    fn harmonic(n: usize) -> PerturbationSeries {
        build_series(&RationalPoly::x_pow(2).unwrap(), n).unwrap()
    }

    fn rel(a: Real, b: Real) -> Real {
        (a - b).abs() / a.abs().max(b.abs()).max(Real::MIN_POSITIVE)
    }

    #[test]
    fn oracle_energy_cancels_divergent_mode() {
        let s = quartic(1);
        let cfg = QuadConfig::default();
        let mut prev = Real::INFINITY;
        for x in [4.0, 5.0, 6.0] {
            let exact = psi_n_closed_form(1, 0.75, x, &s, &cfg).unwrap();
            let free = psi_n_closed_form(1, 0.0, x, &s, &cfg).unwrap();
            let q = exact.abs() / free.abs().max(1.0);
            assert!(q < prev, "x = {x}");
            prev = q;
        }
        assert!(prev < 1e-9, "{prev}");
    }

    #[test]
    fn zero_alpha_first_order_is_positive_and_growing() {
        let s = quartic(1);
        let cfg = QuadConfig::default();
        let vals: Vec<Real> = [0.5, 1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&x| psi_n_closed_form(1, 0.0, x, &s, &cfg).unwrap())
            .collect();
        assert!(vals.iter().all(|&v| v > 0.0));
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn affine_in_alpha() {
        let s = quartic(2);
        let cfg = QuadConfig::default();
        for n in [1, 2] {
            for x in [1.0, 3.0, 5.0] {
                let a = psi_n_closed_form(n, 0.0, x, &s, &cfg).unwrap();
                let b = psi_n_closed_form(n, 1.0, x, &s, &cfg).unwrap();
                let mid = psi_n_closed_form(n, 0.5, x, &s, &cfg).unwrap();
                assert!(rel(mid, 0.5 * (a + b)) < 1e-10);
            }
        }
    }

    #[test]
    fn shooting_agrees_with_closed_form() {
        let s = quartic(1);
        let cfg = QuadConfig::with_rtol(1e-12);
        for alpha in [0.0, 1.0] {
            for i in 0..=12 {
                let x = 0.5 * i as Real;
                let cf = psi_n_closed_form(1, alpha, x, &s, &cfg).unwrap();
                let sh = psi_n_shoot(1, alpha, x, &s, &cfg).unwrap();
                assert!(
                    (sh - cf).abs() <= 1e-8 * cf.abs().max(1.0),
                    "α = {alpha}, x = {x}: {sh} vs {cf}"
                );
            }
        }
    }

    #[test]
    fn zero_perturbation_shoots_to_zero() {
        let s = build_series(&RationalPoly::zero(), 1).unwrap();
        let u = psi_n_shoot(1, 0.0, 5.0, &s, &QuadConfig::default()).unwrap();
        assert_eq!(u, 0.0);
    }

    #[test]
    fn universal_function() {
        let cfg = QuadConfig::default();
        let s = quartic(2);
        let f = universal_f(5.0, &cfg).unwrap();
        assert!(f < 0.0);
        for n in [1, 2] {
            let d = psi_n_closed_form(n, 1.0, 5.0, &s, &cfg).unwrap()
                - psi_n_closed_form(n, 0.0, 5.0, &s, &cfg).unwrap();
            assert!(rel(d, f) < 1e-10, "n = {n}");
        }
        for x in [0.5, 2.0, 4.0] {
            let f = universal_f(x, &cfg).unwrap();
            let j = nested_j(&RealPoly::one(), x, 0.0, &cfg).unwrap().outer.re;
            assert!(f < 0.0);
            assert!((-f / (psi0(x) * j) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sc_energy_examples() {
        let cfg = QuadConfig::default();
        let r = sc_energy(1, 6.0, &quartic(1), &cfg).unwrap();
        assert!((r.ratio - 0.75).abs() < 1e-6);
        assert_eq!(r.ratio, r.numerator / r.denominator);
        let h = harmonic(2);
        assert!((sc_energy(1, 6.0, &h, &cfg).unwrap().ratio - 0.5).abs() < 1e-6);
        assert!((sc_energy(2, 6.0, &h, &cfg).unwrap().ratio + 0.125).abs() < 1e-6);
        assert!(sc_energy(1, 2.0, &h, &cfg).is_err());
        assert!(sc_energy(3, 6.0, &h, &cfg).is_err());
    }

    #[test]
    fn ratio_routes_coincide() {
        let cfg = QuadConfig::default();
        let s = quartic(2);
        for n in [1, 2] {
            for x in [3.0, 4.5, 6.0] {
                let a = parametric_ratio(n, x, &s, &cfg).unwrap();
                let b = sc_energy(n, x, &s, &cfg).unwrap().ratio;
                assert!(rel(a, b) < 1e-10);
            }
        }
    }

    #[test]
    fn diagnostics_growth_and_stability() {
        let cfg = QuadConfig::default();
        let rows = divergence_diagnostics(1, &[4.0, 5.0, 6.0], &quartic(1), &cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.x_cut).collect::<Vec<_>>(), [4.0, 5.0, 6.0]);
        assert!(rows[1].denominator / rows[0].denominator > 1e3);
        assert!(rows[2].numerator / rows[1].numerator > 1e4);
        assert!(rows[2].denominator / rows[1].denominator > 1e4);
        assert!((rows[1].ratio - rows[2].ratio).abs() < 1e-6);
        let sqrt_pi_2 = Real::sqrt(std::f64::consts::PI) / 2.0;
        assert!((rows[2].scaled_denominator / sqrt_pi_2 - 1.0).abs() < 0.02);
    }
}
