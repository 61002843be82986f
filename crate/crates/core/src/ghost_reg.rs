//! Ghost-state regularization of the parametric ratio.
//!
//! The weight `ψ0²` is replaced by `ρ = Ψ0²` with `Ψ0 = ψ0 + iσχ0`, giving
//! `Jσ[S; X] = ∫_0^X dy ρ⁻¹ ∫_0^y dz ρ S`. Because `W(ψ0, Ψ0) = iσ`,
//! `1/Ψ0² = (i/σ) (ψ0/Ψ0)'`, and one integration by parts yields the exact
//! finite-cutoff identity
//!
//! ```text
//! Jσ[S; X] = (i/σ) [ (ψ0/Ψ0)(X) Iρ(X) - ∫_0^X ψ0 Ψ0 S ],   Iρ(y) = ∫_0^y ρ S.
//! ```
//!
//! The leading term `-(i/σ) ∫ ψ0 Ψ0 S` carries `∫ ψ0² S`, and the ratio
//! `Jσ[Ṽn]/Jσ[1]` tends to the ordinary matrix element while `σ χ0(X)`
//! dominates `ψ0(X)`. Below that scale it turns into the unregularized ratio at
//! the same cutoff. For polynomial `S` the boundary term has no limit as
//! `X → ∞`; every quantity here carries a finite `X`.
//!
//! `ρ(-σ) = conj ρ(σ)`, so `Re Jσ` and the real part of the ratio are even in
//! `σ`. [`FitModel::Even`] fits in powers of `σ²`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::basis::{ghost_state, mix, psi0, psi0_prime};
use crate::exact_series::PerturbationSeries;
use crate::poly::RealPoly;
use crate::quad_engine::{nested_j, nested_j_many, weighted_integral, QuadConfig};
use crate::sc_method::to_real;
use crate::{Complex, Error, Real, Result};

/// Default mixing strengths, strictly decreasing.
///
/// `Im(ratio)` is linear in `σ`. For `n ≤ 3`, `V1 ∈ {x², x⁴}` and `X = 6`
/// it stays below `1e-5` at the smallest entry.
pub const DEFAULT_SIGMA_GRID: [Real; 5] = [1e-8, 1e-9, 1e-10, 1e-11, 1e-12];

/// One point of a σ sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSweepRow {
    pub n: usize,
    pub sigma: Real,
    pub x_cut: Real,
    /// `Jσ[Ṽn; X]`.
    pub numerator: Complex,
    /// `Jσ[1; X]`.
    pub denominator: Complex,
    pub ratio: Complex,
    pub oracle: Real,
    /// `|Re(ratio) - En|`.
    pub abs_err: Real,
    /// `|Im(ratio)|`.
    pub im_abs: Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `a + bσ`
    Linear,
    /// `a + bσ + cσ²`
    Quadratic,
    /// `a + bσ² + cσ⁴`
    Even,
}

impl FitModel {
    fn powers(self) -> &'static [i32] {
        match self {
            FitModel::Linear => &[0, 1],
            FitModel::Quadratic => &[0, 1, 2],
            FitModel::Even => &[0, 2, 4],
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            FitModel::Linear => "linear",
            FitModel::Quadratic => "quadratic",
            FitModel::Even => "even",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationResult {
    /// Fitted value at `σ = 0`.
    pub limit: Real,
    pub model: FitModel,
    /// RMS deviation of the inputs from the fit; zero when the fit interpolates.
    pub residual: Real,
    pub sigmas: Vec<Real>,
    pub values: Vec<Real>,
}

fn check_sigma(sigma: Real) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "mixing strength must be positive, got {sigma}"
        )))
    }
}

/// `Jσ[Ṽn; X] / Jσ[1; X]` at one mixing strength.
pub fn ghost_energy(
    n: usize,
    sigma: Real,
    x: Real,
    series: &PerturbationSeries,
    cfg: &QuadConfig,
) -> Result<SigmaSweepRow> {
    check_sigma(sigma)?;
    let oracle = to_real(series.energy(n)?);
    let v = RealPoly::from(series.v_eff(n)?);
    let r = nested_j_many(&[v, RealPoly::one()], x, sigma, cfg)?;
    let (numerator, denominator) = (r[0].outer, r[1].outer);
    let ratio = numerator / denominator;
    Ok(SigmaSweepRow {
        n,
        sigma,
        x_cut: x,
        numerator,
        denominator,
        ratio,
        oracle,
        abs_err: (ratio.re - oracle).abs(),
        im_abs: ratio.im.abs(),
    })
}

/// Ghost ratio over a σ grid, returned in grid order.
pub fn sigma_sweep(
    n: usize,
    sigmas: &[Real],
    x: Real,
    series: &PerturbationSeries,
    cfg: &QuadConfig,
) -> Result<Vec<SigmaSweepRow>> {
    sigmas
        .par_iter()
        .map(|&s| ghost_energy(n, s, x, series, cfg))
        .collect()
}

/// Least-squares fit of `Re(ratio)` in `σ`, evaluated at `σ = 0`.
///
/// The rows must share `(n, X)` and have strictly decreasing `σ`. The fit is
/// done in `t = σ / σ_max` on data shifted by the smallest-σ value, so a
/// constant input reproduces that constant exactly.
pub fn sigma_extrapolate(rows: &[SigmaSweepRow], model: FitModel) -> Result<ExtrapolationResult> {
    let powers = model.powers();
    if rows.len() < 3 || rows.len() < powers.len() {
        return Err(Error::DegenerateGrid(format!(
            "{} rows, need at least {}",
            rows.len(),
            powers.len().max(3)
        )));
    }
    let first = &rows[0];
    if rows.iter().any(|r| r.n != first.n || r.x_cut != first.x_cut) {
        return Err(Error::InvalidArgument("rows must share order and cutoff".into()));
    }
    if rows.windows(2).any(|w| w[1].sigma.partial_cmp(&w[0].sigma) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::DegenerateGrid("σ must be strictly decreasing".into()));
    }
    let sigmas: Vec<Real> = rows.iter().map(|r| r.sigma).collect();
    let values: Vec<Real> = rows.iter().map(|r| r.ratio.re).collect();
    let (limit, residual) = fit_intercept(&sigmas, &values, powers)?;
    Ok(ExtrapolationResult {
        limit,
        model,
        residual,
        sigmas,
        values,
    })
}

fn fit_intercept(sigmas: &[Real], values: &[Real], powers: &[i32]) -> Result<(Real, Real)> {
    let m = sigmas.len();
    let scale = sigmas[0];
    let base = values[m - 1];
    let a = DMatrix::from_fn(m, powers.len(), |i, j| (sigmas[i] / scale).powi(powers[j]));
    let b = DVector::from_iterator(m, values.iter().map(|v| v - base));
    if b.iter().all(|&v| v == 0.0) {
        return Ok((base, 0.0));
    }
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::DegenerateGrid(e.to_string()))?;
    let resid = &a * &coef - &b;
    let rms = if m > powers.len() {
        (resid.norm_squared() / m as Real).sqrt()
    } else {
        0.0
    };
    Ok((base + coef[0], rms))
}

/// Relative residual of the integration-by-parts identity at cutoff `X`.
pub fn ibp_identity_check(source: &RealPoly, sigma: Real, x: Real, cfg: &QuadConfig) -> Result<Real> {
    check_sigma(sigma)?;
    let j = nested_j(source, x, sigma, cfg)?;
    let g = ghost_state(x)?;
    let (big_psi, _) = mix(psi0(x), g.chi, sigma);
    let boundary = Complex::new(psi0(x), 0.0) / big_psi * j.inner;
    let rhs = Complex::new(0.0, 1.0 / sigma) * (boundary - weighted_integral(source, x, sigma, cfg)?);
    let lhs = j.outer;
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()))
}

/// `|1/Ψ0²(x) - (i/σ) (ψ0/Ψ0)'(x)|`, with the derivative built from `ψ0'` and `χ0'`.
pub fn ibp_pointwise_residual(x: Real, sigma: Real) -> Result<Real> {
    check_sigma(sigma)?;
    let g = ghost_state(x)?;
    Ok(pointwise_residual(x, g.chi, g.chi_prime, sigma))
}

fn pointwise_residual(x: Real, chi: Real, chi_prime: Real, sigma: Real) -> Real {
    let p = Complex::new(psi0(x), 0.0);
    let dp = Complex::new(psi0_prime(x), 0.0);
    let big = Complex::new(psi0(x), sigma * chi);
    let dbig = Complex::new(psi0_prime(x), sigma * chi_prime);
    let quotient_prime = (dp * big - p * dbig) / (big * big);
    let lhs = (big * big).inv();
    (lhs - Complex::new(0.0, 1.0 / sigma) * quotient_prime).norm()
}

/// Pointwise residual over an ascending grid, one integration pass.
pub fn ibp_pointwise_residuals(xs: &[Real], sigma: Real) -> Result<Vec<Real>> {
    check_sigma(sigma)?;
    Ok(crate::basis::ghost_states(xs)?
        .into_iter()
        .map(|g| pointwise_residual(g.x, g.chi, g.chi_prime, sigma))
        .collect())
}

/// `(-(i/σ) ∫_0^X Ψ0 ψ0 S, Jσ[S; X] - that)`.
///
/// The remainder is the boundary term `(i/σ) (ψ0/Ψ0)(X) Iρ(X)`, which tends to
/// a σ-independent value once `σ χ0(X)` dominates `ψ0(X)`.
pub fn dominant_term_split(
    source: &RealPoly,
    sigma: Real,
    x: Real,
    cfg: &QuadConfig,
) -> Result<(Complex, Complex)> {
    check_sigma(sigma)?;
    let singular = Complex::new(0.0, -1.0 / sigma) * weighted_integral(source, x, sigma, cfg)?;
    let j = nested_j(source, x, sigma, cfg)?.outer;
    Ok((singular, j - singular))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_series::build_series;
    use crate::poly::RationalPoly;
    use crate::sc_method::sc_energy;

    fn series(power: u32, n: usize) -> PerturbationSeries {
        build_series(&RationalPoly::x_pow(power).unwrap(), n).unwrap()
    }

    fn synthetic(sigmas: &[Real], f: impl Fn(Real) -> Real) -> Vec<SigmaSweepRow> {
        sigmas
            .iter()
            .map(|&s| SigmaSweepRow {
                n: 1,
                sigma: s,
                x_cut: 6.0,
                numerator: Complex::new(0.0, 0.0),
                denominator: Complex::new(1.0, 0.0),
                ratio: Complex::new(f(s), 0.0),
                oracle: 0.0,
                abs_err: 0.0,
                im_abs: 0.0,
            })
            .collect()
    }

    #[test]
    fn ghost_ratio_first_order() {
        let cfg = QuadConfig::default();
        let q = series(4, 1);
        let r = ghost_energy(1, 1e-4, 6.0, &q, &cfg).unwrap();
        assert!((r.ratio.re - 0.75).abs() < 1e-5);
        assert_eq!(r.ratio, r.numerator / r.denominator);
        let h = series(2, 1);
        assert!((ghost_energy(1, 1e-4, 6.0, &h, &cfg).unwrap().ratio.re - 0.5).abs() < 1e-5);
        assert!(ghost_energy(1, 0.0, 6.0, &h, &cfg).is_err());
    }

    #[test]
    fn imaginary_part_is_linear_in_sigma() {
        let cfg = QuadConfig::default();
        let q = series(4, 1);
        let a = ghost_energy(1, 1e-4, 6.0, &q, &cfg).unwrap().ratio.im;
        let b = ghost_energy(1, 1e-6, 6.0, &q, &cfg).unwrap().ratio.im;
        assert!((a / b / 100.0 - 1.0).abs() < 1e-3, "{a} {b}");
        let c = ghost_energy(1, 1e-8, 6.0, &q, &cfg).unwrap();
        assert!(c.im_abs < 1e-5);
    }

    #[test]
    fn small_sigma_approaches_unregularized_ratio() {
        let cfg = QuadConfig::default();
        let q = series(4, 2);
        for n in [1, 2] {
            let sc = sc_energy(n, 5.0, &q, &cfg).unwrap().ratio;
            let mut prev = Real::INFINITY;
            for e in [1, 2, 3, 4, 5] {
                let g = ghost_energy(n, 10f64.powi(-e), 5.0, &q, &cfg).unwrap().ratio;
                let d = (g - Complex::new(sc, 0.0)).norm();
                assert!(d < prev, "n = {n}, σ = 1e-{e}");
                prev = d;
            }
            for e in [10, 12, 14] {
                let g = ghost_energy(n, 10f64.powi(-e), 5.0, &q, &cfg).unwrap().ratio;
                assert!((g.re - sc).abs() <= 1e-9 * sc.abs(), "n = {n}, σ = 1e-{e}");
                assert!(g.im.abs() <= 1e-5, "n = {n}, σ = 1e-{e}");
            }
        }
    }

    #[test]
    fn extrapolation_examples() {
        let cfg = QuadConfig::default();
        let rows = sigma_sweep(1, &[1e-1, 1e-2, 1e-3], 6.0, &series(4, 1), &cfg).unwrap();
        let fit = sigma_extrapolate(&rows, FitModel::Even).unwrap();
        assert!((fit.limit - 0.75).abs() < 1e-6, "{}", fit.limit);

        let flat = synthetic(&[0.3, 0.2, 0.1, 0.05], |_| 0.123_456_789);
        for model in [FitModel::Linear, FitModel::Quadratic, FitModel::Even] {
            assert_eq!(sigma_extrapolate(&flat, model).unwrap().limit, 0.123_456_789);
        }

        let line = synthetic(&[1e-1, 3e-2, 1e-2, 3e-3], |s| 0.75 + 2.5 * s);
        for model in [FitModel::Linear, FitModel::Quadratic] {
            let fit = sigma_extrapolate(&line, model).unwrap();
            assert!((fit.limit - 0.75).abs() < 1e-14, "{model:?}");
            assert!(fit.residual < 1e-14);
        }
    }

    #[test]
    fn extrapolation_bracket_invariant() {
        let rows = synthetic(&[1e-1, 3e-2, 1e-2, 3e-3, 1e-3], |s| -0.125 + 3.0 * s * s - 40.0 * s.powi(4));
        let fit = sigma_extrapolate(&rows, FitModel::Even).unwrap();
        let (hi, lo) = (fit.values[0], fit.values[4]);
        assert!((fit.limit - lo).abs() <= (hi - lo).abs());
        assert!((fit.limit + 0.125).abs() < 1e-13);
    }

    #[test]
    fn extrapolation_rejects_bad_grids() {
        let two = synthetic(&[0.1, 0.01], |_| 1.0);
        assert!(matches!(sigma_extrapolate(&two, FitModel::Linear), Err(Error::DegenerateGrid(_))));
        let rising = synthetic(&[0.01, 0.1, 0.2], |_| 1.0);
        assert!(matches!(sigma_extrapolate(&rising, FitModel::Even), Err(Error::DegenerateGrid(_))));
        let repeated = synthetic(&[0.1, 0.1, 0.01], |_| 1.0);
        assert!(sigma_extrapolate(&repeated, FitModel::Even).is_err());
        let mut mixed = synthetic(&[0.1, 0.01, 0.001], |_| 1.0);
        mixed[1].n = 2;
        assert!(matches!(sigma_extrapolate(&mixed, FitModel::Even), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ibp_identity_examples() {
        let cfg = QuadConfig::default();
        let v1 = RealPoly::from(series(4, 1).v_eff(1).unwrap());
        assert!(ibp_identity_check(&RealPoly::one(), 0.1, 5.0, &cfg).unwrap() <= 1e-8);
        assert!(ibp_identity_check(&v1, 0.01, 5.0, &cfg).unwrap() <= 1e-8);
        let xs: Vec<Real> = (0..=100).map(|i| 0.1 * i as Real).collect();
        for sigma in [0.1, 0.01] {
            let worst = ibp_pointwise_residuals(&xs, sigma)
                .unwrap()
                .into_iter()
                .fold(0.0, Real::max);
            assert!(worst <= 1e-8, "σ = {sigma}: {worst}");
        }
        assert!(ibp_pointwise_residual(3.0, 0.1).unwrap() <= 1e-8);
    }

    #[test]
    fn ibp_identity_suite() {
        let cfg = QuadConfig::default();
        let q = series(4, 2);
        let sources = [
            RealPoly::one(),
            RealPoly::from(&RationalPoly::x_pow(2).unwrap()),
            RealPoly::from(q.v_eff(1).unwrap()),
            RealPoly::from(q.v_eff(2).unwrap()),
        ];
        for (k, src) in sources.iter().enumerate() {
            for sigma in [0.1, 0.01] {
                for x in [4.0, 5.0, 6.0] {
                    let r = ibp_identity_check(src, sigma, x, &cfg).unwrap();
                    assert!(r <= 1e-8, "source {k}, σ = {sigma}, X = {x}: {r}");
                }
            }
        }
    }

    #[test]
    fn dominant_term_carries_matrix_element() {
        let cfg = QuadConfig::default();
        let q = series(4, 1);
        let v1 = RealPoly::from(q.v_eff(1).unwrap());
        let sigma = 1e-4;
        let (sing_v, _) = dominant_term_split(&v1, sigma, 6.0, &cfg).unwrap();
        let (sing_1, _) = dominant_term_split(&RealPoly::one(), sigma, 6.0, &cfg).unwrap();
        assert!(((sing_v / sing_1).re - 0.75).abs() < 1e-5);

        // iσ · singular → ∫ ψ0² S
        let plain = weighted_integral(&v1, 6.0, 0.0, &cfg).unwrap().re;
        let back = sing_v * Complex::new(0.0, sigma);
        assert!((back.re - plain).abs() < 1e-12 * plain);

        let (_, rem_a) = dominant_term_split(&v1, 1e-4, 6.0, &cfg).unwrap();
        let (_, rem_b) = dominant_term_split(&v1, 1e-5, 6.0, &cfg).unwrap();
        let full = nested_j(&v1, 6.0, 1e-4, &cfg).unwrap().outer;
        assert!(rem_a.norm() <= full.norm());
        assert!((rem_a - rem_b).norm() <= 0.1 * rem_b.norm(), "{rem_a} vs {rem_b}");
    }

    #[test]
    fn conjugation_symmetry() {
        let cfg = QuadConfig::default();
        let v1 = RealPoly::from(series(4, 1).v_eff(1).unwrap());
        let a = nested_j(&v1, 5.0, 0.01, &cfg).unwrap().outer;
        let b = nested_j(&v1, 5.0, -0.01, &cfg).unwrap().outer;
        assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
    }
}
