//! Nested integrals `J(S; X) = ∫_0^X dy w(y)⁻¹ ∫_0^y dz w(z) S(z)`.
//!
//! The double integral is the endpoint value of the initial-value problem
//! `I' = w S`, `J' = I / w`, `I(0) = J(0) = 0`, integrated once with the
//! adaptive Dormand–Prince pair. The weight is `w = ψ0²` for `σ = 0` and the
//! complex `ρ = (ψ0 + iσχ0)²` otherwise; in the latter case `χ0` is
//! co-integrated in the same state vector and the complex accumulators are
//! carried as real/imaginary channel pairs.
//!
//! Several sources can share one pass. Their step sequence is then identical,
//! which correlates the truncation errors of numerator and denominator in
//! the energy ratios built on top of this module.

use crate::basis::{check_cutoff, psi0, E0};
use crate::ode::{Dopri5, Outcome, System};
use crate::poly::RealPoly;
use crate::{Complex, Error, Real, Result, X_MAX};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rtol: Real,
    pub atol: Real,
    pub max_steps: usize,
    /// Overflow guard on the cutoff; never above [`X_MAX`].
    pub x_max: Real,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 200_000,
            x_max: X_MAX,
        }
    }
}

impl QuadConfig {
    pub fn with_rtol(rtol: Real) -> Self {
        Self {
            rtol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be positive (rtol = {}, atol = {})",
                self.rtol, self.atol
            )));
        }
        if !(self.x_max > 0.0 && self.x_max <= X_MAX) {
            return Err(Error::InvalidArgument(format!(
                "overflow guard must lie in (0, {X_MAX}], got {}",
                self.x_max
            )));
        }
        Ok(())
    }

    pub(crate) fn integrator(&self) -> Dopri5 {
        Dopri5 {
            max_steps: self.max_steps,
            ..Dopri5::with_tolerance(self.rtol, self.atol)
        }
    }

    pub(crate) fn check_cutoff(&self, x: Real) -> Result<()> {
        self.validate()?;
        check_cutoff(x)?;
        if x > self.x_max {
            return Err(Error::CutoffTooLarge { x, max: self.x_max });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedIntegralResult {
    pub cutoff: Real,
    /// `I(X) = ∫_0^X w S`.
    pub inner: Complex,
    /// `J(X) = ∫_0^X I / w`.
    pub outer: Complex,
    /// Accumulated local error estimate of the outer integral.
    pub error_estimate: Real,
    pub steps: usize,
    /// False when the accumulated estimate exceeds `rtol |J| + atol`.
    pub tolerance_met: bool,
}

/// Real weight `ψ0²`: state `[I_k, J_k]` per source.
struct RealNested<'a> {
    sources: &'a [RealPoly],
}

impl System for RealNested<'_> {
    fn dim(&self) -> usize {
        2 * self.sources.len()
    }
    fn rhs(&self, y: Real, u: &[Real], du: &mut [Real]) {
        let w = (-y * y).exp();
        let inv_w = (y * y).exp();
        for (k, s) in self.sources.iter().enumerate() {
            du[2 * k] = w * s.eval(y);
            du[2 * k + 1] = u[2 * k] * inv_w;
        }
    }
}

/// Ghost-mixed weight `ρ`: state `[χ, χ', (Re I, Im I, Re J, Im J)_k]`.
struct GhostNested<'a> {
    sources: &'a [RealPoly],
    sigma: Real,
}

impl System for GhostNested<'_> {
    fn dim(&self) -> usize {
        2 + 4 * self.sources.len()
    }
    fn rhs(&self, y: Real, u: &[Real], du: &mut [Real]) {
        du[0] = u[1];
        du[1] = (y * y - E0) * u[0];
        let big_psi = Complex::new(psi0(y), self.sigma * u[0]);
        let rho = big_psi * big_psi;
        debug_assert!(rho.norm_sqr() > 0.0, "mixed weight vanished at y = {y}");
        let inv_rho = rho.inv();
        for (k, s) in self.sources.iter().enumerate() {
            let b = 2 + 4 * k;
            let src = rho * s.eval(y);
            let inner = Complex::new(u[b], u[b + 1]) * inv_rho;
            du[b] = src.re;
            du[b + 1] = src.im;
            du[b + 2] = inner.re;
            du[b + 3] = inner.im;
        }
    }
}

fn finite(at: Real, vals: &[Real]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { at })
    }
}

fn collect(
    out: &Outcome,
    cutoff: Real,
    n: usize,
    stride: usize,
    offset: usize,
    cfg: &QuadConfig,
) -> Result<Vec<NestedIntegralResult>> {
    finite(cutoff, &out.y)?;
    Ok((0..n)
        .map(|k| {
            let b = offset + stride * k;
            let (inner, outer, err) = if stride == 2 {
                (
                    Complex::new(out.y[b], 0.0),
                    Complex::new(out.y[b + 1], 0.0),
                    out.local_error_sum[b + 1],
                )
            } else {
                (
                    Complex::new(out.y[b], out.y[b + 1]),
                    Complex::new(out.y[b + 2], out.y[b + 3]),
                    out.local_error_sum[b + 2].hypot(out.local_error_sum[b + 3]),
                )
            };
            NestedIntegralResult {
                cutoff,
                inner,
                outer,
                error_estimate: err,
                steps: out.accepted,
                tolerance_met: err <= cfg.rtol * outer.norm() + cfg.atol,
            }
        })
        .collect())
}

/// `J(S; X)` for the real (`σ = 0`) or ghost-mixed (`σ ≠ 0`) weight.
pub fn nested_j(
    source: &RealPoly,
    cutoff: Real,
    sigma: Real,
    cfg: &QuadConfig,
) -> Result<NestedIntegralResult> {
    Ok(nested_j_many(std::slice::from_ref(source), cutoff, sigma, cfg)?[0])
}

/// `J(S_k; X)` for several sources integrated in one pass.
///
/// A negative `σ` mixes the ghost with the opposite phase; for real sources
/// the result is the complex conjugate of the `|σ|` value.
pub fn nested_j_many(
    sources: &[RealPoly],
    cutoff: Real,
    sigma: Real,
    cfg: &QuadConfig,
) -> Result<Vec<NestedIntegralResult>> {
    cfg.check_cutoff(cutoff)?;
    if !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("mixing strength must be finite, got {sigma}")));
    }
    if sources.is_empty() {
        return Ok(Vec::new());
    }
    let ode = cfg.integrator();
    if sigma == 0.0 {
        let sys = RealNested { sources };
        let out = ode.integrate(&sys, 0.0, &vec![0.0; sys.dim()], cutoff)?;
        collect(&out, cutoff, sources.len(), 2, 0, cfg)
    } else {
        let sys = GhostNested { sources, sigma };
        let mut y0 = vec![0.0; sys.dim()];
        y0[1] = 1.0;
        let out = ode.integrate(&sys, 0.0, &y0, cutoff)?;
        collect(&out, cutoff, sources.len(), 4, 2, cfg)
    }
}

/// `∫_0^X Ψ0 ψ0 S` (`σ ≠ 0`) or `∫_0^X ψ0² S` (`σ = 0`).
struct Weighted<'a> {
    source: &'a RealPoly,
    sigma: Real,
}

impl System for Weighted<'_> {
    fn dim(&self) -> usize {
        4
    }
    fn rhs(&self, y: Real, u: &[Real], du: &mut [Real]) {
        let p = psi0(y);
        let s = self.source.eval(y);
        du[0] = p * p * s;
        du[1] = self.sigma * p * u[2] * s;
        du[2] = u[3];
        du[3] = (y * y - E0) * u[2];
    }
}

/// Single adaptive integral of `Ψ0 ψ0 S` over `[0, X]`.
pub fn weighted_integral(
    source: &RealPoly,
    cutoff: Real,
    sigma: Real,
    cfg: &QuadConfig,
) -> Result<Complex> {
    cfg.check_cutoff(cutoff)?;
    if !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("mixing strength must be finite, got {sigma}")));
    }
    let sys = Weighted { source, sigma };
    let out = cfg
        .integrator()
        .integrate(&sys, 0.0, &[0.0, 0.0, 0.0, 1.0], cutoff)?;
    finite(cutoff, &out.y)?;
    Ok(Complex::new(out.y[0], out.y[1]))
}
