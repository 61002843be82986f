//! Unperturbed harmonic ground state on the half line and its ghost partner.
//!
//! With `H0 = -d²/dx² + x²` the ground state is `ψ0 = exp(-x²/2)` at `E0 = 1`.
//! The second solution at the same energy, `χ0`, is fixed by `χ0(0) = 0`,
//! `χ0'(0) = 1`; this makes the Wronskian `ψ0 χ0' - ψ0' χ0` identically one.
//! Any other normalization of `χ0` is a rescaling that can be absorbed into the
//! mixing strength `σ` of [`mixed_state`], which is sent to zero anyway.

use crate::ode::{Dopri5, System};
use crate::{Complex, Error, Real, Result, X_MAX};

/// Ground energy of `H0`.
pub const E0: Real = 1.0;

/// Tolerance used when co-integrating the ghost state on its own.
const GHOST_RTOL: Real = 1e-13;
const GHOST_ATOL: Real = 1e-300;

/// `ψ0(x) = exp(-x²/2)`.
pub fn psi0(x: Real) -> Real {
    (-0.5 * x * x).exp()
}

/// `ψ0'(x) = -x ψ0(x)`.
pub fn psi0_prime(x: Real) -> Real {
    -x * psi0(x)
}

/// Value and slope of the ghost state at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostValue {
    pub x: Real,
    pub chi: Real,
    pub chi_prime: Real,
}

impl GhostValue {
    /// `ψ0 χ0' - ψ0' χ0`, equal to one for the exact pair.
    pub fn wronskian(&self) -> Real {
        psi0(self.x) * self.chi_prime - psi0_prime(self.x) * self.chi
    }
}

/// `χ'' = (x² - E0) χ` as a first-order system.
pub(crate) struct GhostEquation;

impl System for GhostEquation {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, x: Real, y: &[Real], dy: &mut [Real]) {
        dy[0] = y[1];
        dy[1] = (x * x - E0) * y[0];
    }
}

pub(crate) fn check_cutoff(x: Real) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "position must be finite and non-negative, got {x}"
        )));
    }
    if x > X_MAX {
        return Err(Error::CutoffTooLarge { x, max: X_MAX });
    }
    Ok(())
}

/// Ghost state value and slope at `x`, by forward integration from the origin.
pub fn ghost_state(x: Real) -> Result<GhostValue> {
    Ok(ghost_states(&[x])?[0])
}

/// `χ0(x)`.
pub fn ghost_chi0(x: Real) -> Result<Real> {
    ghost_state(x).map(|g| g.chi)
}

/// Ghost state on an ascending grid, integrated in a single pass.
pub fn ghost_states(xs: &[Real]) -> Result<Vec<GhostValue>> {
    for &x in xs {
        check_cutoff(x)?;
    }
    let mut out = Vec::with_capacity(xs.len());
    Dopri5::with_tolerance(GHOST_RTOL, GHOST_ATOL).integrate_through(
        &GhostEquation,
        0.0,
        &[0.0, 1.0],
        xs,
        |i, o| {
            out.push(GhostValue {
                x: xs[i],
                chi: o.y[0],
                chi_prime: o.y[1],
            })
        },
    )?;
    Ok(out)
}

/// `Ψ0 = ψ0 + iσχ0` and `ρ = Ψ0²` (the plain complex square, not `|Ψ0|²`).
pub fn mixed_state(x: Real, sigma: Real) -> Result<(Complex, Complex)> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "mixing strength must be positive, got {sigma}"
        )));
    }
    let chi = ghost_chi0(x)?;
    Ok(mix(psi0(x), chi, sigma))
}

pub(crate) fn mix(psi: Real, chi: Real, sigma: Real) -> (Complex, Complex) {
    let big_psi = Complex::new(psi, sigma * chi);
    (big_psi, big_psi * big_psi)
}

/// Dawson-integral evaluation of the ghost state, independent of the ODE route.
pub mod dawson {
    use crate::Real;

    const FRAC_1_SQRT_PI: Real = 0.564_189_583_547_756_3;
    const SERIES_LIMIT: Real = 4.0;

    /// `∫_0^x exp(t²) dt` by its everywhere-positive power series.
    fn erfi_integral_series(x: Real) -> Real {
        // Σ x^(2k+1) / (k! (2k+1))
        let x2 = x * x;
        let mut term = x; // x^(2k+1)/k!
        let mut sum = x;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= x2 / k;
            let add = term / (2.0 * k + 1.0);
            sum += add;
            if add <= sum * 1e-17 {
                break;
            }
        }
        sum
    }

    /// Rybicki's sampling formula, `D(x) ≈ π^(-1/2) Σ_{n odd} exp(-(x - nh)²) / n`,
    /// with the spacing small enough that the aliasing error is below 1e-20.
    fn dawson_rybicki(x: Real) -> Real {
        const H: Real = 0.2;
        const TERMS: usize = 20;
        let n0 = 2.0 * (0.5 * x / H).round();
        let xp = x - n0 * H;
        let mut e1 = (2.0 * xp * H).exp();
        let e2 = e1 * e1;
        let mut d1 = n0 + 1.0;
        let mut d2 = d1 - 2.0;
        let mut sum = 0.0;
        for i in 0..TERMS {
            let c = (-(((2 * i + 1) as Real) * H).powi(2)).exp();
            sum += c * (e1 / d1 + 1.0 / (d2 * e1));
            d1 += 2.0;
            d2 -= 2.0;
            e1 *= e2;
        }
        FRAC_1_SQRT_PI * (-xp * xp).exp() * sum
    }

    /// Dawson's integral `D(x) = exp(-x²) ∫_0^x exp(t²) dt` for `x >= 0`.
    pub fn dawson(x: Real) -> Real {
        if x <= SERIES_LIMIT {
            (-x * x).exp() * erfi_integral_series(x)
        } else {
            dawson_rybicki(x)
        }
    }

    /// `χ0(x) = exp(x²/2) D(x)`.
    pub fn chi0(x: Real) -> Real {
        if x <= SERIES_LIMIT {
            (-0.5 * x * x).exp() * erfi_integral_series(x)
        } else {
            (0.5 * x * x).exp() * dawson_rybicki(x)
        }
    }

    /// `χ0'(x) = exp(x²/2) - x χ0(x)`, from `χ0 = ψ0 ∫_0^x exp(t²) dt`.
    pub fn chi0_prime(x: Real) -> Real {
        -x * chi0(x) + (0.5 * x * x).exp()
    }

    #[cfg(test)]
    pub(super) fn rybicki(x: Real) -> Real {
        dawson_rybicki(x)
    }

    #[cfg(test)]
    pub(super) fn series(x: Real) -> Real {
        (-x * x).exp() * erfi_integral_series(x)
    }
}
