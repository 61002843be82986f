//! Exact Rayleigh–Schrödinger hierarchy for even polynomial perturbations.
//!
//! Writing `ψn = fn ψ0` turns the n-th order equation into the polynomial
//! problem `-fn'' + 2x fn' = En - Ṽn` with
//! `Ṽn = V1 f(n-1) - Σ_{i=1}^{n-1} Ei f(n-i)`. Solvability fixes
//! `En = ⟨Ṽn⟩`, the Gaussian expectation value, and the free constant in `fn`
//! is chosen so that `⟨fn⟩ = 0`, i.e. `ψn ⟂ ψ0`. Everything here is exact.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::RationalPoly;
use crate::{Error, Result};

/// `⟨x^(2k)⟩ = (2k-1)!! / 2^k` under the normalized weight `ψ0²` on `[0, ∞)`.
fn even_moment(k: usize) -> BigRational {
    let mut m = BigRational::one();
    for j in 1..=k {
        m *= BigRational::new(BigInt::from(2 * j - 1), BigInt::from(2));
    }
    m
}

/// `∫ p ψ0² / ∫ ψ0²` over the half line, exactly.
pub fn gaussian_moment(p: &RationalPoly) -> BigRational {
    p.even_coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| c * even_moment(k))
        .fold(BigRational::zero(), |acc, t| acc + t)
}

/// One order of the hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderRecord {
    pub n: usize,
    pub energy: BigRational,
    /// `fn` with `ψn = fn ψ0`.
    pub f: RationalPoly,
    /// `Ṽn`.
    pub v_eff: RationalPoly,
}

/// Orders `1..=N` of the hierarchy for a given perturbation `V1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSeries {
    pub perturbation: RationalPoly,
    pub orders: Vec<OrderRecord>,
}

impl PerturbationSeries {
    pub fn max_order(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self, n: usize) -> Result<&OrderRecord> {
        if n == 0 || n > self.orders.len() {
            return Err(Error::MissingOrders {
                requested: n,
                available: self.orders.len() + 1,
            });
        }
        Ok(&self.orders[n - 1])
    }

    pub fn energy(&self, n: usize) -> Result<&BigRational> {
        self.order(n).map(|o| &o.energy)
    }

    pub fn v_eff(&self, n: usize) -> Result<&RationalPoly> {
        self.order(n).map(|o| &o.v_eff)
    }

    /// `fn`, with `f0 = 1`.
    fn f(&self, n: usize) -> RationalPoly {
        if n == 0 {
            RationalPoly::one()
        } else {
            self.orders[n - 1].f.clone()
        }
    }
}

/// One `E<n> = p/q` line per order.
impl fmt::Display for PerturbationSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.orders {
            writeln!(f, "E{} = {}", o.n, o.energy)?;
        }
        Ok(())
    }
}

/// `Ṽn` from the perturbation and the orders already solved.
pub fn effective_perturbation(
    n: usize,
    v1: &RationalPoly,
    lower: &PerturbationSeries,
) -> Result<RationalPoly> {
    if n == 0 {
        return Err(Error::InvalidArgument("orders start at 1".into()));
    }
    if lower.max_order() + 1 < n {
        return Err(Error::MissingOrders {
            requested: n,
            available: lower.max_order() + 1,
        });
    }
    let mut v = v1 * &lower.f(n - 1);
    for i in 1..n {
        let e = &lower.orders[i - 1].energy;
        v = &v - &lower.f(n - i).scale(e);
    }
    Ok(v)
}

/// Solves `-f'' + 2x f' = En - Ṽn` for `(En, fn)` with `⟨fn⟩ = 0`.
///
/// The operator maps the `x^(2j)` coefficient onto the diagonal `4j`, so the
/// solve runs from the top degree down. The `x^0` row is the solvability
/// condition and holds by the choice of `En`.
pub fn solve_order(v_eff: &RationalPoly) -> (BigRational, RationalPoly) {
    let energy = gaussian_moment(v_eff);
    let rhs = &RationalPoly::constant(energy.clone()) - v_eff;
    let r = rhs.even_coeffs();
    let top = r.len().saturating_sub(1);
    let mut c = vec![BigRational::zero(); top + 1];
    for j in (1..=top).rev() {
        let up = c
            .get(j + 1)
            .map(|u| u * BigInt::from((2 * j + 2) * (2 * j + 1)))
            .unwrap_or_else(BigRational::zero);
        c[j] = (&r[j] + up) / BigInt::from(4 * j);
    }
    if let Some(r0) = r.first() {
        let lhs = c.get(1).map(|c1| -c1 * BigInt::from(2)).unwrap_or_else(BigRational::zero);
        debug_assert_eq!(&lhs, r0, "solvability condition violated");
    }
    let mut f = RationalPoly::from_even_coeffs(c);
    let shift = gaussian_moment(&f);
    f = &f - &RationalPoly::constant(shift);
    (energy, f)
}

/// Builds orders `1..=max_order` for the perturbation `v1`.
pub fn build_series(v1: &RationalPoly, max_order: usize) -> Result<PerturbationSeries> {
    if max_order == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let mut series = PerturbationSeries {
        perturbation: v1.clone(),
        orders: Vec::with_capacity(max_order),
    };
    for n in 1..=max_order {
        let v_eff = effective_perturbation(n, v1, &series)?;
        let (energy, f) = solve_order(&v_eff);
        series.orders.push(OrderRecord {
            n,
            energy,
            f,
            v_eff,
        });
    }
    Ok(series)
}
