//! Even polynomials with exact rational coefficients, and their `f64` shadows.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Real, Result};

/// `Σ c_k x^(2k)` with exact rational `c_k`. Trailing zeros are always trimmed,
/// so the zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl RationalPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_even_coeffs(vec![c])
    }

    /// `coeff · x^power`; odd powers are rejected.
    pub fn monomial(power: u32, coeff: BigRational) -> Result<Self> {
        if power % 2 == 1 {
            return Err(Error::ParityViolation { power });
        }
        let mut coeffs = vec![BigRational::zero(); power as usize / 2 + 1];
        coeffs[power as usize / 2] = coeff;
        Ok(Self::from_even_coeffs(coeffs))
    }

    /// `x^power` with unit coefficient.
    pub fn x_pow(power: u32) -> Result<Self> {
        Self::monomial(power, BigRational::one())
    }

    /// Builds from coefficients of `x^0, x^2, x^4, …`.
    pub fn from_even_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Coefficients of `x^0, x^2, x^4, …`.
    pub fn even_coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `x^power` (zero for odd powers).
    pub fn coeff(&self, power: u32) -> BigRational {
        if power % 2 == 1 {
            return BigRational::zero();
        }
        self.coeffs
            .get(power as usize / 2)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in `x`; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        (!self.coeffs.is_empty()).then(|| 2 * (self.coeffs.len() as u32 - 1))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_even_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `-f'' + 2x f'`, the reduced form of `H0 - E0` acting on `f ψ0`.
    ///
    /// On `x^(2j)` it gives `4j x^(2j) - 2j(2j-1) x^(2j-2)`.
    pub fn reduced_operator(&self) -> Self {
        let n = self.coeffs.len();
        let out = (0..n)
            .map(|j| {
                let diag = &self.coeffs[j] * BigInt::from(4 * j);
                match self.coeffs.get(j + 1) {
                    Some(up) => diag - up * BigInt::from((2 * j + 2) * (2 * j + 1)),
                    None => diag,
                }
            })
            .collect();
        Self::from_even_coeffs(out)
    }

    pub fn to_real(&self) -> RealPoly {
        RealPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.to_f64().unwrap_or(Real::NAN))
                .collect(),
        }
    }

    pub fn eval(&self, x: Real) -> Real {
        self.to_real().eval(x)
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: Self) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigRational::zero();
        RationalPoly::from_even_coeffs(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero)
                })
                .collect(),
        )
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: Self) -> RationalPoly {
        self + &(-rhs)
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: Self) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::from_even_coeffs(out)
    }
}

/// Prints in the grammar accepted by the CLI, e.g. `3/4 - 1/2 x^2 + x^4`.
impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            first = false;
            if k == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "x^{}", 2 * k)?;
            } else {
                write!(f, "{mag} x^{}", 2 * k)?;
            }
        }
        Ok(())
    }
}

/// Floating-point copy of an even polynomial, evaluated by Horner in `x²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoly {
    coeffs: Vec<Real>,
}

impl RealPoly {
    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn from_even_coeffs(coeffs: Vec<Real>) -> Self {
        Self { coeffs }
    }

    pub fn even_coeffs(&self) -> &[Real] {
        &self.coeffs
    }

    pub fn eval(&self, x: Real) -> Real {
        let x2 = x * x;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x2 + c)
    }
}

impl From<&RationalPoly> for RealPoly {
    fn from(p: &RationalPoly) -> Self {
        p.to_real()
    }
}
