//! Perturbation energies of the one-dimensional anharmonic oscillator.
//!
//! [`exact_series`] builds the Rayleigh–Schrödinger hierarchy in exact
//! rational arithmetic and is the oracle for every floating-point result.
//! [`sc_method`] evaluates the parametric ratio at a finite cutoff, where its
//! numerator and denominator both diverge; [`ghost_reg`] mixes the
//! non-normalizable ghost solution into the weight and takes the mixing
//! strength to zero.
//!
//! Both floating-point routes evaluate their nested integrals through
//! [`quad_engine`]. [`basis`] holds the unperturbed ground state and its ghost
//! partner on the half line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod cli;
pub mod error;
pub mod exact_series;
pub mod ghost_reg;
pub mod ode;
pub mod poly;
pub mod quad_engine;
pub mod sc_method;

pub use error::{Error, Result};

/// Scalar type used by every floating-point route.
pub type Real = f64;

/// Complex scalar built on [`Real`].
pub type Complex = num_complex::Complex<Real>;

/// Largest cutoff for which `exp(x^2)` products stay representable.
pub const X_MAX: Real = 25.0;
