//! Exact arithmetic for the level-2 Hauptmodul φ = (η(2z)/η(z))²⁴ and a
//! verification harness for the 2-adic congruences its coefficient powers
//! satisfy.
//!
//! The crate computes q-expansions of φ^m over arbitrary-precision integers,
//! decomposes U₂^α φ^m into polynomials in φ, and machine-checks the
//! congruence, valuation-bound, support, parity, and identity claims over
//! configurable grids. Nothing here ever rounds: every coefficient is an
//! exact big integer, and every series knows precisely which exponents it is
//! valid for.

pub mod cli;
pub mod combinatorics;
mod error;
pub mod eta;
pub mod phi_poly;
pub mod series;
pub mod verify;
pub mod workspace;

pub use error::{Error, Result};
pub use phi_poly::{PhiPolynomial, Strategy};
pub use series::{two_adic_valuation, Integer, LaurentSeries, Valuation};
pub use workspace::Workspace;
