//! Hermite spectral calculus for the harmonic oscillator `H = −Δ + |x|²`.
//!
//! Hermite functions and quadrature ([`hermite`], [`quadrature`]),
//! Fourier–Hermite and continuous Fourier transforms ([`transform`]),
//! symbols and Littlewood–Paley partitions ([`symbols`]), dyadic
//! Hörmander-type symbol norms ([`hnorms`]), operator application
//! ([`operators`]), operator-norm diagnostics ([`opnorms`]), closed-form
//! regularity thresholds ([`thresholds`]) and report output ([`report`]).

pub mod cli;
pub mod error;
pub mod experiments;
pub mod exponent;
pub mod hermite;
pub mod hnorms;
pub mod operators;
pub mod opnorms;
pub mod quadrature;
pub mod report;
pub mod symbols;
pub mod thresholds;
pub mod transform;

pub use error::{Error, Result};
pub use exponent::Exponent;
