//! Exact weighted sums over squarefree-supported multiplicative functions,
//! the delay-differential solution `f(u; k, m)`, the iterated sieve integrals
//! `I_s(t, v)`, and the asymptotic coefficient of the smoothed GPY sieve.
//!
//! The numerical core (quadrature, Chebyshev series, the delay solver and the
//! iterated-integral tables) is generic over [`Real`], implemented for `f32`
//! and `f64`. Exact sums use arbitrary-precision rationals. The aliases below
//! pin the double-precision instantiation used by the CLI and the
//! verification harness.

pub mod chebyshev;
pub mod cli;
pub mod dde;
pub mod error;
pub mod format;
pub mod iterints;
pub mod multfun;
pub mod primes;
pub mod quadrature;
pub mod scalar;
pub mod verify;
pub mod zhang;

pub use error::{Error, Result};
pub use scalar::{KahanSum, Real};

/// Exact rational values of sums and prime weights.
pub type Rational = num_rational::BigRational;

pub type PanelSolution = dde::PanelSolution<f64>;
pub type SieveKernel = iterints::SieveKernel<f64>;
pub type ITable = iterints::ITable<f64>;
pub type SumResult = multfun::SumResult<f64>;
pub type ChebSeries = chebyshev::ChebSeries<f64>;
pub type GaussLegendre = quadrature::GaussLegendre<f64>;
