//! Explicit pseudorandom generator for Gaussian polynomial threshold functions.
//!
//! The generator blends `l` independent finite-seed Gaussian designs with
//! geometrically decaying weights. Each design maps a `K`-wise independent
//! polynomial family over a prime field onto Gauss-Hermite atoms. Around it sit
//! the Hermite-basis utilities and the Monte-Carlo harness used to check
//! moments, anticoncentration, tail bounds and fooling gaps.
//!
//! Core math is generic over [`Scalar`]; the aliases below fix it to `f64`.

pub mod designs;
pub mod error;
pub mod generator;
pub mod harness;
pub mod hermite;
pub mod parallel;
pub mod ptf;
pub mod rng;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Polynomial = hermite::SparsePolynomial<f64>;
pub type Expansion = hermite::HermiteExpansion<f64>;
pub type Quadrature = designs::Quadrature1D<f64>;
pub type Sampler = designs::DesignSampler<f64>;
pub type Threshold = ptf::Ptf<f64>;

pub type Polynomial32 = hermite::SparsePolynomial<f32>;
pub type Quadrature32 = designs::Quadrature1D<f32>;
