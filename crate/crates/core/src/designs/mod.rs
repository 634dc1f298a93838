//! Finite-seed Gaussian designs: Gauss-Hermite atoms, a `K`-wise independent
//! polynomial family over a prime field, and the threshold map between them.

mod bits;
mod field;
mod kwise;
mod quadrature;
mod sampler;
mod verify;

pub use bits::SeedBits;
pub use field::{bits_for, is_prime, next_prime, PrimeField, MAX_MODULUS};
pub use kwise::KWiseFamily;
pub use quadrature::{gauss_hermite, Quadrature1D, MAX_QUADRATURE_POINTS};
pub use sampler::{build_sampler, DesignSampler, SamplerDescription, BLOCK_SLACK_BITS};
pub use verify::{verify_moments, MomentCheck, MomentMode, MomentReport, EXHAUSTIVE_LIMIT};

/// Smallest Gauss-Hermite rule matching all moments up to `order`.
pub fn points_for_order(order: usize) -> usize {
    (order + 2) / 2
}
