//! The blended-design generator and its single-step and iterated variants.
//!
//! The explicit generator outputs `Y = sum_i w_i Y_i` where the `Y_i` are
//! independent designs and `w_i ∝ (1 - delta^2)^{(i-1)/2}`, `delta = eps^{1/3}`,
//! normalized to unit variance.

mod blend;
mod config;
mod sample;

pub use blend::{blend_weights, hybrid_sample, hybrid_weights, BlendWeights, HybridWeights};
pub use config::{ell_formula, plan, theorem_design_order, GeneratorConfig, PlanRequest, MAX_ELL};
pub use sample::{sample, seed_accounting, total_seed_bits, Generator, Scratch, SeedAccounting};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn small() -> GeneratorConfig {
        PlanRequest {
            n: 2,
            d: 1,
            k: 1,
            epsilon: 0.5,
            ell_cap: None,
            design_order: Some(6),
        }
        .plan()
        .unwrap()
    }

    #[test]
    fn deterministic_sampling() {
        let g = Generator::new(&small()).unwrap();
        let key = StreamKey::from_u64(1);
        let seed = g.master_seed(&key, 9);
        assert_eq!(g.sample(&seed).unwrap(), g.sample(&seed).unwrap());
        let mut out = vec![0.0; 2];
        g.sample_indexed(&key, 9, &mut out, &mut Scratch::default());
        assert_eq!(out, g.sample(&seed).unwrap());
    }

    #[test]
    fn single_design_blend_is_a_design_sample() {
        let cfg = PlanRequest {
            n: 3,
            d: 1,
            k: 1,
            epsilon: 0.5,
            ell_cap: Some(1),
            design_order: Some(4),
        }
        .plan()
        .unwrap();
        let g = Generator::new(&cfg).unwrap();
        let bits = g.master_seed(&StreamKey::from_u64(3), 0);
        let mut seed = Vec::new();
        g.sampler().seed_from_bits(&bits, 0, &mut seed).unwrap();
        assert_eq!(g.sample(&bits).unwrap(), g.sampler().sample(&seed).unwrap());
    }

    #[test]
    fn short_seed_is_rejected() {
        let g = Generator::new(&small()).unwrap();
        let short =
            crate::designs::SeedBits::from_bytes(vec![0; ((g.total_seed_bits() - 1) / 8) as usize]);
        assert!(matches!(
            g.sample(&short),
            Err(crate::Error::InsufficientSeedBits { .. })
        ));
    }

    #[test]
    fn seed_ranges_partition_the_stream() {
        let g = Generator::new(&small()).unwrap();
        let ranges = g.seed_ranges();
        assert_eq!(ranges[0].0, 0);
        for w in ranges.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        assert_eq!(ranges.last().unwrap().1, g.total_seed_bits());
        assert_eq!(total_seed_bits(g.config()), g.total_seed_bits());
    }

    #[test]
    fn accounting_factors() {
        let cfg = small();
        let a = seed_accounting(&cfg);
        assert_eq!(
            a.total_bits,
            a.ell as u64 * a.independence as u64 * (a.element_bits as u64 + 16)
        );
        assert_eq!(a.block_bits, a.element_bits + 16);
    }
}
