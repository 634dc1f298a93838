use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::blend::{blend_weights, BlendWeights};
use super::config::GeneratorConfig;
use crate::designs::{DesignSampler, SeedBits};
use crate::error::{Error, Result};
use crate::rng::StreamKey;

/// Ready-to-run generator: the shared design sampler plus blend weights.
#[derive(Clone, Debug)]
pub struct Generator {
    config: GeneratorConfig,
    sampler: DesignSampler<f64>,
    weights: BlendWeights<f64>,
}

/// Reusable buffers for [`Generator::sample_into`].
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    seed: Vec<u64>,
    design: Vec<f64>,
    bits: SeedBits,
}

impl Generator {
    pub fn new(config: &GeneratorConfig) -> Result<Self> {
        let sampler = config.sampler()?;
        let weights = blend_weights(config.delta, config.ell)?;
        Ok(Self {
            config: config.clone(),
            sampler,
            weights,
        })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn sampler(&self) -> &DesignSampler<f64> {
        &self.sampler
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights.w
    }

    pub fn dim(&self) -> usize {
        self.config.n
    }

    pub fn total_seed_bits(&self) -> u64 {
        self.config.ell as u64 * self.sampler.stream_bits()
    }

    /// Bit range `[start, end)` each design reads from the master bitstream.
    pub fn seed_ranges(&self) -> Vec<(u64, u64)> {
        let width = self.sampler.stream_bits();
        self.config
            .seed_offsets
            .iter()
            .map(|&o| (o, o + width))
            .collect()
    }

    pub fn sample(&self, master_seed: &SeedBits) -> Result<Vec<f64>> {
        let needed = self.total_seed_bits();
        if master_seed.len_bits() < needed {
            return Err(Error::InsufficientSeedBits {
                needed,
                available: master_seed.len_bits(),
            });
        }
        let mut out = vec![0.0; self.dim()];
        let mut scratch = Scratch::default();
        self.blend(master_seed, &mut out, &mut scratch);
        Ok(out)
    }

    /// Output for the `index`-th master seed drawn from the stream keyed by `key`.
    pub fn sample_indexed(
        &self,
        key: &StreamKey,
        index: u64,
        out: &mut [f64],
        scratch: &mut Scratch,
    ) {
        let bytes = self.total_seed_bits().div_ceil(8) as usize;
        let buf = scratch.bits.bytes_mut();
        buf.resize(bytes, 0);
        key.stream(index).fill_bytes(buf);
        let bits = std::mem::take(&mut scratch.bits);
        self.blend(&bits, out, scratch);
        scratch.bits = bits;
    }

    /// Master bitstream used by [`Generator::sample_indexed`].
    pub fn master_seed(&self, key: &StreamKey, index: u64) -> SeedBits {
        let mut buf = vec![0u8; self.total_seed_bits().div_ceil(8) as usize];
        key.stream(index).fill_bytes(&mut buf);
        SeedBits::from_bytes(buf)
    }

    fn blend(&self, bits: &SeedBits, out: &mut [f64], scratch: &mut Scratch) {
        out.iter_mut().for_each(|v| *v = 0.0);
        scratch.design.resize(self.dim(), 0.0);
        for (&offset, &w) in self.config.seed_offsets.iter().zip(&self.weights.w) {
            self.sampler
                .seed_from_bits_unchecked(bits, offset, &mut scratch.seed);
            self.sampler.sample_into(&scratch.seed, &mut scratch.design);
            out.iter_mut()
                .zip(&scratch.design)
                .for_each(|(o, &y)| *o += w * y);
        }
    }
}

pub fn sample(config: &GeneratorConfig, master_seed: &SeedBits) -> Result<Vec<f64>> {
    Generator::new(config)?.sample(master_seed)
}

/// `l * K * (ceil(log2 q) + 16)`.
pub fn total_seed_bits(config: &GeneratorConfig) -> u64 {
    config.ell as u64
        * config.independence as u64
        * (config.sampler.stream_bits / config.sampler.k as u64)
}

/// Exact seed length with its factors and the two asymptotic forms
/// `log2(n / eps) * l` and `log2(n) / eps`, constants omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedAccounting {
    pub ell: usize,
    pub independence: usize,
    pub modulus: u64,
    pub element_bits: u32,
    pub block_bits: u32,
    pub bits_per_design: u64,
    pub total_bits: u64,
    pub seed_entropy_bits: u64,
    pub truncated: bool,
    pub log_n_over_eps_times_ell: f64,
    pub log_n_over_eps: f64,
}

pub fn seed_accounting(config: &GeneratorConfig) -> SeedAccounting {
    let s = &config.sampler;
    let block_bits = (s.stream_bits / s.k as u64) as u32;
    let n = config.n as f64;
    SeedAccounting {
        ell: config.ell,
        independence: config.independence,
        modulus: s.q,
        element_bits: block_bits - crate::designs::BLOCK_SLACK_BITS,
        block_bits,
        bits_per_design: s.stream_bits,
        total_bits: total_seed_bits(config),
        seed_entropy_bits: config.ell as u64 * s.seed_bits,
        truncated: config.truncated,
        log_n_over_eps_times_ell: (n / config.epsilon).log2() * config.ell as f64,
        log_n_over_eps: n.max(2.0).log2() / config.epsilon,
    }
}
