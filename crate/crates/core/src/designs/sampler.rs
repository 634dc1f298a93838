use serde::{Deserialize, Serialize};

use super::bits::SeedBits;
use super::field::{next_prime, MAX_MODULUS};
use super::kwise::KWiseFamily;
use super::quadrature::{gauss_hermite, Quadrature1D};
use crate::error::{param, Error, Result};
use crate::Scalar;

/// Extra bits per field element drawn from a bitstream, so that reducing a
/// `ceil(log2 q) + 16`-bit block mod `q` is within `2^-16` of uniform.
pub const BLOCK_SLACK_BITS: u32 = 16;

/// `n`-coordinate design: a `K`-wise independent family over `F_q` whose field
/// values are mapped onto quadrature atoms through integer thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignSampler<T> {
    quadrature: Quadrature1D<T>,
    family: KWiseFamily,
    thresholds: Vec<u64>,
    tv_bound: f64,
}

impl<T: Scalar> DesignSampler<T> {
    pub fn new(quadrature: Quadrature1D<T>, family: KWiseFamily) -> Result<Self> {
        let q = family.modulus();
        if (q as u128) < quadrature.len() as u128 {
            return Err(param("modulus must be at least the number of atoms"));
        }
        let weights: Vec<f64> = quadrature.weights().iter().map(|w| w.as_f64()).collect();
        let thresholds = cumulative_thresholds(&weights, q);
        let tv_bound = quadrature.len() as f64 / q as f64;
        Ok(Self {
            quadrature,
            family,
            thresholds,
            tv_bound,
        })
    }

    pub fn quadrature(&self) -> &Quadrature1D<T> {
        &self.quadrature
    }

    pub fn family(&self) -> &KWiseFamily {
        &self.family
    }

    pub fn modulus(&self) -> u64 {
        self.family.modulus()
    }

    pub fn independence(&self) -> usize {
        self.family.independence()
    }

    pub fn dim(&self) -> usize {
        self.family.len()
    }

    /// Cumulative cutoffs; atom `j` owns field values in `[t_{j-1}, t_j)`.
    pub fn thresholds(&self) -> &[u64] {
        &self.thresholds
    }

    /// Per-coordinate statistical distance bound `M / q`.
    pub fn tv_bound(&self) -> f64 {
        self.tv_bound
    }

    /// Exact statistical distance between the rounded atom law and the
    /// quadrature weights.
    pub fn exact_tv(&self) -> f64 {
        let q = self.modulus() as f64;
        let mut prev = 0;
        let mut l1 = 0.0;
        for (&t, w) in self.thresholds.iter().zip(self.quadrature.weights()) {
            l1 += ((t - prev) as f64 / q - w.as_f64()).abs();
            prev = t;
        }
        l1 / 2.0
    }

    /// Probability mass each atom receives under a uniform field value.
    pub fn atom_probabilities(&self) -> Vec<f64> {
        let q = self.modulus() as f64;
        let mut prev = 0;
        self.thresholds
            .iter()
            .map(|&t| {
                let p = (t - prev) as f64 / q;
                prev = t;
                p
            })
            .collect()
    }

    /// `ceil(log2 q)`.
    pub fn element_bits(&self) -> u32 {
        self.family.field().element_bits()
    }

    /// Entropy of one seed: `K * ceil(log2 q)`.
    pub fn seed_bits(&self) -> u64 {
        self.independence() as u64 * self.element_bits() as u64
    }

    /// Bitstream width of one field element: `ceil(log2 q) + 16`.
    pub fn block_bits(&self) -> u32 {
        self.element_bits() + BLOCK_SLACK_BITS
    }

    /// Bits consumed from a master bitstream per seed: `K * (ceil(log2 q) + 16)`.
    pub fn stream_bits(&self) -> u64 {
        self.independence() as u64 * self.block_bits() as u64
    }

    #[inline]
    pub fn atom_index(&self, value: u64) -> usize {
        self.thresholds.partition_point(|&t| t <= value)
    }

    pub fn sample(&self, seed: &[u64]) -> Result<Vec<T>> {
        self.family.check_seed(seed)?;
        let mut out = vec![T::zero(); self.dim()];
        self.sample_into(seed, &mut out);
        Ok(out)
    }

    /// Writes one design vector; `seed` must already be validated.
    #[inline]
    pub fn sample_into(&self, seed: &[u64], out: &mut [T]) {
        let nodes = self.quadrature.nodes();
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = nodes[self.atom_index(self.family.eval_unchecked(seed, i))];
        }
    }

    /// Decodes `K` field elements from consecutive blocks starting at `offset`.
    pub fn seed_from_bits(&self, bits: &SeedBits, offset: u64, seed: &mut Vec<u64>) -> Result<()> {
        let needed = offset + self.stream_bits();
        if needed > bits.len_bits() {
            return Err(Error::InsufficientSeedBits {
                needed,
                available: bits.len_bits(),
            });
        }
        self.seed_from_bits_unchecked(bits, offset, seed);
        Ok(())
    }

    #[inline]
    pub(crate) fn seed_from_bits_unchecked(
        &self,
        bits: &SeedBits,
        offset: u64,
        seed: &mut Vec<u64>,
    ) {
        let width = self.block_bits();
        let field = self.family.field();
        seed.clear();
        seed.extend(
            (0..self.independence() as u64)
                .map(|t| field.reduce_wide(bits.read_unchecked(offset + t * width as u64, width))),
        );
    }

    pub fn description(&self) -> SamplerDescription {
        SamplerDescription {
            q: self.modulus(),
            k: self.independence(),
            n: self.dim(),
            nodes: self.quadrature.nodes().iter().map(|x| x.as_f64()).collect(),
            weights: self
                .quadrature
                .weights()
                .iter()
                .map(|x| x.as_f64())
                .collect(),
            thresholds: self.thresholds.clone(),
            tv_bound: self.tv_bound,
            seed_bits: self.seed_bits(),
            stream_bits: self.stream_bits(),
        }
    }
}

/// JSON form of a sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerDescription {
    pub q: u64,
    pub k: usize,
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub thresholds: Vec<u64>,
    pub tv_bound: f64,
    pub seed_bits: u64,
    pub stream_bits: u64,
}

impl SamplerDescription {
    /// Rebuilds the sampler, checking that the stored thresholds and bit counts
    /// agree with what the nodes, weights and modulus imply.
    pub fn to_sampler<T: Scalar>(&self) -> Result<DesignSampler<T>> {
        if self.nodes.len() != self.weights.len() || self.nodes.is_empty() {
            return Err(param(
                "sampler description needs matching nonempty nodes and weights",
            ));
        }
        let quadrature = Quadrature1D::from_parts(
            self.nodes.iter().map(|&x| T::of(x)).collect(),
            self.weights.iter().map(|&w| T::of(w)).collect(),
        );
        let sampler = DesignSampler::new(quadrature, KWiseFamily::new(self.q, self.k, self.n)?)?;
        if sampler.thresholds != self.thresholds
            || sampler.seed_bits() != self.seed_bits
            || sampler.stream_bits() != self.stream_bits
        {
            return Err(param("sampler description is internally inconsistent"));
        }
        Ok(sampler)
    }
}

/// Sizes `q` from the statistical-distance budget and builds the sampler over
/// an `m`-point Gauss-Hermite rule.
pub fn build_sampler<T: Scalar>(
    m: usize,
    k: usize,
    n: usize,
    tv_budget: f64,
) -> Result<DesignSampler<T>> {
    if tv_budget.is_nan() || tv_budget <= 0.0 || !tv_budget.is_finite() {
        return Err(param(format!(
            "tv budget must be positive, got {tv_budget}"
        )));
    }
    let quadrature = gauss_hermite::<T>(m)?;
    let from_budget = (m as f64 / tv_budget).ceil();
    if from_budget >= MAX_MODULUS as f64 {
        return Err(param(format!(
            "tv budget {tv_budget} needs a modulus above 2^62"
        )));
    }
    let floor = (n as u64 + 1).max(from_budget as u64);
    let q =
        next_prime(floor).ok_or_else(|| param("no prime modulus below 2^62 fits the budget"))?;
    DesignSampler::new(quadrature, KWiseFamily::new(q, k, n)?)
}

/// `t_j = floor(q * (w_0 + ... + w_j))`, with the last cutoff pinned to `q`.
///
/// Each cutoff is within one unit of the exact cumulative weight, so every atom
/// mass is off by less than `1/q`. Atoms lighter than `1/q` may get no field
/// values at all.
pub(crate) fn cumulative_thresholds(weights: &[f64], q: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(weights.len());
    let mut cum = 0.0f64;
    let mut prev = 0u64;
    for (j, &w) in weights.iter().enumerate() {
        cum += w;
        let t = if j + 1 == weights.len() {
            q
        } else {
            floor_scaled(cum.clamp(0.0, 1.0), q).max(prev)
        };
        out.push(t);
        prev = t;
    }
    out
}

/// Exact `floor(c * q)` for `c` in `[0, 1]`.
fn floor_scaled(c: f64, q: u64) -> u64 {
    use num_traits::Float;
    if c >= 1.0 {
        return q;
    }
    if c <= 0.0 {
        return 0;
    }
    let (mantissa, exponent, _) = c.integer_decode();
    let product = mantissa as u128 * q as u128;
    if exponent >= 0 {
        (product << exponent) as u64
    } else {
        let shift = (-exponent) as u32;
        if shift >= 128 {
            0
        } else {
            (product >> shift) as u64
        }
    }
}
