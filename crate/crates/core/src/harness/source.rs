use rand::Rng;
use rand_distr::StandardNormal;

use crate::designs::{DesignSampler, SeedBits};
use crate::error::Result;
use crate::generator::{hybrid_weights, Generator, GeneratorConfig, HybridWeights, Scratch};
use crate::rng::StreamKey;

/// Index-addressed stream of points in `R^dim`: sample `i` depends only on the
/// source and `i`, never on how the index range is split between workers.
pub trait PointSource: Sync {
    fn dim(&self) -> usize;

    fn id(&self) -> String;

    /// Calls `visit` for samples `start..start + count` in index order.
    fn for_each(&self, start: u64, count: u64, visit: &mut dyn FnMut(&[f64]));
}

/// Standard Gaussian vectors from a ChaCha8 stream per sample index. Stands in
/// for the ideal Gaussian in every comparison.
#[derive(Clone, Debug)]
pub struct GaussianSource {
    dim: usize,
    key: StreamKey,
}

impl GaussianSource {
    pub fn new(dim: usize, key: StreamKey) -> Self {
        Self { dim, key }
    }

    pub fn fill(&self, index: u64, out: &mut [f64]) {
        let mut rng = self.key.stream(index);
        out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
    }
}

impl PointSource for GaussianSource {
    fn dim(&self) -> usize {
        self.dim
    }

    fn id(&self) -> String {
        "gaussian".into()
    }

    fn for_each(&self, start: u64, count: u64, visit: &mut dyn FnMut(&[f64])) {
        let mut x = vec![0.0; self.dim];
        for i in start..start + count {
            self.fill(i, &mut x);
            visit(&x);
        }
    }
}

/// The blended-design generator driven by uniformly random master seeds.
#[derive(Clone, Debug)]
pub struct PrgSource {
    generator: Generator,
    key: StreamKey,
}

impl PrgSource {
    pub fn new(config: &GeneratorConfig, key: StreamKey) -> Result<Self> {
        Ok(Self {
            generator: Generator::new(config)?,
            key,
        })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }
}

impl PointSource for PrgSource {
    fn dim(&self) -> usize {
        self.generator.dim()
    }

    fn id(&self) -> String {
        let c = self.generator.config();
        format!(
            "prg(eps={} k={} d={} ell={}{})",
            c.epsilon,
            c.k,
            c.d,
            c.ell,
            if c.truncated { " truncated" } else { "" }
        )
    }

    fn for_each(&self, start: u64, count: u64, visit: &mut dyn FnMut(&[f64])) {
        let mut y = vec![0.0; self.dim()];
        let mut scratch = Scratch::default();
        for i in start..start + count {
            self.generator
                .sample_indexed(&self.key, i, &mut y, &mut scratch);
            visit(&y);
        }
    }
}

/// `sum_i eps r^{i-1} Y_i + r^l X`: `l` designs from the configuration's
/// sampler plus one experiment-grade Gaussian draw that is not charged to the seed.
#[derive(Clone, Debug)]
pub struct HybridSource {
    sampler: DesignSampler<f64>,
    ell: usize,
    weights: HybridWeights<f64>,
    epsilon: f64,
    key: StreamKey,
    gaussian: GaussianSource,
}

impl HybridSource {
    pub fn new(config: &GeneratorConfig, epsilon: f64, ell: usize, key: StreamKey) -> Result<Self> {
        let sampler = config.sampler()?;
        let gaussian = GaussianSource::new(sampler.dim(), key.derive(2));
        Ok(Self {
            weights: hybrid_weights(epsilon, ell)?,
            sampler,
            ell,
            epsilon,
            key,
            gaussian,
        })
    }
}

impl PointSource for HybridSource {
    fn dim(&self) -> usize {
        self.sampler.dim()
    }

    fn id(&self) -> String {
        format!("hybrid(eps={} ell={})", self.epsilon, self.ell)
    }

    fn for_each(&self, start: u64, count: u64, visit: &mut dyn FnMut(&[f64])) {
        use rand::RngCore;
        let n = self.dim();
        let stride = self.sampler.stream_bits();
        let mut bits = SeedBits::default();
        bits.bytes_mut()
            .resize((stride * self.ell as u64).div_ceil(8) as usize, 0);
        let mut seed = Vec::new();
        let mut y = vec![0.0; n];
        let mut out = vec![0.0; n];
        for i in start..start + count {
            self.gaussian.fill(i, &mut out);
            out.iter_mut().for_each(|v| *v *= self.weights.gaussian);
            self.key.stream(i).fill_bytes(bits.bytes_mut());
            for (j, &w) in self.weights.design.iter().enumerate() {
                self.sampler
                    .seed_from_bits(&bits, j as u64 * stride, &mut seed)
                    .expect("buffer sized for all designs");
                self.sampler.sample_into(&seed, &mut y);
                out.iter_mut().zip(&y).for_each(|(o, &v)| *o += w * v);
            }
            visit(&out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::PlanRequest;

    fn collect(src: &dyn PointSource, start: u64, count: u64) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        src.for_each(start, count, &mut |x| out.push(x.to_vec()));
        out
    }

    #[test]
    fn samples_depend_only_on_index() {
        let g = GaussianSource::new(3, StreamKey::from_u64(1));
        let whole = collect(&g, 0, 10);
        let tail = collect(&g, 6, 4);
        assert_eq!(&whole[6..], &tail[..]);
    }

    #[test]
    fn prg_source_matches_generator() {
        let cfg = PlanRequest {
            n: 2,
            d: 1,
            k: 1,
            epsilon: 0.5,
            ell_cap: None,
            design_order: Some(6),
        }
        .plan()
        .unwrap();
        let key = StreamKey::from_u64(4);
        let src = PrgSource::new(&cfg, key).unwrap();
        let got = collect(&src, 5, 1);
        let g = src.generator();
        assert_eq!(got[0], g.sample(&g.master_seed(&key, 5)).unwrap());
    }

    #[test]
    fn hybrid_with_no_designs_is_gaussian() {
        let cfg = PlanRequest {
            n: 2,
            d: 1,
            k: 1,
            epsilon: 0.5,
            ell_cap: None,
            design_order: Some(4),
        }
        .plan()
        .unwrap();
        let key = StreamKey::from_u64(9);
        let h = HybridSource::new(&cfg, 0.3, 0, key).unwrap();
        let g = GaussianSource::new(2, key.derive(2));
        assert_eq!(collect(&h, 0, 5), collect(&g, 0, 5));
    }
}
