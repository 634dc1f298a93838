use serde::{Deserialize, Serialize};

use super::source::PointSource;
use crate::error::{param, Error, Result};
use crate::parallel::{chunks, map_units, UNIT_SIZE};
use crate::ptf::{halfspace_expectation, Ptf};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// How `E[f(X)]` under the ideal Gaussian is obtained.
#[derive(Clone, Copy)]
pub enum Baseline<'a> {
    /// Closed form, available for halfspaces only.
    Analytic,
    MonteCarlo {
        samples: u64,
        source: &'a dyn PointSource,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub ptf_id: String,
    pub generator_id: String,
    pub n_samples_gen: u64,
    /// Zero for an analytic baseline.
    pub n_samples_baseline: u64,
    pub e_gen: f64,
    pub e_baseline: f64,
    pub gap: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
}

/// Sum of `f(x)` for each PTF over samples `0..n` of `source`, reduced in a
/// fixed unit order so the totals do not depend on `jobs`.
pub fn sign_sums(
    ptfs: &[Ptf<f64>],
    source: &dyn PointSource,
    n: u64,
    jobs: usize,
) -> Result<Vec<i64>> {
    for f in ptfs {
        if f.num_vars() != source.dim() {
            return Err(Error::DimensionMismatch {
                expected: source.dim(),
                got: f.num_vars(),
            });
        }
    }
    let units = chunks(n, UNIT_SIZE);
    let partial = map_units(jobs, units.len(), |u| {
        let (start, len) = units[u];
        let mut sums = vec![0i64; ptfs.len()];
        source.for_each(start, len, &mut |x| {
            for (s, f) in sums.iter_mut().zip(ptfs) {
                *s += f.eval_unchecked(x) as i64;
            }
        });
        sums
    });
    let mut total = vec![0i64; ptfs.len()];
    for p in partial {
        total.iter_mut().zip(p).for_each(|(t, v)| *t += v);
    }
    Ok(total)
}

/// Variance of the mean of `n` signs whose sum is `s`.
fn sign_mean_var(s: i64, n: u64) -> f64 {
    let m = s as f64 / n as f64;
    let var = (1.0 - m * m).max(0.0);
    if n > 1 {
        var * n as f64 / (n as f64 - 1.0) / n as f64
    } else {
        var
    }
}

/// Estimates `E[f(Y)] - E[f(X)]` for every PTF from one shared sample stream.
///
/// Each PTF is evaluated on the same generator samples; the baseline
/// stream is likewise shared. The CI uses the pooled standard error of the two
/// independent means.
pub fn estimate_gaps(
    ptfs: &[(String, Ptf<f64>)],
    source: &dyn PointSource,
    n_gen: u64,
    baseline: Baseline<'_>,
    jobs: usize,
) -> Result<Vec<GapEstimate>> {
    if n_gen == 0 {
        return Err(param("need at least one generator sample"));
    }
    let fs: Vec<Ptf<f64>> = ptfs.iter().map(|(_, f)| f.clone()).collect();
    let gen_sums = sign_sums(&fs, source, n_gen, jobs)?;

    let (base, n_base): (Vec<(f64, f64)>, u64) = match baseline {
        Baseline::Analytic => {
            let vals = fs
                .iter()
                .map(|f| {
                    let (w, theta) = f
                        .as_halfspace()
                        .ok_or(Error::AnalyticBaseline(f.degree()))?;
                    Ok((halfspace_expectation(&w, theta)?, 0.0))
                })
                .collect::<Result<Vec<_>>>()?;
            (vals, 0)
        }
        Baseline::MonteCarlo {
            samples,
            source: base_src,
        } => {
            if samples == 0 {
                return Err(param("need at least one baseline sample"));
            }
            let sums = sign_sums(&fs, base_src, samples, jobs)?;
            let vals = sums
                .iter()
                .map(|&s| (s as f64 / samples as f64, sign_mean_var(s, samples)))
                .collect();
            (vals, samples)
        }
    };

    let generator_id = source.id();
    Ok(ptfs
        .iter()
        .zip(gen_sums)
        .zip(base)
        .map(|(((id, _), s), (e_base, var_base))| {
            let e_gen = s as f64 / n_gen as f64;
            let stderr = (sign_mean_var(s, n_gen) + var_base).sqrt();
            let gap = e_gen - e_base;
            GapEstimate {
                ptf_id: id.clone(),
                generator_id: generator_id.clone(),
                n_samples_gen: n_gen,
                n_samples_baseline: n_base,
                e_gen,
                e_baseline: e_base,
                gap,
                stderr,
                ci95: (gap - Z95 * stderr, gap + Z95 * stderr),
            }
        })
        .collect())
}

pub fn estimate_gap(
    f: &Ptf<f64>,
    source: &dyn PointSource,
    n_gen: u64,
    baseline: Baseline<'_>,
    jobs: usize,
) -> Result<GapEstimate> {
    let mut v = estimate_gaps(&[("f".into(), f.clone())], source, n_gen, baseline, jobs)?;
    Ok(v.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::GaussianSource;
    use crate::hermite::SparsePolynomial;
    use crate::rng::StreamKey;

    fn halfspace(w: &[f64], theta: f64) -> Ptf<f64> {
        let n = w.len();
        let mut terms: Vec<(Vec<u32>, f64)> = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                (e, w[i])
            })
            .collect();
        terms.push((vec![0; n], -theta));
        Ptf::new(SparsePolynomial::from_terms(n, terms).unwrap())
    }

    #[test]
    fn gaussian_source_has_no_gap() {
        let src = GaussianSource::new(2, StreamKey::from_u64(3));
        let f = halfspace(&[0.6, 0.8], 0.3);
        let g = estimate_gap(&f, &src, 50_000, Baseline::Analytic, 1).unwrap();
        assert!(g.gap.abs() <= 4.0 * g.stderr, "{g:?}");
        assert_eq!(g.n_samples_baseline, 0);
    }

    #[test]
    fn analytic_baseline_rejects_higher_degree() {
        let src = GaussianSource::new(1, StreamKey::from_u64(3));
        let f =
            Ptf::new(SparsePolynomial::from_terms(1, [(vec![2], 1.0), (vec![0], -1.0)]).unwrap());
        assert!(matches!(
            estimate_gap(&f, &src, 10, Baseline::Analytic, 1),
            Err(Error::AnalyticBaseline(2))
        ));
    }

    #[test]
    fn constant_ptf_has_zero_variance() {
        let src = GaussianSource::new(1, StreamKey::from_u64(3));
        let base = GaussianSource::new(1, StreamKey::from_u64(4));
        let f = Ptf::new(SparsePolynomial::constant(1, 1.0));
        let g = estimate_gap(
            &f,
            &src,
            100,
            Baseline::MonteCarlo {
                samples: 100,
                source: &base,
            },
            1,
        )
        .unwrap();
        assert_eq!(
            (g.e_gen, g.e_baseline, g.gap, g.stderr),
            (1.0, 1.0, 0.0, 0.0)
        );
    }

    #[test]
    fn sums_are_independent_of_jobs() {
        let src = GaussianSource::new(2, StreamKey::from_u64(8));
        let fs = [halfspace(&[1.0, 0.0], 0.1), halfspace(&[0.0, 1.0], -0.4)];
        let a = sign_sums(&fs, &src, 3 * UNIT_SIZE + 17, 1).unwrap();
        let b = sign_sums(&fs, &src, 3 * UNIT_SIZE + 17, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch() {
        let src = GaussianSource::new(3, StreamKey::from_u64(8));
        assert!(sign_sums(&[halfspace(&[1.0], 0.0)], &src, 5, 1).is_err());
    }
}
