use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampler::DesignSampler;
use crate::error::{param, Error, Result};
use crate::hermite::gaussian_moment;
use crate::parallel::{chunks, map_units, UNIT_SIZE};
use crate::rng::StreamKey;
use crate::Scalar;

/// Largest seed space `verify_moments` will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

/// Coordinates used for cross moments.
const CROSS_COORDS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum MomentMode {
    Exhaustive,
    MonteCarlo { samples: u64, seed: u64 },
}

/// One moment `E[prod_c Y_c^{o_c}]` compared with its Gaussian value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub coords: Vec<usize>,
    pub orders: Vec<u32>,
    pub value: f64,
    pub target: f64,
    /// Allowed deviation: the statistical-distance term plus, for Monte Carlo,
    /// four standard errors.
    pub bound: f64,
    pub stderr: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mode: MomentMode,
    pub seeds: u128,
    pub checks: Vec<MomentCheck>,
}

impl MomentReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct Target {
    coords: Vec<usize>,
    orders: Vec<u32>,
}

impl Target {
    fn eval<T: Scalar>(&self, y: &[T]) -> f64 {
        self.coords
            .iter()
            .zip(&self.orders)
            .map(|(&c, &o)| y[c].as_f64().powi(o as i32))
            .product()
    }

    fn gaussian(&self) -> f64 {
        self.orders
            .iter()
            .map(|&o| gaussian_moment::<f64>(o))
            .product()
    }

    /// Oscillation of the monomial over the atom grid times the statistical
    /// distance of the joint law of the coordinates involved.
    fn tv_term(&self, max_node: f64, tv_bound: f64) -> f64 {
        let total: u32 = self.orders.iter().sum();
        let top = max_node.powi(total as i32);
        let range = if self.orders.iter().any(|o| o % 2 == 1) {
            2.0 * top
        } else {
            top
        };
        // the rounded law is within tv_bound / 2 of the atom law per coordinate
        self.coords.len() as f64 * tv_bound / 2.0 * range + 1e-9 * top.max(1.0)
    }
}

fn targets(n: usize, independence: usize, max_order: u32) -> Vec<Target> {
    let mut out = Vec::new();
    for c in 0..n {
        for o in 1..=max_order {
            out.push(Target {
                coords: vec![c],
                orders: vec![o],
            });
        }
    }
    if independence >= 2 {
        let m = n.min(CROSS_COORDS);
        for a in 0..m {
            for b in a + 1..m {
                out.push(Target {
                    coords: vec![a, b],
                    orders: vec![1, 1],
                });
                if max_order >= 4 {
                    out.push(Target {
                        coords: vec![a, b],
                        orders: vec![2, 2],
                    });
                }
            }
        }
    }
    out
}

/// Per-coordinate moments up to `max_order` and pairwise cross moments of a
/// design, against standard Gaussian targets.
///
/// Exhaustive mode enumerates every seed and keeps integer tallies of atom
/// hits, so its result does not depend on `jobs`.
pub fn verify_moments<T: Scalar>(
    sampler: &DesignSampler<T>,
    max_order: u32,
    mode: MomentMode,
    jobs: usize,
) -> Result<MomentReport> {
    let design_order = sampler.quadrature().order() as u32;
    if max_order == 0 || max_order > design_order {
        return Err(param(format!(
            "moment order must be in 1..={design_order}, got {max_order}"
        )));
    }
    let targets = targets(sampler.dim(), sampler.independence(), max_order);
    let max_node = sampler.quadrature().max_abs_node().as_f64();
    let tv = sampler.tv_bound();

    match mode {
        MomentMode::Exhaustive => {
            let q = sampler.modulus() as u128;
            let size = q
                .checked_pow(sampler.independence() as u32)
                .unwrap_or(u128::MAX);
            if size > EXHAUSTIVE_LIMIT {
                return Err(Error::SeedSpaceTooLarge {
                    size,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let tallies = exhaustive_tallies(sampler, &targets, jobs);
            let nodes: Vec<f64> = sampler
                .quadrature()
                .nodes()
                .iter()
                .map(|x| x.as_f64())
                .collect();
            let checks = targets
                .iter()
                .zip(&tallies)
                .map(|(t, counts)| {
                    let value = tally_moment(t, counts, &nodes) / size as f64;
                    let target = t.gaussian();
                    let bound = t.tv_term(max_node, tv);
                    MomentCheck {
                        coords: t.coords.clone(),
                        orders: t.orders.clone(),
                        value,
                        target,
                        bound,
                        stderr: None,
                        pass: (value - target).abs() <= bound,
                    }
                })
                .collect();
            Ok(MomentReport {
                mode,
                seeds: size,
                checks,
            })
        }
        MomentMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(param("Monte Carlo moment check needs at least 2 samples"));
            }
            let key = StreamKey::from_u64(seed);
            let units = chunks(samples, UNIT_SIZE);
            let partial = map_units(jobs, units.len(), |u| {
                let (start, len) = units[u];
                let mut rng = key.stream(start / UNIT_SIZE);
                let mut sums = vec![(0.0f64, 0.0f64); targets.len()];
                let mut seed_buf = vec![0u64; sampler.independence()];
                let mut y = vec![T::zero(); sampler.dim()];
                for _ in 0..len {
                    seed_buf
                        .iter_mut()
                        .for_each(|s| *s = rng.random_range(0..sampler.modulus()));
                    sampler.sample_into(&seed_buf, &mut y);
                    for (acc, t) in sums.iter_mut().zip(&targets) {
                        let v = t.eval(&y);
                        acc.0 += v;
                        acc.1 += v * v;
                    }
                }
                sums
            });
            let n = samples as f64;
            let checks = targets
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let (s, s2) = partial
                        .iter()
                        .fold((0.0, 0.0), |acc, p| (acc.0 + p[i].0, acc.1 + p[i].1));
                    let value = s / n;
                    let var = ((s2 / n - value * value) * n / (n - 1.0)).max(0.0);
                    let stderr = (var / n).sqrt();
                    let target = t.gaussian();
                    let bound = 4.0 * stderr + t.tv_term(max_node, tv);
                    MomentCheck {
                        coords: t.coords.clone(),
                        orders: t.orders.clone(),
                        value,
                        target,
                        bound,
                        stderr: Some(stderr),
                        pass: (value - target).abs() <= bound,
                    }
                })
                .collect();
            Ok(MomentReport {
                mode,
                seeds: samples as u128,
                checks,
            })
        }
    }
}

/// Atom-hit counts per target: one counter per atom for single-coordinate
/// targets, one per atom pair for cross targets.
fn exhaustive_tallies<T: Scalar>(
    sampler: &DesignSampler<T>,
    targets: &[Target],
    jobs: usize,
) -> Vec<Vec<u64>> {
    let q = sampler.modulus();
    let k = sampler.independence();
    let atoms = sampler.quadrature().len();
    let width = |t: &Target| atoms.pow(t.coords.len() as u32);

    // one unit per value of the leading seed coefficient
    let partial = map_units(jobs, q as usize, |lead| {
        let mut counts: Vec<Vec<u64>> = targets.iter().map(|t| vec![0u64; width(t)]).collect();
        let mut seed = vec![0u64; k];
        seed[0] = lead as u64;
        let mut atom_of = vec![0usize; sampler.dim()];
        loop {
            for (i, slot) in atom_of.iter_mut().enumerate() {
                *slot = sampler.atom_index(sampler.family().eval_unchecked(&seed, i));
            }
            for (c, t) in counts.iter_mut().zip(targets) {
                let idx = t
                    .coords
                    .iter()
                    .fold(0, |acc, &coord| acc * atoms + atom_of[coord]);
                c[idx] += 1;
            }
            // odometer over seed[1..]
            let mut pos = 1;
            while pos < k {
                seed[pos] += 1;
                if seed[pos] < q {
                    break;
                }
                seed[pos] = 0;
                pos += 1;
            }
            if pos >= k {
                break;
            }
        }
        counts
    });

    let mut total: Vec<Vec<u64>> = targets.iter().map(|t| vec![0u64; width(t)]).collect();
    for unit in partial {
        for (acc, c) in total.iter_mut().zip(unit) {
            acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        }
    }
    total
}

fn tally_moment(t: &Target, counts: &[u64], nodes: &[f64]) -> f64 {
    let atoms = nodes.len();
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(mut idx, &c)| {
            let mut v = c as f64;
            for &o in t.orders.iter().rev() {
                v *= nodes[idx % atoms].powi(o as i32);
                idx /= atoms;
            }
            v
        })
        .sum()
}
