use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::source::GaussianSource;
use crate::error::{param, Result};
use crate::hermite::{derivative_moment_rhs, l2_norm, SparsePolynomial};
use crate::parallel::{chunks, map_units, UNIT_SIZE};
use crate::rng::StreamKey;

/// A polynomial with a display id, as used by the checks below.
pub type NamedPoly = (String, SparsePolynomial<f64>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CwRow {
    pub poly_id: String,
    pub degree: u32,
    pub epsilon: f64,
    pub n_samples: u64,
    pub hits: u64,
    /// Empirical `P(|p(X)| <= epsilon)`.
    pub empirical: f64,
    /// `d epsilon^{1/d}`.
    pub reference: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub poly_id: String,
    pub degree: u32,
    pub threshold: f64,
    pub n_samples: u64,
    pub hits: u64,
    /// Empirical `P(|p(X)| > N)`.
    pub empirical: f64,
    /// `C 2^{-(N/2)^{2/d}}`.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivRow {
    pub poly_id: String,
    pub ell: u32,
    pub n_samples: u64,
    /// Monte Carlo mean of the squared `ell`-fold directional derivative.
    pub lhs: f64,
    pub stderr: f64,
    /// The Hermite-side value `sum_k k!/(k-ell)! |p^{[k]}|^2`.
    pub rhs: f64,
    pub rel_error: f64,
    pub pass: bool,
}

/// Scales each polynomial to unit Gaussian norm and checks it is nonconstant.
fn normalized(polys: &[NamedPoly]) -> Result<Vec<SparsePolynomial<f64>>> {
    polys
        .iter()
        .map(|(id, p)| {
            if p.degree() == 0 {
                return Err(param(format!("polynomial {id} is constant")));
            }
            Ok(p.scale(1.0 / l2_norm(p)?))
        })
        .collect()
}

/// For each polynomial and threshold, counts samples with `|p(X)| <= t`
/// (`below`) or `|p(X)| > t` (otherwise).
fn count_abs(
    polys: &[SparsePolynomial<f64>],
    thresholds: &[f64],
    below: bool,
    n_samples: u64,
    key: StreamKey,
    jobs: usize,
) -> Result<Vec<Vec<u64>>> {
    let dim = polys[0].num_vars();
    if polys.iter().any(|p| p.num_vars() != dim) {
        return Err(param(
            "all polynomials in one check must share the variable count",
        ));
    }
    let src = GaussianSource::new(dim, key);
    let units = chunks(n_samples, UNIT_SIZE);
    let partial = map_units(jobs, units.len(), |u| {
        let (start, len) = units[u];
        let mut counts = vec![vec![0u64; thresholds.len()]; polys.len()];
        let mut x = vec![0.0; dim];
        for i in start..start + len {
            src.fill(i, &mut x);
            for (c, p) in counts.iter_mut().zip(polys) {
                let v = p.eval_unchecked(&x).abs();
                for (slot, &t) in c.iter_mut().zip(thresholds) {
                    if (below && v <= t) || (!below && v > t) {
                        *slot += 1;
                    }
                }
            }
        }
        counts
    });
    let mut total = vec![vec![0u64; thresholds.len()]; polys.len()];
    for p in partial {
        for (t, c) in total.iter_mut().zip(p) {
            t.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        }
    }
    Ok(total)
}

fn check_inputs(polys: &[NamedPoly], values: &[f64], n_samples: u64) -> Result<()> {
    if n_samples == 0 {
        return Err(param("need at least one sample"));
    }
    if polys.is_empty() || values.is_empty() {
        return Err(param("need at least one polynomial and one threshold"));
    }
    Ok(())
}

/// Small-ball probabilities `P(|p(X)| <= eps)` of unit-norm polynomials,
/// flagged when they exceed `constant * d * eps^{1/d}`.
pub fn check_carbery_wright(
    polys: &[NamedPoly],
    epsilons: &[f64],
    n_samples: u64,
    constant: f64,
    key: StreamKey,
    jobs: usize,
) -> Result<Vec<CwRow>> {
    check_inputs(polys, epsilons, n_samples)?;
    if epsilons.iter().any(|&e| e.is_nan() || e < 0.0) {
        return Err(param("small-ball radii must be nonnegative"));
    }
    let unit = normalized(polys)?;
    let counts = count_abs(&unit, epsilons, true, n_samples, key, jobs)?;
    let mut rows = Vec::new();
    for ((id, p), c) in polys.iter().zip(&counts) {
        let d = p.degree();
        for (&eps, &hits) in epsilons.iter().zip(c) {
            let empirical = hits as f64 / n_samples as f64;
            let reference = d as f64 * eps.powf(1.0 / d as f64);
            let bound = constant * reference;
            rows.push(CwRow {
                poly_id: id.clone(),
                degree: d,
                epsilon: eps,
                n_samples,
                hits,
                empirical,
                reference,
                ratio: if hits == 0 {
                    0.0
                } else {
                    empirical / reference
                },
                bound,
                pass: empirical <= bound,
            });
        }
    }
    Ok(rows)
}

/// Tail probabilities `P(|p(X)| > N)` of unit-norm polynomials against
/// `constant * 2^{-(N/2)^{2/d}}`.
pub fn check_tail_bound(
    polys: &[NamedPoly],
    thresholds: &[f64],
    n_samples: u64,
    constant: f64,
    key: StreamKey,
    jobs: usize,
) -> Result<Vec<TailRow>> {
    check_inputs(polys, thresholds, n_samples)?;
    if thresholds.iter().any(|&t| t.is_nan() || t < 0.0) {
        return Err(param("tail thresholds must be nonnegative"));
    }
    let unit = normalized(polys)?;
    let counts = count_abs(&unit, thresholds, false, n_samples, key, jobs)?;
    let mut rows = Vec::new();
    for ((id, p), c) in polys.iter().zip(&counts) {
        let d = p.degree();
        for (&t, &hits) in thresholds.iter().zip(c) {
            let empirical = hits as f64 / n_samples as f64;
            let bound = constant * 2f64.powf(-(t / 2.0).powf(2.0 / d as f64));
            rows.push(TailRow {
                poly_id: id.clone(),
                degree: d,
                threshold: t,
                n_samples,
                hits,
                empirical,
                bound,
                pass: empirical <= bound,
            });
        }
    }
    Ok(rows)
}

/// All `ell`-th order partial derivatives of `p`, keyed by the sorted index
/// multiset since partial derivatives commute.
struct DerivativeTable {
    n: usize,
    ell: u32,
    by_multiset: BTreeMap<Vec<usize>, SparsePolynomial<f64>>,
}

impl DerivativeTable {
    fn new(p: &SparsePolynomial<f64>, ell: u32) -> Result<Self> {
        let n = p.num_vars();
        let mut by_multiset = BTreeMap::new();
        by_multiset.insert(Vec::new(), p.clone());
        for _ in 0..ell {
            let mut next = BTreeMap::new();
            for (idx, q) in &by_multiset {
                let lo = idx.last().copied().unwrap_or(0);
                for i in lo..n {
                    let mut key = idx.clone();
                    key.push(i);
                    next.insert(key, q.partial_derivative(i)?);
                }
            }
            by_multiset = next;
        }
        Ok(Self {
            n,
            ell,
            by_multiset,
        })
    }

    /// `D_{u_1} ... D_{u_ell} p (x)` with the directions packed after `x` in `v`.
    fn directional(&self, v: &[f64]) -> f64 {
        let (x, dirs) = v.split_at(self.n);
        let mut total = 0.0;
        for (idx, q) in &self.by_multiset {
            if q.is_zero() {
                continue;
            }
            let value = q.eval_unchecked(x);
            // sum over distinct orderings of the multiset
            total += value * permanent_sum(idx, dirs, self.n, self.ell as usize);
        }
        total
    }
}

/// `sum over distinct permutations s of idx of prod_j u_j[s_j]`.
fn permanent_sum(idx: &[usize], dirs: &[f64], n: usize, ell: usize) -> f64 {
    fn rec(pos: usize, remaining: &mut Vec<usize>, dirs: &[f64], n: usize, ell: usize) -> f64 {
        if pos == ell {
            return 1.0;
        }
        let mut total = 0.0;
        let mut last = usize::MAX;
        for j in 0..remaining.len() {
            let i = remaining[j];
            if i == last {
                continue;
            }
            last = i;
            remaining.remove(j);
            total += dirs[pos * n + i] * rec(pos + 1, remaining, dirs, n, ell);
            remaining.insert(j, i);
        }
        total
    }
    rec(0, &mut idx.to_vec(), dirs, n, ell)
}

/// Compares the Monte Carlo mean of `(D_{U_1}...D_{U_ell} p(X))^2` over
/// independent Gaussian `X, U_1, ..., U_ell` with its Hermite-side value.
pub fn check_derivative_identity(
    polys: &[NamedPoly],
    ells: &[u32],
    n_samples: u64,
    tolerance: f64,
    key: StreamKey,
    jobs: usize,
) -> Result<Vec<DerivRow>> {
    if n_samples < 2 {
        return Err(param("need at least 2 samples"));
    }
    if polys.is_empty() || ells.is_empty() {
        return Ok(Vec::new());
    }
    let n = polys[0].1.num_vars();
    if polys.iter().any(|(_, p)| p.num_vars() != n) {
        return Err(param(
            "all polynomials in one check must share the variable count",
        ));
    }
    let max_ell = *ells.iter().max().unwrap() as usize;
    let mut tables = Vec::new();
    for (_, p) in polys {
        for &l in ells {
            tables.push(DerivativeTable::new(p, l)?);
        }
    }
    let src = GaussianSource::new(n * (1 + max_ell), key);
    let units = chunks(n_samples, UNIT_SIZE);
    let partial = map_units(jobs, units.len(), |u| {
        let (start, len) = units[u];
        let mut sums = vec![(0.0f64, 0.0f64); tables.len()];
        let mut v = vec![0.0; n * (1 + max_ell)];
        for i in start..start + len {
            src.fill(i, &mut v);
            for (acc, t) in sums.iter_mut().zip(&tables) {
                let d = t.directional(&v);
                let sq = d * d;
                acc.0 += sq;
                acc.1 += sq * sq;
            }
        }
        sums
    });

    let nf = n_samples as f64;
    let mut rows = Vec::new();
    for (t_idx, table) in tables.iter().enumerate() {
        let (id, p) = &polys[t_idx / ells.len()];
        let (s, s2) = partial
            .iter()
            .fold((0.0, 0.0), |a, u| (a.0 + u[t_idx].0, a.1 + u[t_idx].1));
        let lhs = s / nf;
        let var = ((s2 / nf - lhs * lhs) * nf / (nf - 1.0)).max(0.0);
        let rhs = derivative_moment_rhs(p, table.ell)?;
        let rel_error = if rhs == 0.0 {
            lhs.abs()
        } else {
            (lhs - rhs).abs() / rhs
        };
        rows.push(DerivRow {
            poly_id: id.clone(),
            ell: table.ell,
            n_samples,
            lhs,
            stderr: (var / nf).sqrt(),
            rhs,
            rel_error,
            pass: rel_error <= tolerance,
        });
    }
    Ok(rows)
}
