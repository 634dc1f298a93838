//! Polynomial threshold functions `f(x) = sgn(p(x))`, random test instances,
//! and the closed-form Gaussian expectation of a halfspace.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::hermite::{multi_indices, HermiteExpansion, PolynomialJson, SparsePolynomial};
use crate::Scalar;

/// `sgn(p(x))` with `sgn(0) = +1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ptf<T> {
    poly: SparsePolynomial<T>,
}

impl<T: Scalar> Ptf<T> {
    pub fn new(poly: SparsePolynomial<T>) -> Self {
        Self { poly }
    }

    pub fn poly(&self) -> &SparsePolynomial<T> {
        &self.poly
    }

    pub fn num_vars(&self) -> usize {
        self.poly.num_vars()
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    pub fn eval(&self, x: &[T]) -> Result<i8> {
        Ok(sign(self.poly.eval(x)?))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &[T]) -> i8 {
        sign(self.poly.eval_unchecked(x))
    }

    /// For a degree-1 function `sgn(w.x + c)`, returns `(w, theta)` with `theta = -c`.
    pub fn as_halfspace(&self) -> Option<(Vec<f64>, f64)> {
        if self.degree() > 1 {
            return None;
        }
        let n = self.num_vars();
        let mut w = vec![0.0; n];
        let mut theta = 0.0;
        for (e, c) in self.poly.terms() {
            match e.iter().position(|&k| k == 1) {
                Some(i) => w[i] = c.as_f64(),
                None => theta = -c.as_f64(),
            }
        }
        Some((w, theta))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut j = PolynomialJson::from_polynomial(&self.poly);
        j.kind = Some("ptf".into());
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: PolynomialJson = serde_json::from_str(s)?;
        match j.kind.as_deref() {
            Some("ptf") | None => Ok(Self::new(j.to_polynomial()?)),
            Some(other) => Err(param(format!("expected kind \"ptf\", got {other:?}"))),
        }
    }
}

#[inline]
fn sign<T: Scalar>(v: T) -> i8 {
    if v >= T::zero() {
        1
    } else {
        -1
    }
}

pub fn eval_ptf<T: Scalar>(f: &Ptf<T>, x: &[T]) -> Result<i8> {
    f.eval(x)
}

/// Random test instance: i.i.d. standard normal Hermite coefficients for every
/// `|a|_1 <= degree`, rescaled to unit Gaussian L2 norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomPolyConfig {
    pub num_vars: usize,
    pub degree: u32,
    pub rng_seed: u64,
}

pub fn random_unit_polynomial<T: Scalar>(config: &RandomPolyConfig) -> Result<SparsePolynomial<T>> {
    if config.num_vars == 0 || config.degree == 0 {
        return Err(param(
            "random polynomials need at least one variable and degree >= 1",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let index = multi_indices(config.num_vars, config.degree);
    let raw: Vec<f64> = index.iter().map(|_| rng.sample(StandardNormal)).collect();
    let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
    let coeffs = index
        .into_iter()
        .zip(raw)
        .map(|(a, c)| (a, T::of(c / norm)));
    HermiteExpansion::from_coeffs(config.num_vars, coeffs).to_polynomial()
}

pub fn random_ptf<T: Scalar>(config: &RandomPolyConfig) -> Result<Ptf<T>> {
    Ok(Ptf::new(random_unit_polynomial(config)?))
}

/// A polynomial with `terms` distinct random monomials of total degree at most
/// `degree` (one of them of degree exactly `degree`) and standard normal
/// coefficients. Not normalized.
pub fn random_sparse_polynomial(
    num_vars: usize,
    degree: u32,
    terms: usize,
    rng_seed: u64,
) -> Result<SparsePolynomial<f64>> {
    if num_vars == 0 || terms == 0 {
        return Err(param(
            "sparse polynomial needs variables and at least one term",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let all = multi_indices(num_vars, degree);
    let top: Vec<usize> = (0..all.len())
        .filter(|&i| all[i].iter().sum::<u32>() == degree)
        .collect();
    let mut chosen = vec![top[rng.random_range(0..top.len())]];
    while chosen.len() < terms.min(all.len()) {
        let i = rng.random_range(0..all.len());
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    chosen.sort_unstable();
    SparsePolynomial::from_terms(
        num_vars,
        chosen
            .into_iter()
            .map(|i| (all[i].clone(), rng.sample(StandardNormal))),
    )
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `E[sgn(w.X - theta)] = 1 - 2 Phi(theta / |w|_2)` for a standard Gaussian `X`.
pub fn halfspace_expectation(w: &[f64], theta: f64) -> Result<f64> {
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(param("halfspace weight vector must be nonzero and finite"));
    }
    if w.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    // 1 - 2 Phi(t) = Phi(-t) - Phi(t), computed via erfc to keep tail precision
    let t = theta / norm;
    Ok(normal_cdf(-t) - normal_cdf(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{l2_norm, to_hermite};
    use approx::assert_abs_diff_eq;

    fn linear(n: usize, i: usize) -> Ptf<f64> {
        Ptf::new(SparsePolynomial::var(n, i).unwrap())
    }

    #[test]
    fn evaluation_and_zero_convention() {
        assert_eq!(linear(1, 0).eval(&[2.0]).unwrap(), 1);
        assert_eq!(linear(1, 0).eval(&[0.0]).unwrap(), 1);
        let p = SparsePolynomial::from_terms(1, [(vec![2], 1.0), (vec![0], -1.0)]).unwrap();
        assert_eq!(eval_ptf(&Ptf::new(p), &[0.0]).unwrap(), -1);
        assert!(matches!(
            linear(2, 0).eval(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_instances() {
        let cfg = RandomPolyConfig {
            num_vars: 3,
            degree: 3,
            rng_seed: 11,
        };
        let a = random_ptf::<f64>(&cfg).unwrap();
        assert_eq!(a, random_ptf::<f64>(&cfg).unwrap());
        assert!(a.degree() <= 3);
        assert_abs_diff_eq!(l2_norm(a.poly()).unwrap(), 1.0, epsilon = 1e-9);
        let b = random_ptf::<f64>(&RandomPolyConfig {
            rng_seed: 12,
            ..cfg
        })
        .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn random_coefficients_are_isotropic() {
        let draws = 10_000;
        let dim = 6;
        let index = multi_indices(2, 2);
        let mut cov = vec![vec![0.0; dim]; dim];
        for seed in 0..draws {
            let p = random_unit_polynomial::<f64>(&RandomPolyConfig {
                num_vars: 2,
                degree: 2,
                rng_seed: seed,
            })
            .unwrap();
            let h = to_hermite(&p).unwrap();
            let c: Vec<f64> = index.iter().map(|a| h.coeff(a)).collect();
            for i in 0..dim {
                for j in 0..dim {
                    cov[i][j] += c[i] * c[j] / draws as f64;
                }
            }
        }
        // unit-norm vectors with isotropic law: E[c c^T] = I / dim
        let scale = 1.0 / dim as f64;
        for i in 0..dim {
            for j in 0..dim {
                let want = if i == j { scale } else { 0.0 };
                assert!(
                    (cov[i][j] - want).abs() <= 0.1 * scale,
                    "cov[{i}][{j}] = {}",
                    cov[i][j]
                );
            }
        }
    }

    #[test]
    fn halfspace_oracle() {
        assert_eq!(halfspace_expectation(&[1.0], 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            halfspace_expectation(&[1.0], 1.0).unwrap(),
            -0.682689492137086,
            epsilon = 1e-12
        );
        assert_eq!(
            halfspace_expectation(&[0.3, -0.4], 0.7).unwrap(),
            halfspace_expectation(&[0.6, -0.8], 1.4).unwrap()
        );
        assert!(halfspace_expectation(&[0.0, 0.0], 1.0).is_err());
        assert_abs_diff_eq!(normal_cdf(1.0), 0.8413447460685429, epsilon = 1e-15);
    }

    #[test]
    fn halfspace_extraction() {
        let p = SparsePolynomial::from_terms(
            2,
            [(vec![1, 0], 2.0), (vec![0, 1], -1.0), (vec![0, 0], 0.5)],
        )
        .unwrap();
        let (w, theta) = Ptf::new(p).as_halfspace().unwrap();
        assert_eq!(w, vec![2.0, -1.0]);
        assert_eq!(theta, -0.5);
    }

    #[test]
    fn sparse_instances() {
        let p = random_sparse_polynomial(3, 3, 5, 4).unwrap();
        assert_eq!(p.num_terms(), 5);
        assert_eq!(p.degree(), 3);
        assert_eq!(p, random_sparse_polynomial(3, 3, 5, 4).unwrap());
    }

    #[test]
    fn json_kind_tag() {
        let f = linear(2, 1);
        let s = f.to_json().unwrap();
        assert!(s.contains("\"kind\":\"ptf\""));
        assert_eq!(Ptf::from_json(&s).unwrap(), f);
        assert!(Ptf::<f64>::from_json(r#"{"kind":"other","num_vars":1,"terms":[]}"#).is_err());
    }
}
