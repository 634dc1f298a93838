use crate::error::{param, Error, Result};
use crate::Scalar;

/// Unit-variance blend coefficients `w_i ∝ (1 - eps^2)^{(i-1)/2}`, `i = 1..l`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlendWeights<T> {
    pub epsilon: f64,
    pub ell: usize,
    pub w: Vec<T>,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Normalized by `sqrt(sum_{i=1}^{l} (1 - eps^2)^{i-1})` so that `sum w_i^2 = 1`.
pub fn blend_weights<T: Scalar>(eps: f64, ell: usize) -> Result<BlendWeights<T>> {
    check_eps(eps)?;
    if ell == 0 {
        return Err(param("blend needs at least one design"));
    }
    let ratio = T::of((1.0 - eps * eps).sqrt());
    let mut raw = Vec::with_capacity(ell);
    let mut cur = T::one();
    for _ in 0..ell {
        raw.push(cur);
        cur = cur * ratio;
    }
    let z = raw.iter().map(|&v| v * v).sum::<T>().sqrt();
    Ok(BlendWeights {
        epsilon: eps,
        ell,
        w: raw.into_iter().map(|v| v / z).collect(),
    })
}

/// Coefficients of the hybrid `sum_{i=1}^{l} eps r^{i-1} Y_i + r^l X` with
/// `r = sqrt(1 - eps^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridWeights<T> {
    pub design: Vec<T>,
    pub gaussian: T,
}

impl<T: Scalar> HybridWeights<T> {
    /// Squared norm of the coefficient vector; 1 by the telescoping sum.
    pub fn norm_sq(&self) -> T {
        self.design.iter().map(|&v| v * v).sum::<T>() + self.gaussian * self.gaussian
    }
}

pub fn hybrid_weights<T: Scalar>(eps: f64, ell: usize) -> Result<HybridWeights<T>> {
    check_eps(eps)?;
    let ratio = T::of((1.0 - eps * eps).sqrt());
    let e = T::of(eps);
    let mut design = Vec::with_capacity(ell);
    let mut cur = T::one();
    for _ in 0..ell {
        design.push(e * cur);
        cur = cur * ratio;
    }
    Ok(HybridWeights {
        design,
        gaussian: cur,
    })
}

/// The iterated single-step blend: designs `Y_1..Y_l` mixed with one Gaussian
/// draw. `l = designs.len()`; with no designs the Gaussian draw is returned.
pub fn hybrid_sample<T: Scalar>(eps: f64, designs: &[Vec<T>], gaussian: &[T]) -> Result<Vec<T>> {
    let weights = hybrid_weights::<T>(eps, designs.len())?;
    let n = gaussian.len();
    if let Some(bad) = designs.iter().find(|y| y.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let mut out: Vec<T> = gaussian.iter().map(|&x| weights.gaussian * x).collect();
    for (y, &w) in designs.iter().zip(&weights.design) {
        out.iter_mut().zip(y).for_each(|(o, &v)| *o = *o + w * v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn trivial_blend() {
        assert_eq!(blend_weights::<f64>(0.3, 1).unwrap().w, vec![1.0]);
    }

    #[test]
    fn two_term_blend() {
        let b = blend_weights::<f64>(0.5f64.sqrt(), 2).unwrap();
        assert_abs_diff_eq!(b.w[0], (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.w[1], (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn unit_norm_and_geometric_ratio() {
        for &eps in &[0.05, 0.1, 0.3, 0.5, 0.7, 0.95] {
            for &ell in &[1usize, 2, 7, 50, 500, 4145] {
                let b = blend_weights::<f64>(eps, ell).unwrap();
                let norm: f64 = b.w.iter().map(|v| v * v).sum();
                assert!((norm - 1.0).abs() <= 1e-12, "eps={eps} ell={ell}");
                let r = (1.0 - eps * eps).sqrt();
                for pair in b.w.windows(2) {
                    if pair[0] > 1e-250 {
                        assert!((pair[1] / pair[0] - r).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn hybrid_coefficient_identity() {
        for &eps in &[0.1, 0.3, 0.7] {
            for &ell in &[1usize, 5, 50] {
                let h = hybrid_weights::<f64>(eps, ell).unwrap();
                assert!((h.norm_sq() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn hybrid_degenerate_cases() {
        let x = vec![0.4, -1.2];
        assert_eq!(hybrid_sample::<f64>(0.3, &[], &x).unwrap(), x);
        let y = vec![1.0, -1.0];
        let eps = 0.999_999;
        let out = hybrid_sample(eps, std::slice::from_ref(&y), &x).unwrap();
        for (o, v) in out.iter().zip(&y) {
            assert!((o - eps * v).abs() < 2e-3);
        }
        assert!(hybrid_sample(0.3, &[vec![1.0]], &x).is_err());
    }

    #[test]
    fn epsilon_range() {
        assert!(blend_weights::<f64>(0.0, 3).is_err());
        assert!(blend_weights::<f64>(1.0, 3).is_err());
        assert!(blend_weights::<f64>(0.5, 0).is_err());
    }
}
