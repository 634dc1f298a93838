use crate::error::{param, Result};
use crate::Scalar;

pub const MAX_QUADRATURE_POINTS: usize = 64;

/// Finite atom law `sum_i w_i delta(x_i)` matching standard Gaussian moments up
/// to order `2M - 1`. Nodes are sorted ascending and symmetric about zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature1D<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> Quadrature1D<T> {
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest moment order matched exactly: `2M - 1`.
    pub fn order(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn max_abs_node(&self) -> T {
        self.nodes.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn expect(&self, f: impl Fn(T) -> T) -> T {
        self.points().map(|(x, w)| w * f(x)).sum()
    }

    /// `sum_i w_i x_i^j`, accumulated over mirrored node pairs so odd moments
    /// of a symmetric rule come out exactly zero.
    pub fn moment(&self, j: u32) -> T {
        let n = self.nodes.len();
        let term = |i: usize| self.weights[i] * self.nodes[i].powi(j as i32);
        let mut sum = if n % 2 == 1 { term(n / 2) } else { T::zero() };
        for i in (0..n / 2).rev() {
            sum = sum + (term(i) + term(n - 1 - i));
        }
        sum
    }

    pub(crate) fn from_parts(nodes: Vec<T>, weights: Vec<T>) -> Self {
        Self { nodes, weights }
    }
}

/// Gauss-Hermite rule for the standard Gaussian with `m` points.
///
/// Nodes are the eigenvalues of the Jacobi matrix (zero diagonal, off-diagonal
/// `sqrt(j)`), polished by Newton steps on `He_m`. Weights use the Christoffel
/// form `1 / sum_{j<m} h_j(x)^2`, then the rule is symmetrized pairwise.
pub fn gauss_hermite<T: Scalar>(m: usize) -> Result<Quadrature1D<T>> {
    if m == 0 || m > MAX_QUADRATURE_POINTS {
        return Err(param(format!(
            "quadrature point count must be in 1..={MAX_QUADRATURE_POINTS}, got {m}"
        )));
    }
    let mut diag = vec![T::zero(); m];
    let mut off: Vec<T> = (1..=m)
        .map(|j| {
            if j < m {
                T::of(j as f64).sqrt()
            } else {
                T::zero()
            }
        })
        .collect();
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    let mut nodes = diag;
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));

    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (h_m, h_prev) = orthonormal_pair(*x, m);
            let deriv = T::of(m as f64).sqrt() * h_prev;
            if deriv == T::zero() {
                break;
            }
            *x = *x - h_m / deriv;
        }
    }

    let mut weights: Vec<T> = nodes
        .iter()
        .map(|&x| T::one() / christoffel_sum(x, m))
        .collect();
    let total: T = weights.iter().copied().sum();
    weights.iter_mut().for_each(|w| *w = *w / total);

    let two = T::of(2.0);
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = (nodes[j] - nodes[i]) / two;
        let w = (weights[i] + weights[j]) / two;
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = T::zero();
    }
    Ok(Quadrature1D { nodes, weights })
}

/// `(h_m(x), h_{m-1}(x))` for the orthonormal Hermite family.
fn orthonormal_pair<T: Scalar>(x: T, m: usize) -> (T, T) {
    let mut prev = T::zero();
    let mut cur = T::one();
    for j in 0..m {
        let next = (x * cur - T::of(j as f64).sqrt() * prev) / T::of((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn christoffel_sum<T: Scalar>(x: T, m: usize) -> T {
    let mut prev = T::zero();
    let mut cur = T::one();
    let mut sum = T::one();
    for j in 0..m - 1 {
        let next = (x * cur - T::of(j as f64).sqrt() * prev) / T::of((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        sum = sum + cur * cur;
    }
    sum
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. `off[i]` couples rows
/// `i` and `i + 1`; on return `diag` holds the eigenvalues.
fn tridiagonal_eigenvalues<T: Scalar>(diag: &mut [T], off: &mut [T]) -> Result<()> {
    let n = diag.len();
    let two = T::of(2.0);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= T::epsilon() * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 100 {
                return Err(param("tridiagonal eigensolver did not converge"));
            }
            let mut g = (diag[l + 1] - diag[l]) / (two * off[l]);
            let mut r = g.hypot(T::one());
            g = diag[m] - diag[l] + off[l] / (g + r.abs().copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == T::zero() {
                    diag[i + 1] = diag[i + 1] - p;
                    off[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + two * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] = diag[l] - p;
            off[l] = g;
            off[m] = T::zero();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::gaussian_moment;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_and_two_point_rules() {
        let q1 = gauss_hermite::<f64>(1).unwrap();
        assert_eq!(q1.nodes(), &[0.0]);
        assert_eq!(q1.weights(), &[1.0]);
        let q2 = gauss_hermite::<f64>(2).unwrap();
        assert_abs_diff_eq!(q2.nodes()[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q2.nodes()[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q2.weights()[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn three_point_rule() {
        let q = gauss_hermite::<f64>(3).unwrap();
        let s3 = 3f64.sqrt();
        for (got, want) in q.nodes().iter().zip([-s3, 0.0, s3]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        for (got, want) in q.weights().iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(q.moment(4), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn moments_match_up_to_order() {
        for m in 1..=20 {
            let q = gauss_hermite::<f64>(m).unwrap();
            let total: f64 = q.weights().iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            assert!(q.weights().iter().all(|&w| w > 0.0));
            for j in 0..=q.order() as u32 {
                let want: f64 = gaussian_moment(j);
                let tol = 1e-10 * want.max(1.0);
                assert!(
                    (q.moment(j) - want).abs() <= tol,
                    "m={m} j={j}: {} vs {want}",
                    q.moment(j)
                );
            }
        }
    }

    #[test]
    fn large_rules_stay_symmetric_and_positive() {
        let q = gauss_hermite::<f64>(64).unwrap();
        let n = q.len();
        for i in 0..n {
            assert_eq!(q.nodes()[i], -q.nodes()[n - 1 - i]);
            assert_eq!(q.weights()[i], q.weights()[n - 1 - i]);
            assert!(q.weights()[i] > 0.0);
        }
        assert!(q.nodes().windows(2).all(|w| w[0] < w[1]));
        assert_abs_diff_eq!(q.moment(2), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.moment(10), 945.0, epsilon = 1e-8);
    }

    #[test]
    fn single_precision_rule() {
        let q = gauss_hermite::<f32>(5).unwrap();
        assert!((q.moment(4) - 3.0).abs() < 1e-4);
    }

    #[test]
    fn point_count_is_validated() {
        assert!(gauss_hermite::<f64>(0).is_err());
        assert!(gauss_hermite::<f64>(65).is_err());
    }
}
