use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use super::polynomial::{Exponents, SparsePolynomial};
use super::tables::HermiteTables;
use crate::error::Result;
use crate::Scalar;

/// Coordinates of a polynomial in the orthonormal Hermite basis
/// `h_a(x) = prod_i He_{a_i}(x_i) / sqrt(a_i!)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteExpansion<T> {
    num_vars: usize,
    coeffs: BTreeMap<Exponents, T>,
}

impl<T: Scalar> HermiteExpansion<T> {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn coeff(&self, a: &[u32]) -> T {
        self.coeffs.get(a).copied().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Exponents, &T)> {
        self.coeffs.iter()
    }

    /// Highest `|a|_1` carrying a nonzero coefficient.
    pub fn degree(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|a| a.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// `sum_a c_a^2`, which is `E[p(X)^2]` by orthonormality.
    pub fn norm_sq(&self) -> T {
        self.coeffs.values().map(|&c| c * c).sum()
    }

    /// Restriction to multi-indices with `|a|_1 == k`.
    pub fn degree_part(&self, k: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(a, _)| a.iter().sum::<u32>() == k)
            .map(|(a, &c)| (a.clone(), c))
            .collect();
        Self {
            num_vars: self.num_vars,
            coeffs,
        }
    }

    /// `|p^{[k]}|_2^2` for every `k` up to the degree.
    pub fn level_weights(&self) -> Vec<T> {
        let mut w = vec![T::zero(); self.degree() as usize + 1];
        for (a, &c) in &self.coeffs {
            let k = a.iter().sum::<u32>() as usize;
            w[k] = w[k] + c * c;
        }
        w
    }

    pub fn from_coeffs<I>(num_vars: usize, coeffs: I) -> Self
    where
        I: IntoIterator<Item = (Exponents, T)>,
    {
        let mut out = Self {
            num_vars,
            coeffs: BTreeMap::new(),
        };
        for (a, c) in coeffs {
            assert_eq!(a.len(), num_vars, "multi-index length");
            out.accumulate(a, c);
        }
        out
    }

    fn accumulate(&mut self, a: Exponents, c: T) {
        match self.coeffs.entry(a) {
            Entry::Vacant(slot) => {
                if c != T::zero() {
                    slot.insert(c);
                }
            }
            Entry::Occupied(mut slot) => {
                let sum = *slot.get() + c;
                if sum == T::zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    /// Back to the monomial basis.
    pub fn to_polynomial(&self) -> Result<SparsePolynomial<T>> {
        let max = self
            .coeffs
            .keys()
            .flat_map(|a| a.iter().copied())
            .max()
            .unwrap_or(0);
        let tables = HermiteTables::new(max)?;
        let rows: Vec<Vec<(u32, T)>> = (0..=max)
            .map(|j| tables.orthonormal_to_monomial(j))
            .collect();
        let mut out = SparsePolynomial::zero(self.num_vars);
        for (a, &c) in &self.coeffs {
            for_each_product(a, &rows, c, &mut |e, v| out.add_term(e, v));
        }
        Ok(out)
    }
}

/// Expands a polynomial in the orthonormal Hermite basis.
///
/// Each monomial is converted variable by variable using the integer tables,
/// so no floating cancellation happens until the final products are summed.
pub fn to_hermite<T: Scalar>(p: &SparsePolynomial<T>) -> Result<HermiteExpansion<T>> {
    let max = p.max_var_degree();
    let tables = HermiteTables::new(max)?;
    let rows: Vec<Vec<(u32, T)>> = (0..=max)
        .map(|m| tables.monomial_to_orthonormal(m))
        .collect();
    let mut out = HermiteExpansion {
        num_vars: p.num_vars(),
        coeffs: BTreeMap::new(),
    };
    for (e, &c) in p.terms() {
        for_each_product(e, &rows, c, &mut |a, v| out.accumulate(a, v));
    }
    Ok(out)
}

pub fn from_hermite<T: Scalar>(h: &HermiteExpansion<T>) -> Result<SparsePolynomial<T>> {
    h.to_polynomial()
}

/// Enumerates the tensor product of 1-D conversion rows selected by `index`,
/// calling `sink` with each output multi-index and `scale * prod(values)`.
fn for_each_product<T: Scalar>(
    index: &[u32],
    rows: &[Vec<(u32, T)>],
    scale: T,
    sink: &mut dyn FnMut(Exponents, T),
) {
    fn rec<T: Scalar>(
        pos: usize,
        index: &[u32],
        rows: &[Vec<(u32, T)>],
        cur: &mut Exponents,
        acc: T,
        sink: &mut dyn FnMut(Exponents, T),
    ) {
        if pos == index.len() {
            sink(cur.clone(), acc);
            return;
        }
        for &(j, v) in &rows[index[pos] as usize] {
            cur[pos] = j;
            rec(pos + 1, index, rows, cur, acc * v, sink);
        }
    }
    let mut cur = vec![0; index.len()];
    rec(0, index, rows, &mut cur, scale, sink);
}

/// Gaussian L2 norm `|p|_2 = sqrt(E[p(X)^2])`.
pub fn l2_norm<T: Scalar>(p: &SparsePolynomial<T>) -> Result<T> {
    Ok(to_hermite(p)?.norm_sq().sqrt())
}

/// Projection onto Hermite degree exactly `k`, returned in the monomial basis.
pub fn degree_part<T: Scalar>(p: &SparsePolynomial<T>, k: u32) -> Result<SparsePolynomial<T>> {
    to_hermite(p)?.degree_part(k).to_polynomial()
}

/// `sum_k k(k-1)...(k-l+1) |p^{[k]}|_2^2`, the expected squared `l`-fold
/// derivative of `p` along independent Gaussian directions.
pub fn derivative_moment_rhs<T: Scalar>(p: &SparsePolynomial<T>, l: u32) -> Result<T> {
    let weights = to_hermite(p)?.level_weights();
    Ok(weights
        .iter()
        .enumerate()
        .map(|(k, &w)| falling_factorial::<T>(k as u32, l) * w)
        .sum())
}

fn falling_factorial<T: Scalar>(k: u32, l: u32) -> T {
    if l > k {
        return T::zero();
    }
    (0..l).fold(T::one(), |acc, i| acc * T::of((k - i) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn poly(num_vars: usize, terms: &[(&[u32], f64)]) -> SparsePolynomial<f64> {
        SparsePolynomial::from_terms(num_vars, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    #[test]
    fn constant_expands_to_c0() {
        let h = to_hermite(&poly(1, &[(&[0], 1.0)])).unwrap();
        assert_eq!(h.coeff(&[0]), 1.0);
        assert_eq!(h.coeffs().count(), 1);
    }

    #[test]
    fn square_expands_to_he2_plus_he0() {
        let h = to_hermite(&poly(1, &[(&[2], 1.0)])).unwrap();
        assert_abs_diff_eq!(h.coeff(&[0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h.coeff(&[2]), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(h.coeff(&[1]), 0.0);
    }

    #[test]
    fn product_of_coordinates_is_a_basis_element() {
        let h = to_hermite(&poly(2, &[(&[1, 1], 1.0)])).unwrap();
        assert_eq!(h.coeff(&[1, 1]), 1.0);
        assert_eq!(h.coeffs().count(), 1);
    }

    #[test]
    fn l2_norms() {
        assert_abs_diff_eq!(
            l2_norm(&poly(1, &[(&[1], 1.0)])).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            l2_norm(&poly(1, &[(&[2], 1.0)])).unwrap(),
            3f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            l2_norm(&poly(2, &[(&[1, 1], 1.0)])).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(l2_norm(&SparsePolynomial::<f64>::zero(2)).unwrap(), 0.0);
    }

    #[test]
    fn degree_parts_of_x_squared() {
        let p = poly(1, &[(&[2], 1.0)]);
        let top = degree_part(&p, 2).unwrap();
        assert_abs_diff_eq!(top.coeff(&[2]), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(top.coeff(&[0]), -1.0, epsilon = 1e-14);
        let bottom = degree_part(&p, 0).unwrap();
        assert_abs_diff_eq!(bottom.coeff(&[0]), 1.0, epsilon = 1e-14);
        assert_eq!(bottom.num_terms(), 1);
        assert!(degree_part(&poly(1, &[(&[1], 1.0)]), 2).unwrap().is_zero());
    }

    #[test]
    fn derivative_moments() {
        let x2 = poly(1, &[(&[2], 1.0)]);
        assert_abs_diff_eq!(derivative_moment_rhs(&x2, 1).unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            derivative_moment_rhs(&poly(1, &[(&[1], 1.0)]), 1).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(derivative_moment_rhs(&x2, 0).unwrap(), 3.0, epsilon = 1e-12);
        assert_eq!(
            derivative_moment_rhs(&poly(1, &[(&[1], 1.0)]), 2).unwrap(),
            0.0
        );
    }

    #[test]
    fn zero_polynomial_is_total() {
        let z = SparsePolynomial::<f64>::zero(3);
        assert!(to_hermite(&z).unwrap().to_polynomial().unwrap().is_zero());
        assert!(degree_part(&z, 0).unwrap().is_zero());
        assert_eq!(derivative_moment_rhs(&z, 2).unwrap(), 0.0);
    }

    #[test]
    fn works_in_single_precision() {
        let p = SparsePolynomial::<f32>::from_terms(1, [(vec![2], 1.0f32)]).unwrap();
        assert!((l2_norm(&p).unwrap() - 3f32.sqrt()).abs() < 1e-6);
    }
}
