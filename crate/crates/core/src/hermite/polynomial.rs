use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{param, Error, Result};
use crate::Scalar;

/// Exponent vector of a monomial, one entry per variable.
pub type Exponents = Vec<u32>;

/// Multivariate polynomial stored as a map from exponent vectors to coefficients.
///
/// Terms with a zero coefficient are never stored, so two polynomials are equal
/// exactly when their term maps are equal.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePolynomial<T> {
    num_vars: usize,
    terms: BTreeMap<Exponents, T>,
}

impl<T: Scalar> SparsePolynomial<T> {
    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: T) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(vec![0; num_vars], c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(num_vars: usize, i: usize) -> Result<Self> {
        if i >= num_vars {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: num_vars,
            });
        }
        let mut e = vec![0; num_vars];
        e[i] = 1;
        let mut p = Self::zero(num_vars);
        p.add_term(e, T::one());
        Ok(p)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs. Repeated
    /// exponent vectors are summed.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponents, T)>,
    {
        if num_vars == 0 {
            return Err(param("polynomial needs at least one variable"));
        }
        let mut p = Self::zero(num_vars);
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    got: e.len(),
                });
            }
            if !c.is_finite() {
                return Err(param("polynomial coefficients must be finite"));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, e: Exponents, c: T) {
        debug_assert_eq!(e.len(), self.num_vars);
        match self.terms.entry(e) {
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

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> T {
        self.terms.get(e).copied().unwrap_or_else(T::zero)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Largest exponent of any single variable.
    pub fn max_var_degree(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|e| e.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        if x.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the dimension check. `x` must have `num_vars` entries.
    pub fn eval_unchecked(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .map(|(e, &c)| {
                e.iter()
                    .zip(x)
                    .filter(|(&k, _)| k > 0)
                    .fold(c, |acc, (&k, &xi)| acc * xi.powi(k as i32))
            })
            .sum()
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn partial_derivative(&self, i: usize) -> Result<Self> {
        if i >= self.num_vars {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.num_vars,
            });
        }
        let mut out = Self::zero(self.num_vars);
        for (e, &c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * T::of(e[i] as f64));
        }
        Ok(out)
    }

    /// Converts the coefficients to another scalar type.
    pub fn cast<U: Scalar>(&self) -> SparsePolynomial<U> {
        let mut out = SparsePolynomial::zero(self.num_vars);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), U::of(c.as_f64()));
        }
        out
    }

    fn check_same_vars(&self, other: &Self) {
        assert_eq!(
            self.num_vars, other.num_vars,
            "polynomials over different variable counts"
        );
    }
}

impl<T: Scalar> Add for &SparsePolynomial<T> {
    type Output = SparsePolynomial<T>;

    fn add(self, rhs: Self) -> SparsePolynomial<T> {
        self.check_same_vars(rhs);
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl<T: Scalar> Sub for &SparsePolynomial<T> {
    type Output = SparsePolynomial<T>;

    fn sub(self, rhs: Self) -> SparsePolynomial<T> {
        self + &(-rhs)
    }
}

impl<T: Scalar> Neg for &SparsePolynomial<T> {
    type Output = SparsePolynomial<T>;

    fn neg(self) -> SparsePolynomial<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul for &SparsePolynomial<T> {
    type Output = SparsePolynomial<T>;

    // exponents add when monomials multiply
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Self) -> SparsePolynomial<T> {
        self.check_same_vars(rhs);
        let mut out = SparsePolynomial::zero(self.num_vars);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x2() -> SparsePolynomial<f64> {
        SparsePolynomial::from_terms(1, [(vec![2], 1.0)]).unwrap()
    }

    #[test]
    fn zero_polynomial_has_degree_zero() {
        let p = SparsePolynomial::<f64>::zero(3);
        assert_eq!(p.degree(), 0);
        assert!(p.is_zero());
        assert_eq!(p.eval(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn cancelling_terms_are_dropped() {
        let p = SparsePolynomial::from_terms(
            2,
            [(vec![1, 1], 2.0), (vec![1, 1], -2.0), (vec![0, 1], 1.0)],
        )
        .unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn eval_and_derivative() {
        let p = SparsePolynomial::from_terms(2, [(vec![2, 1], 3.0), (vec![0, 0], -1.0)]).unwrap();
        assert_eq!(p.eval(&[2.0, 5.0]).unwrap(), 3.0 * 4.0 * 5.0 - 1.0);
        let dx = p.partial_derivative(0).unwrap();
        assert_eq!(dx.coeff(&[1, 1]), 6.0);
        assert_eq!(dx.num_terms(), 1);
        assert!(p.partial_derivative(2).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        assert!(matches!(
            x2().eval(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                got: 2
            })
        ));
        assert!(SparsePolynomial::<f64>::from_terms(2, [(vec![1], 1.0)]).is_err());
    }

    #[test]
    fn ring_operations() {
        let x = SparsePolynomial::<f64>::var(1, 0).unwrap();
        let one = SparsePolynomial::constant(1, 1.0);
        let prod = &(&x + &one) * &(&x - &one);
        assert_eq!(prod, &x2() - &one);
    }
}
