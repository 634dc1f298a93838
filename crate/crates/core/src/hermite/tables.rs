//! Exact integer conversion tables between monomials and probabilists' Hermite
//! polynomials in one variable.

use crate::error::{Error, Result};
use crate::Scalar;

/// Monomial coefficients of the probabilists' Hermite polynomial `He_j`, lowest
/// power first, built from `He_{j+1} = x He_j - j He_{j-1}`.
pub fn hermite_1d(j: u32) -> Result<Vec<i128>> {
    Ok(HermiteTables::new(j)?.he[j as usize].clone())
}

/// Both directions of the 1-D basis change up to a fixed degree.
#[derive(Clone, Debug)]
pub(crate) struct HermiteTables {
    /// `he[j][m]`: coefficient of `x^m` in `He_j`.
    he: Vec<Vec<i128>>,
    /// `mono[m][j]`: coefficient of `He_j` in `x^m` (always non-negative).
    mono: Vec<Vec<i128>>,
}

impl HermiteTables {
    pub(crate) fn new(max_degree: u32) -> Result<Self> {
        let top = max_degree as usize;
        let overflow = || Error::DegreeTooLarge(max_degree);

        let mut he: Vec<Vec<i128>> = vec![vec![1]];
        for j in 0..top {
            let mut next = vec![0i128; j + 2];
            for (m, &c) in he[j].iter().enumerate() {
                next[m + 1] = next[m + 1].checked_add(c).ok_or_else(overflow)?;
            }
            if j > 0 {
                for (m, &c) in he[j - 1].iter().enumerate() {
                    let t = c.checked_mul(j as i128).ok_or_else(overflow)?;
                    next[m] = next[m].checked_sub(t).ok_or_else(overflow)?;
                }
            }
            he.push(next);
        }

        // x * He_j = He_{j+1} + j He_{j-1}
        let mut mono: Vec<Vec<i128>> = vec![vec![1]];
        for m in 0..top {
            let mut next = vec![0i128; m + 2];
            for (j, &c) in mono[m].iter().enumerate() {
                if c == 0 {
                    continue;
                }
                next[j + 1] = next[j + 1].checked_add(c).ok_or_else(overflow)?;
                if j > 0 {
                    let t = c.checked_mul(j as i128).ok_or_else(overflow)?;
                    next[j - 1] = next[j - 1].checked_add(t).ok_or_else(overflow)?;
                }
            }
            mono.push(next);
        }
        Ok(Self { he, mono })
    }

    /// Coefficients of `x^m` in the orthonormal basis `h_j = He_j / sqrt(j!)`.
    pub(crate) fn monomial_to_orthonormal<T: Scalar>(&self, m: u32) -> Vec<(u32, T)> {
        self.mono[m as usize]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| (j as u32, T::of_int(c) * sqrt_factorial::<T>(j as u32)))
            .collect()
    }

    /// Monomial coefficients of `h_j = He_j / sqrt(j!)`.
    pub(crate) fn orthonormal_to_monomial<T: Scalar>(&self, j: u32) -> Vec<(u32, T)> {
        let norm = sqrt_factorial::<T>(j);
        self.he[j as usize]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(m, &c)| (m as u32, T::of_int(c) / norm))
            .collect()
    }
}

pub(crate) fn sqrt_factorial<T: Scalar>(j: u32) -> T {
    (2..=j).fold(T::one(), |acc, i| acc * T::of(i as f64).sqrt())
}

/// `E[X^j]` for a standard Gaussian: 0 for odd `j`, `(j-1)!!` for even `j`.
pub fn gaussian_moment<T: Scalar>(j: u32) -> T {
    if j % 2 == 1 {
        return T::zero();
    }
    (1..j)
        .step_by(2)
        .fold(T::one(), |acc, i| acc * T::of(i as f64))
}
