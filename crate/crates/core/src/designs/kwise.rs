use super::field::{is_prime, PrimeField, MAX_MODULUS};
use crate::error::{param, Error, Result};

/// `K`-wise independent family of `n` uniform field elements: coordinate `i` is
/// a random degree-`(K-1)` polynomial over `F_q` evaluated at a distinct point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KWiseFamily {
    field: PrimeField,
    independence: usize,
    eval_points: Vec<u64>,
}

impl KWiseFamily {
    /// Uses evaluation points `0, 1, ..., n - 1`.
    pub fn new(q: u64, independence: usize, n: usize) -> Result<Self> {
        if q > MAX_MODULUS || !is_prime(q) {
            return Err(param(format!("modulus {q} is not a prime below 2^62")));
        }
        if independence == 0 {
            return Err(param("independence order must be at least 1"));
        }
        if n == 0 || n as u64 > q {
            return Err(param(format!("need 1 <= n <= q, got n = {n}, q = {q}")));
        }
        Ok(Self {
            field: PrimeField::new(q),
            independence,
            eval_points: (0..n as u64).collect(),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.field.modulus()
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn independence(&self) -> usize {
        self.independence
    }

    pub fn len(&self) -> usize {
        self.eval_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eval_points.is_empty()
    }

    pub fn eval_points(&self) -> &[u64] {
        &self.eval_points
    }

    pub fn check_seed(&self, seed: &[u64]) -> Result<()> {
        if seed.len() != self.independence {
            return Err(Error::MalformedSeed(format!(
                "expected {} field elements, got {}",
                self.independence,
                seed.len()
            )));
        }
        if let Some(bad) = seed.iter().find(|&&s| s >= self.modulus()) {
            return Err(Error::MalformedSeed(format!(
                "{bad} is not reduced mod {}",
                self.modulus()
            )));
        }
        Ok(())
    }

    /// `sum_t seed[t] * point_i^t mod q`.
    pub fn eval(&self, seed: &[u64], i: usize) -> Result<u64> {
        self.check_seed(seed)?;
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(self.eval_unchecked(seed, i))
    }

    /// Horner evaluation without validation.
    #[inline]
    pub fn eval_unchecked(&self, seed: &[u64], i: usize) -> u64 {
        let x = self.eval_points[i];
        seed.iter()
            .rev()
            .fold(0, |acc, &c| self.field.mul_add(acc, x, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_evaluation() {
        let fam = KWiseFamily::new(5, 2, 5).unwrap();
        assert_eq!(fam.eval(&[2, 3], 4).unwrap(), 4);
    }

    #[test]
    fn constant_family() {
        let fam = KWiseFamily::new(7, 1, 6).unwrap();
        for i in 0..6 {
            assert_eq!(fam.eval(&[3], i).unwrap(), 3);
        }
    }

    #[test]
    fn pairs_are_uniform_over_all_seeds() {
        let fam = KWiseFamily::new(3, 2, 2).unwrap();
        let mut seen = [0u32; 9];
        for a in 0..3 {
            for b in 0..3 {
                let v0 = fam.eval(&[a, b], 0).unwrap();
                let v1 = fam.eval(&[a, b], 1).unwrap();
                seen[(v0 * 3 + v1) as usize] += 1;
            }
        }
        assert_eq!(seen, [1; 9]);
    }

    #[test]
    fn validation() {
        assert!(KWiseFamily::new(6, 2, 3).is_err());
        assert!(KWiseFamily::new(5, 2, 6).is_err());
        assert!(KWiseFamily::new(5, 0, 3).is_err());
        let fam = KWiseFamily::new(5, 2, 4).unwrap();
        assert!(matches!(fam.eval(&[1], 0), Err(Error::MalformedSeed(_))));
        assert!(matches!(fam.eval(&[1, 5], 0), Err(Error::MalformedSeed(_))));
        assert!(matches!(
            fam.eval(&[1, 2], 4),
            Err(Error::IndexOutOfRange { index: 4, len: 4 })
        ));
    }
}
