//! Arithmetic modulo a prime `q < 2^62`.

/// Largest modulus the samplers accept.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    q: u64,
    /// `floor(2^64 / q)` for Barrett reduction when `q < 2^32`.
    barrett: u64,
}

impl PrimeField {
    /// `q` must be prime; callers validate.
    pub fn new(q: u64) -> Self {
        debug_assert!(q >= 2);
        let barrett = if q < (1 << 32) {
            (u128::from(u64::MAX) + 1).div_euclid(q as u128) as u64
        } else {
            0
        };
        Self { q, barrett }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `ceil(log2 q)`, the bit width of one field element.
    pub fn element_bits(&self) -> u32 {
        bits_for(self.q)
    }

    /// `(acc * x + c) mod q` for reduced inputs.
    #[inline]
    pub fn mul_add(&self, acc: u64, x: u64, c: u64) -> u64 {
        if self.barrett != 0 {
            // acc, x, c < 2^32 so the sum fits in 64 bits
            let t = acc * x + c;
            let quot = ((t as u128 * self.barrett as u128) >> 64) as u64;
            let mut r = t - quot * self.q;
            if r >= self.q {
                r -= self.q;
            }
            r
        } else {
            ((acc as u128 * x as u128 + c as u128) % self.q as u128) as u64
        }
    }

    #[inline]
    pub fn reduce_wide(&self, v: u128) -> u64 {
        (v % self.q as u128) as u64
    }
}

/// `ceil(log2 q)` for `q >= 2`.
pub fn bits_for(q: u64) -> u32 {
    64 - (q - 1).leading_zeros()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `>= n`, or `None` past `MAX_MODULUS`.
pub fn next_prime(n: u64) -> Option<u64> {
    let mut c = n.max(2);
    while c <= MAX_MODULUS {
        if is_prime(c) {
            return Some(c);
        }
        c += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_primes() {
        let primes: Vec<u64> = (0..50).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
        );
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
        assert_eq!(next_prime(40), Some(41));
        assert_eq!(next_prime(0), Some(2));
    }

    #[test]
    fn element_bits() {
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(17), 5);
        assert_eq!(bits_for(16), 4);
        assert_eq!(bits_for(41), 6);
    }

    proptest! {
        #[test]
        fn barrett_matches_wide_reduction(q_seed in 2u64..(1 << 32), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let q = next_prime(q_seed).unwrap();
            let f = PrimeField::new(q);
            let (a, b, c) = (a % q, b % q, c % q);
            let want = ((a as u128 * b as u128 + c as u128) % q as u128) as u64;
            prop_assert_eq!(f.mul_add(a, b, c), want);
        }
    }
}
