//! The prime field F_p.
//!
//! Every [`Scalar`] carries its modulus. Mixing scalars of different
//! characteristic is a programming error and panics; it is never coerced.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Returns true when `p` is prime. Trial division is plenty at word size.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Validates a characteristic. Moduli are kept below 2^32 so that products
/// of residues fit in a `u64`.
pub fn check_prime(p: u64) -> Result<u64> {
    if p >= 1 << 32 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(p)
}

/// `p^e` as a `usize`.
pub fn pow_usize(p: u64, e: u32) -> usize {
    (p as usize).pow(e)
}

/// Binomial coefficient `C(n, k) mod p` by Lucas' theorem.
pub fn binomial_mod(n: u64, k: u64, p: u64) -> u64 {
    if k > n {
        return 0;
    }
    let (mut n, mut k) = (n, k);
    let mut acc = 1u64;
    while k > 0 {
        let (nd, kd) = (n % p, k % p);
        if kd > nd {
            return 0;
        }
        acc = acc * small_binomial(nd, kd, p) % p;
        n /= p;
        k /= p;
    }
    acc
}

fn small_binomial(n: u64, k: u64, p: u64) -> u64 {
    // n < p, so every factor is invertible mod p.
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * inv_mod(den, p) % p
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// An element of F_p.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scalar {
    value: u64,
    p: u64,
}

impl Scalar {
    pub fn new(value: i64, p: u64) -> Self {
        let v = value.rem_euclid(p as i64) as u64;
        Scalar { value: v, p }
    }

    pub fn from_u64(value: u64, p: u64) -> Self {
        Scalar { value: value % p, p }
    }

    pub fn zero(p: u64) -> Self {
        Scalar { value: 0, p }
    }

    pub fn one(p: u64) -> Self {
        Scalar { value: 1 % p, p }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn inv(&self) -> Option<Self> {
        if self.value == 0 {
            None
        } else {
            Some(Scalar {
                value: inv_mod(self.value, self.p),
                p: self.p,
            })
        }
    }

    pub fn pow(&self, e: u64) -> Self {
        Scalar {
            value: pow_mod(self.value, e, self.p),
            p: self.p,
        }
    }

    /// Value as a symmetric-free integer representative in `0..p`.
    pub fn as_i64(&self) -> i64 {
        self.value as i64
    }

    #[inline]
    fn check(&self, o: &Self) {
        assert_eq!(self.p, o.p, "characteristic mismatch: F_{} vs F_{}", self.p, o.p);
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.p)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        self.check(&o);
        let mut v = self.value + o.value;
        if v >= self.p {
            v -= self.p;
        }
        Scalar { value: v, p: self.p }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        self.check(&o);
        let v = if self.value >= o.value {
            self.value - o.value
        } else {
            self.value + self.p - o.value
        };
        Scalar { value: v, p: self.p }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        self.check(&o);
        Scalar {
            value: self.value * o.value % self.p,
            p: self.p,
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        if self.value == 0 {
            self
        } else {
            Scalar {
                value: self.p - self.value,
                p: self.p,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert!(is_prime(2) && is_prime(3) && is_prime(5) && is_prime(65521));
        assert!(!is_prime(1) && !is_prime(9) && !is_prime(91));
        assert!(check_prime(4).is_err());
    }

    #[test]
    fn lucas_matches_pascal() {
        for p in [2u64, 3, 5, 7] {
            let mut row = vec![1u64];
            for n in 0..40u64 {
                for (k, &c) in row.iter().enumerate() {
                    assert_eq!(binomial_mod(n, k as u64, p), c % p, "C({n},{k}) mod {p}");
                }
                let mut next = vec![1u64; row.len() + 1];
                for k in 1..row.len() {
                    next[k] = (row[k - 1] + row[k]) % p;
                }
                row = next;
            }
        }
    }

    #[test]
    fn inverse_and_negation() {
        let p = 7;
        for v in 1..7 {
            let a = Scalar::new(v, p);
            assert_eq!(a * a.inv().unwrap(), Scalar::one(p));
            assert_eq!(a + (-a), Scalar::zero(p));
        }
        assert!(Scalar::zero(p).inv().is_none());
        assert_eq!(Scalar::new(-1, 5).value(), 4);
    }

    #[test]
    #[should_panic(expected = "characteristic mismatch")]
    fn mixing_characteristics_panics() {
        let _ = Scalar::one(2) + Scalar::one(3);
    }
}
