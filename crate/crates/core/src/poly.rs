//! Dense univariate polynomials over F_p.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::field::{inv_mod, Scalar};

/// A polynomial in one variable over F_p.
///
/// Coefficients are residues in ascending degree with trailing zeros stripped,
/// so the zero polynomial is the empty vector and equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    p: u64,
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        let mut poly = Poly { p, coeffs };
        poly.trim();
        poly
    }

    pub fn from_i64(p: u64, coeffs: &[i64]) -> Self {
        Poly::new(p, coeffs.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect())
    }

    pub fn zero(p: u64) -> Self {
        Poly { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        Poly::constant(Scalar::one(p))
    }

    pub fn constant(c: Scalar) -> Self {
        Poly::new(c.modulus(), vec![c.value()])
    }

    /// The generator `t`.
    pub fn t(p: u64) -> Self {
        Poly::monomial(Scalar::one(p), 1)
    }

    pub fn monomial(c: Scalar, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c.value();
        Poly::new(c.modulus(), coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn raw(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 1
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        Scalar::from_u64(self.coeffs.get(i).copied().unwrap_or(0), self.p)
    }

    pub fn lead(&self) -> Scalar {
        Scalar::from_u64(self.coeffs.last().copied().unwrap_or(0), self.p)
    }

    fn check(&self, o: &Poly) {
        assert_eq!(self.p, o.p, "characteristic mismatch: F_{} vs F_{}", self.p, o.p);
    }

    pub fn scale(&self, c: Scalar) -> Poly {
        assert_eq!(self.p, c.modulus(), "characteristic mismatch");
        if c.is_zero() {
            return Poly::zero(self.p);
        }
        let v = c.value();
        Poly {
            p: self.p,
            coeffs: self.coeffs.iter().map(|&a| a * v % self.p).collect(),
        }
    }

    /// Makes the leading coefficient 1. The zero polynomial is returned as is.
    pub fn monic(&self) -> Poly {
        match self.coeffs.last() {
            None | Some(1) => self.clone(),
            Some(&l) => self.scale(Scalar::from_u64(inv_mod(l, self.p), self.p)),
        }
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        self.check(d);
        assert!(!d.is_zero(), "polynomial division by zero");
        let p = self.p;
        if self.coeffs.len() < d.coeffs.len() {
            return (Poly::zero(p), self.clone());
        }
        let dl = d.coeffs.len();
        let inv_lead = inv_mod(*d.coeffs.last().unwrap(), p);
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; rem.len() - dl + 1];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dl - 1] * inv_lead % p;
            quot[k] = c;
            if c != 0 {
                for (i, &dc) in d.coeffs.iter().enumerate() {
                    let sub = c * dc % p;
                    let slot = &mut rem[k + i];
                    *slot = (*slot + p - sub) % p;
                }
            }
        }
        rem.truncate(dl - 1);
        (Poly::new(p, quot), Poly::new(p, rem))
    }

    /// Exact division; panics when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Poly {
        let (q, r) = self.div_rem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(&self, o: &Poly) -> Poly {
        self.check(o);
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Formal derivative d/dt.
    pub fn derivative(&self) -> Poly {
        let p = self.p;
        Poly::new(
            p,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * (i as u64 % p) % p)
                .collect(),
        )
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Evaluates at a scalar.
    pub fn eval(&self, x: Scalar) -> Scalar {
        let mut acc = Scalar::zero(self.p);
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + Scalar::from_u64(c, self.p);
        }
        acc
    }

    /// Composition `self(inner(t))`.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero(self.p);
        for &c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &Poly::new(self.p, vec![c]);
        }
        acc
    }

    /// `self(t^q)`.
    pub fn inflate(&self, q: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0u64; (self.coeffs.len() - 1) * q + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i * q] = c;
        }
        Poly { p: self.p, coeffs }
    }

    /// Splits `self = sum_j t^j * parts[j](t^q)` for `j < q`.
    pub fn split_residues(&self, q: usize) -> Vec<Poly> {
        let mut parts = vec![Vec::new(); q];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let part = &mut parts[i % q];
            let k = i / q;
            if part.len() <= k {
                part.resize(k + 1, 0);
            }
            part[k] = c;
        }
        parts.into_iter().map(|c| Poly::new(self.p, c)).collect()
    }

    /// Coefficients of `self(t + X)` as a polynomial in X, i.e. the divided
    /// (Hasse) derivatives of `self`, computed by Horner in `F_p[t][X]`.
    /// Only the first `limit` coefficients are returned.
    pub fn taylor_shift(&self, limit: usize) -> Vec<Poly> {
        let p = self.p;
        let t = Poly::t(p);
        let mut acc: Vec<Poly> = Vec::new();
        for &c in self.coeffs.iter().rev() {
            // acc <- acc * (t + X) + c
            let mut next = vec![Poly::zero(p); (acc.len() + 1).min(limit.max(1))];
            for (j, a) in acc.iter().enumerate() {
                if j < next.len() {
                    next[j] = &next[j] + &(a * &t);
                }
                if j + 1 < next.len() {
                    next[j + 1] = &next[j + 1] + a;
                }
            }
            next[0] = &next[0] + &Poly::new(p, vec![c]);
            acc = next;
        }
        acc.truncate(limit);
        acc
    }

    /// Formats with the given variable name, highest degree first:
    /// `t^3+2*t+1`.
    pub fn format_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !out.is_empty() {
                out.push('+');
            }
            match (i, c) {
                (0, c) => out.push_str(&c.to_string()),
                (_, 1) => {}
                (_, c) => {
                    out.push_str(&c.to_string());
                    out.push('*');
                }
            }
            match i {
                0 => {}
                1 => out.push_str(var),
                _ => {
                    out.push_str(var);
                    out.push('^');
                    out.push_str(&i.to_string());
                }
            }
        }
        out
    }

    /// Number of nonzero terms.
    pub fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_with("t"))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.p, self)
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        self.check(o);
        let p = self.p;
        let (long, short) = if self.coeffs.len() >= o.coeffs.len() {
            (self, o)
        } else {
            (o, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (c, &s) in coeffs.iter_mut().zip(short.coeffs.iter()) {
            *c += s;
            if *c >= p {
                *c -= p;
            }
        }
        let mut r = Poly { p, coeffs };
        r.trim();
        r
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        let p = self.p;
        Poly {
            p,
            coeffs: self.coeffs.iter().map(|&c| if c == 0 { 0 } else { p - c }).collect(),
        }
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        self.check(o);
        let p = self.p;
        if self.is_zero() || o.is_zero() {
            return Poly::zero(p);
        }
        let mut acc = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        // Partial sums stay below 2^64 for p < 2^32 when reduced every step.
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a * b) % p;
            }
        }
        let mut r = Poly { p, coeffs: acc };
        r.trim();
        r
    }
}
