//! The coefficient fields a series or matrix can live over.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use crate::field::Scalar;
use crate::ratfn::RatFn;

/// A field of characteristic p that contains F_p.
///
/// Implemented for [`Scalar`] (F_p itself) and [`RatFn`] (F_p(t)).
pub trait Coeff: Clone + PartialEq + Eq + Hash + Debug + Display + Send + Sync {
    fn zero(p: u64) -> Self;
    fn one(p: u64) -> Self;
    fn from_scalar(s: Scalar) -> Self;
    fn modulus(&self) -> u64;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn scale(&self, s: Scalar) -> Self;
}

impl Coeff for Scalar {
    fn zero(p: u64) -> Self {
        Scalar::zero(p)
    }
    fn one(p: u64) -> Self {
        Scalar::one(p)
    }
    fn from_scalar(s: Scalar) -> Self {
        s
    }
    fn modulus(&self) -> u64 {
        Scalar::modulus(self)
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn inv(&self) -> Option<Self> {
        Scalar::inv(self)
    }
    fn scale(&self, s: Scalar) -> Self {
        *self * s
    }
}

impl Coeff for RatFn {
    fn zero(p: u64) -> Self {
        RatFn::zero(p)
    }
    fn one(p: u64) -> Self {
        RatFn::one(p)
    }
    fn from_scalar(s: Scalar) -> Self {
        RatFn::from_scalar(s)
    }
    fn modulus(&self) -> u64 {
        RatFn::modulus(self)
    }
    fn is_zero(&self) -> bool {
        RatFn::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        RatFn::inv(self).ok()
    }
    fn scale(&self, s: Scalar) -> Self {
        RatFn::scale(self, s)
    }
}
