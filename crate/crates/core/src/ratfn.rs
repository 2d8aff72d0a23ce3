//! Rational functions in one variable over F_p, kept in lowest terms.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::poly::Poly;

/// An element of F_p(t).
///
/// Invariant: `den` is monic and nonzero, `gcd(num, den) = 1`, and zero is
/// stored as `0/1`. Every constructor and operation restores this form, so
/// derived equality and hashing are exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

/// The field operations exposed by [`ratfn_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatOp {
    Add,
    Mul,
    Div,
}

/// Applies `op` to `a` and `b`, reporting division by zero as an error.
pub fn ratfn_arith(a: &RatFn, b: &RatFn, op: RatOp) -> Result<RatFn> {
    if a.modulus() != b.modulus() {
        return Err(Error::CharacteristicMismatch(a.modulus(), b.modulus()));
    }
    match op {
        RatOp::Add => Ok(a + b),
        RatOp::Mul => Ok(a * b),
        RatOp::Div => a.checked_div(b),
    }
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        let p = num.modulus();
        if num.is_zero() {
            return RatFn { num, den: Poly::one(p) };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g), den.div_exact(&g))
        };
        let lead = den.lead();
        if lead.value() == 1 {
            RatFn { num, den }
        } else {
            let inv = lead.inv().expect("nonzero leading coefficient");
            RatFn {
                num: num.scale(inv),
                den: den.scale(inv),
            }
        }
    }

    pub fn from_poly(num: Poly) -> Self {
        let p = num.modulus();
        RatFn { num, den: Poly::one(p) }
    }

    pub fn from_scalar(c: Scalar) -> Self {
        RatFn::from_poly(Poly::constant(c))
    }

    pub fn from_i64(c: i64, p: u64) -> Self {
        RatFn::from_scalar(Scalar::new(c, p))
    }

    pub fn zero(p: u64) -> Self {
        RatFn::from_poly(Poly::zero(p))
    }

    pub fn one(p: u64) -> Self {
        RatFn::from_poly(Poly::one(p))
    }

    /// The generator `t`.
    pub fn t(p: u64) -> Self {
        RatFn::from_poly(Poly::t(p))
    }

    pub fn modulus(&self) -> u64 {
        self.num.modulus()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True for elements of F_p.
    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// The F_p value of a constant element.
    pub fn as_scalar(&self) -> Option<Scalar> {
        if self.is_constant() {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }

    pub fn inv(&self) -> Result<RatFn> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalize(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, o: &RatFn) -> Result<RatFn> {
        Ok(self * &o.inv()?)
    }

    pub fn scale(&self, c: Scalar) -> RatFn {
        if c.is_zero() {
            return RatFn::zero(self.modulus());
        }
        RatFn {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: u64) -> RatFn {
        // Powers of coprime polynomials stay coprime.
        RatFn {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    /// Formal derivative d/dt.
    pub fn derivative(&self) -> RatFn {
        let top = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::normalize(top, &self.den * &self.den)
    }

    /// `self(t^q)`.
    pub fn inflate(&self, q: usize) -> RatFn {
        // Frobenius-type substitution keeps coprimality; the denominator stays monic.
        RatFn {
            num: self.num.inflate(q),
            den: self.den.inflate(q),
        }
    }

    /// `self(inner)`.
    pub fn compose(&self, inner: &RatFn) -> Result<RatFn> {
        let n = eval_poly_at(&self.num, inner);
        let d = eval_poly_at(&self.den, inner);
        n.checked_div(&d)
    }

    /// Formats using `var` as the variable name, e.g. `(t+1)/(t^2+1)`.
    pub fn format_with(&self, var: &str) -> String {
        let num = self.num.format_with(var);
        if self.den.is_one() {
            return num;
        }
        let den = self.den.format_with(var);
        let wrap = |s: String, poly: &Poly| {
            if poly.term_count() > 1 || (poly.term_count() == 1 && s.contains('*')) {
                format!("({s})")
            } else {
                s
            }
        };
        format!("{}/{}", wrap(num, &self.num), wrap(den, &self.den))
    }
}

fn eval_poly_at(u: &Poly, x: &RatFn) -> RatFn {
    let p = u.modulus();
    let mut acc = RatFn::zero(p);
    for i in (0..u.raw().len()).rev() {
        acc = &(&acc * x) + &RatFn::from_scalar(u.coeff(i));
    }
    acc
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_with("t"))
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFn[{}]({})", self.modulus(), self)
    }
}

impl<'a> Add<&'a RatFn> for &'a RatFn {
    type Output = RatFn;
    fn add(self, o: &RatFn) -> RatFn {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return RatFn::normalize(&self.num + &o.num, self.den.clone());
        }
        let g = self.den.gcd(&o.den);
        if g.is_one() {
            let num = &(&self.num * &o.den) + &(&o.num * &self.den);
            return RatFn::normalize(num, &self.den * &o.den);
        }
        let a = self.den.div_exact(&g);
        let b = o.den.div_exact(&g);
        let num = &(&self.num * &b) + &(&o.num * &a);
        RatFn::normalize(num, &(&a * &b) * &g)
    }
}

impl<'a> Sub<&'a RatFn> for &'a RatFn {
    type Output = RatFn;
    fn sub(self, o: &RatFn) -> RatFn {
        self + &(-o)
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl<'a> Mul<&'a RatFn> for &'a RatFn {
    type Output = RatFn;
    fn mul(self, o: &RatFn) -> RatFn {
        if self.is_zero() || o.is_zero() {
            return RatFn::zero(self.modulus());
        }
        if self.is_polynomial() && o.is_polynomial() {
            return RatFn::from_poly(&self.num * &o.num);
        }
        // Cross-cancel so the product is already reduced.
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let (n1, d2) = if g1.is_one() {
            (self.num.clone(), o.den.clone())
        } else {
            (self.num.div_exact(&g1), o.den.div_exact(&g1))
        };
        let (n2, d1) = if g2.is_one() {
            (o.num.clone(), self.den.clone())
        } else {
            (o.num.div_exact(&g2), self.den.div_exact(&g2))
        };
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let lead = den.lead();
        if lead.value() == 1 {
            RatFn { num, den }
        } else {
            let inv = lead.inv().expect("nonzero leading coefficient");
            RatFn {
                num: num.scale(inv),
                den: den.scale(inv),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_ratfn;

    fn r(s: &str, p: u64) -> RatFn {
        parse_ratfn(s, p).unwrap()
    }

    #[test]
    fn characteristic_two_cancellation() {
        let a = r("1/t", 2);
        assert!(ratfn_arith(&a, &a, RatOp::Add).unwrap().is_zero());
    }

    #[test]
    fn square_over_linear_in_f2() {
        let q = ratfn_arith(&r("t^2+1", 2), &r("t+1", 2), RatOp::Div).unwrap();
        assert_eq!(q, r("t+1", 2));
    }

    #[test]
    fn product_cancels() {
        let q = ratfn_arith(&r("1/t", 3), &r("t/(t+1)", 3), RatOp::Mul).unwrap();
        assert_eq!(q, r("1/(t+1)", 3));
        assert_eq!(q.den(), &Poly::from_i64(3, &[1, 1]));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            ratfn_arith(&RatFn::one(5), &RatFn::zero(5), RatOp::Div),
            Err(Error::DivisionByZero)
        );
        assert!(RatFn::new(Poly::one(5), Poly::zero(5)).is_err());
    }

    #[test]
    fn mismatched_characteristic_is_an_error() {
        assert_eq!(
            ratfn_arith(&RatFn::one(5), &RatFn::one(3), RatOp::Add),
            Err(Error::CharacteristicMismatch(5, 3))
        );
    }

    #[test]
    fn normal_form_has_monic_denominator() {
        let x = RatFn::new(Poly::from_i64(5, &[1]), Poly::from_i64(5, &[0, 2])).unwrap();
        assert_eq!(x.den(), &Poly::t(5));
        assert_eq!(x.num(), &Poly::from_i64(5, &[3]));
    }

    #[test]
    fn derivative_of_inverse() {
        let x = r("1/t", 7);
        assert_eq!(x.derivative(), r("-1/t^2", 7));
    }

    #[test]
    fn compose_with_rational() {
        let x = r("t^2+t", 3);
        assert_eq!(x.compose(&r("1/t", 3)).unwrap(), r("(t+1)/t^2", 3));
    }
}
