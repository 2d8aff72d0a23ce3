//! Newton iteration for roots of polynomials whose coefficients are power
//! series over F_p(t).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ratfn::RatFn;
use crate::series::RatSeries;

/// `P(S) = sum_k coeffs[k] * S^k`, coefficients univariate series in one ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesPoly {
    coeffs: Vec<RatSeries>,
}

impl SeriesPoly {
    pub fn new(coeffs: Vec<RatSeries>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::Invalid("polynomial without coefficients".into()));
        };
        if first.vars().len() != 1 {
            return Err(Error::Invalid("series coefficients must be univariate".into()));
        }
        if coeffs.iter().any(|c| c.vars() != first.vars()) {
            return Err(Error::VariableMismatch("coefficients in different rings".into()));
        }
        Ok(SeriesPoly { coeffs })
    }

    pub fn coeffs(&self) -> &[RatSeries] {
        &self.coeffs
    }

    pub fn eval(&self, s: &RatSeries) -> Result<RatSeries> {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(s)?.add(c)?;
        }
        Ok(acc)
    }

    /// Formal derivative in `S`.
    pub fn derivative(&self) -> SeriesPoly {
        let p = self.coeffs[0].modulus();
        let mut coeffs: Vec<RatSeries> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(crate::field::Scalar::from_u64(k as u64, p)))
            .collect();
        if coeffs.is_empty() {
            coeffs.push(self.coeffs[0].map(|_| RatFn::zero(p)));
        }
        SeriesPoly { coeffs }
    }
}

/// Finds the unique root `s` of `poly` with constant term `r0`.
///
/// Requires `P(r0) = 0` at order zero and `P'(r0)` a unit there. Newton's
/// method doubles the number of correct coefficients per step; `budget`
/// bounds the number of steps.
pub fn series_poly_root(poly: &SeriesPoly, r0: &RatFn, budget: Option<usize>) -> Result<RatSeries> {
    let var = poly.coeffs[0].vars()[0].clone();
    let seed = RatSeries::univariate(r0.modulus(), var, vec![r0.clone()]);
    newton(poly, seed, 1, budget).map(|(s, _)| s)
}

fn newton(
    poly: &SeriesPoly,
    mut s: RatSeries,
    mut correct: usize,
    budget: Option<usize>,
) -> Result<(RatSeries, usize)> {
    let order = s.order();
    let deriv = poly.derivative();
    if !poly.eval(&s)?.coeff1(0).is_zero() {
        return Err(Error::NoRootAtOrderZero);
    }
    if deriv.eval(&s)?.coeff1(0).is_zero() {
        return Err(Error::InseparablePoint);
    }
    let mut steps = 0;
    while correct < order {
        if budget.is_some_and(|b| steps >= b) {
            return Err(Error::StepBudgetExhausted(budget.unwrap()));
        }
        let value = poly.eval(&s)?;
        let slope = deriv.eval(&s)?.invert()?;
        s = s.sub(&value.mul(&slope)?)?;
        correct *= 2;
        steps += 1;
    }
    if !poly.eval(&s)?.is_zero() {
        return Err(Error::Inconsistent("Newton iteration did not converge".into()));
    }
    Ok((s, steps))
}

/// Builds the polynomial whose root is being lifted, at a requested order.
pub type PolyAtOrder = Arc<dyn Fn(usize) -> Result<SeriesPoly> + Send + Sync>;

/// A Hensel lift that can be resumed to higher precision without starting
/// over: the current root seeds the next Newton run.
#[derive(Clone)]
pub struct HenselLift {
    make_poly: PolyAtOrder,
    root: RatSeries,
    steps: usize,
}

impl HenselLift {
    pub fn new(make_poly: PolyAtOrder, r0: &RatFn, order: usize, budget: Option<usize>) -> Result<Self> {
        let poly = make_poly(order)?;
        let var = poly.coeffs[0].vars()[0].clone();
        let seed = RatSeries::univariate(r0.modulus(), var, vec![r0.clone()]);
        let (root, steps) = newton(&poly, seed, 1, budget)?;
        Ok(HenselLift { make_poly, root, steps })
    }

    pub fn root(&self) -> &RatSeries {
        &self.root
    }

    /// Total Newton steps spent so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Continues the lift to `order` coefficients.
    pub fn extend_to(&mut self, order: usize, budget: Option<usize>) -> Result<&RatSeries> {
        let have = self.root.order();
        if order <= have {
            return Ok(&self.root);
        }
        let poly = (self.make_poly)(order)?;
        let (root, steps) = newton(&poly, self.root.with_order(order), have, budget)?;
        self.root = root;
        self.steps += steps;
        Ok(&self.root)
    }
}

impl std::fmt::Debug for HenselLift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HenselLift")
            .field("root", &self.root)
            .field("steps", &self.steps)
            .finish()
    }
}
