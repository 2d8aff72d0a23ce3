//! Dense truncated power series in one to three variables.
//!
//! Each variable carries its own truncation bound. A *precision* variable `X`
//! of order `N` means the series is known modulo `X^N`; a *truncated* variable
//! `v` of order `q` is a genuine element of `R[v]/(v^q)`. The distinction only
//! matters for substitution, where a truncated variable may be sent only to an
//! element whose `q`-th power vanishes.

use std::fmt;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::ratfn::RatFn;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: String,
    pub order: usize,
    pub truncated: bool,
}

impl Var {
    /// A variable known to precision `order`.
    pub fn precision(name: &str, order: usize) -> Self {
        Var {
            name: name.to_string(),
            order,
            truncated: false,
        }
    }

    /// A nilpotent variable with `v^order = 0`.
    pub fn truncated(name: &str, order: usize) -> Self {
        Var {
            name: name.to_string(),
            order,
            truncated: true,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncSeries<C> {
    p: u64,
    vars: Vec<Var>,
    coeffs: Vec<C>,
}

pub type ScalarSeries = TruncSeries<Scalar>;
pub type RatSeries = TruncSeries<RatFn>;

fn table_len(vars: &[Var]) -> usize {
    vars.iter().map(|v| v.order).product()
}

impl<C: Coeff> TruncSeries<C> {
    pub fn zero(p: u64, vars: Vec<Var>) -> Self {
        assert!(
            (1..=3).contains(&vars.len()),
            "series need between one and three variables"
        );
        assert!(vars.iter().all(|v| v.order > 0), "zero truncation order");
        let n = table_len(&vars);
        TruncSeries {
            p,
            vars,
            coeffs: vec![C::zero(p); n],
        }
    }

    pub fn one(p: u64, vars: Vec<Var>) -> Self {
        Self::constant(C::one(p), vars)
    }

    pub fn constant(c: C, vars: Vec<Var>) -> Self {
        let mut s = Self::zero(c.modulus(), vars);
        s.coeffs[0] = c;
        s
    }

    /// The series consisting of the `k`-th variable.
    pub fn variable(p: u64, vars: Vec<Var>, k: usize) -> Self {
        let mut exps = vec![0; vars.len()];
        exps[k] = 1;
        Self::monomial(C::one(p), vars, &exps)
    }

    pub fn monomial(c: C, vars: Vec<Var>, exps: &[usize]) -> Self {
        let mut s = Self::zero(c.modulus(), vars);
        if let Some(i) = s.index_of(exps) {
            s.coeffs[i] = c;
        }
        s
    }

    /// A univariate series; `coeffs` is padded with zeros or cut to the order.
    pub fn univariate(p: u64, var: Var, mut coeffs: Vec<C>) -> Self {
        coeffs.resize(var.order, C::zero(p));
        TruncSeries {
            p,
            vars: vec![var],
            coeffs,
        }
    }

    /// Builds a series from a dense table in row-major exponent order.
    pub fn from_table(p: u64, vars: Vec<Var>, coeffs: Vec<C>) -> Result<Self> {
        if coeffs.len() != table_len(&vars) {
            return Err(Error::DimensionMismatch(format!(
                "table has {} entries, variables need {}",
                coeffs.len(),
                table_len(&vars)
            )));
        }
        Ok(TruncSeries { p, vars, coeffs })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    /// Order of the first variable; the natural length of a univariate series.
    pub fn order(&self) -> usize {
        self.vars[0].order
    }

    pub fn raw(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_raw(self) -> Vec<C> {
        self.coeffs
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.vars.len()];
        for k in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.vars[k + 1].order;
        }
        strides
    }

    pub fn index_of(&self, exps: &[usize]) -> Option<usize> {
        assert_eq!(exps.len(), self.vars.len());
        let mut idx = 0;
        for (e, v) in exps.iter().zip(&self.vars) {
            if *e >= v.order {
                return None;
            }
            idx = idx * v.order + e;
        }
        Some(idx)
    }

    pub fn exponents_of(&self, mut idx: usize) -> Vec<usize> {
        let mut exps = vec![0; self.vars.len()];
        for k in (0..self.vars.len()).rev() {
            let o = self.vars[k].order;
            exps[k] = idx % o;
            idx /= o;
        }
        exps
    }

    /// Coefficient at an exponent tuple; zero outside the table.
    pub fn coeff(&self, exps: &[usize]) -> C {
        match self.index_of(exps) {
            Some(i) => self.coeffs[i].clone(),
            None => C::zero(self.p),
        }
    }

    /// Coefficient of a univariate series; zero beyond the order.
    pub fn coeff1(&self, i: usize) -> &C {
        debug_assert_eq!(self.vars.len(), 1);
        &self.coeffs[i]
    }

    pub fn set(&mut self, exps: &[usize], c: C) {
        let i = self.index_of(exps).expect("exponent outside truncation");
        self.coeffs[i] = c;
    }

    pub fn constant_term(&self) -> &C {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Nonzero terms as `(exponents, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &C)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.exponents_of(i), c))
    }

    /// Smallest total degree of a nonzero term.
    pub fn valuation(&self) -> Option<usize> {
        self.terms().map(|(e, _)| e.iter().sum()).min()
    }

    fn same_ring(&self, o: &Self) -> Result<()> {
        if self.p != o.p {
            return Err(Error::CharacteristicMismatch(self.p, o.p));
        }
        if self.vars != o.vars {
            return Err(Error::VariableMismatch(format!("{:?} vs {:?}", self.vars, o.vars)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_ring(o)?;
        Ok(self.zip(o, |a, b| a.add(b)))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_ring(o)?;
        Ok(self.zip(o, |a, b| a.sub(b)))
    }

    fn zip(&self, o: &Self, f: impl Fn(&C, &C) -> C) -> Self {
        TruncSeries {
            p: self.p,
            vars: self.vars.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, s: Scalar) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn scale_by(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.p, self.vars.clone());
        }
        self.map(|a| if a.is_zero() { a.clone() } else { a.mul(c) })
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        TruncSeries {
            p: self.p,
            vars: self.vars.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Maps coefficients into another field.
    pub fn map_into<D: Coeff>(&self, f: impl Fn(&C) -> D) -> TruncSeries<D> {
        TruncSeries {
            p: self.p,
            vars: self.vars.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Same coefficients with renamed or re-kinded variables of equal orders.
    pub fn with_vars(&self, vars: Vec<Var>) -> Self {
        assert_eq!(table_len(&vars), table_len(&self.vars));
        assert!(vars.iter().zip(&self.vars).all(|(a, b)| a.order == b.order));
        TruncSeries {
            p: self.p,
            vars,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Re-truncates a univariate series to `order`, padding with zeros.
    pub fn with_order(&self, order: usize) -> Self {
        assert_eq!(self.vars.len(), 1, "with_order is univariate");
        let mut var = self.vars[0].clone();
        var.order = order;
        Self::univariate(self.p, var, self.coeffs.clone())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_ring(o)?;
        Ok(self.mul_unchecked(o))
    }

    fn mul_unchecked(&self, o: &Self) -> Self {
        let p = self.p;
        let mut out = vec![C::zero(p); self.coeffs.len()];
        if self.vars.len() == 1 {
            let n = self.coeffs.len();
            let rhs: Vec<(usize, &C)> = o.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
            for (i, a) in self.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for &(j, b) in &rhs {
                    if i + j >= n {
                        break;
                    }
                    let prod = a.mul(b);
                    out[i + j] = out[i + j].add(&prod);
                }
            }
        } else {
            let strides = self.strides();
            let lhs: Vec<(usize, Vec<usize>)> = self
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, _)| (i, self.exponents_of(i)))
                .collect();
            let rhs: Vec<(usize, Vec<usize>)> = o
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, _)| (i, o.exponents_of(i)))
                .collect();
            for (i, ea) in &lhs {
                let a = &self.coeffs[*i];
                'pair: for (j, eb) in &rhs {
                    let mut idx = 0;
                    for k in 0..ea.len() {
                        let e = ea[k] + eb[k];
                        if e >= self.vars[k].order {
                            continue 'pair;
                        }
                        idx += e * strides[k];
                    }
                    let prod = a.mul(&o.coeffs[*j]);
                    out[idx] = out[idx].add(&prod);
                }
            }
        }
        TruncSeries {
            p,
            vars: self.vars.clone(),
            coeffs: out,
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.p, self.vars.clone());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn invert(&self) -> Result<Self> {
        let c0_inv = self.coeffs[0].inv().ok_or(Error::NonUnit)?;
        let p = self.p;
        if self.vars.len() == 1 {
            let n = self.coeffs.len();
            let mut out: Vec<C> = Vec::with_capacity(n);
            out.push(c0_inv.clone());
            for k in 1..n {
                let mut acc = C::zero(p);
                for i in 1..=k {
                    let a = &self.coeffs[i];
                    if a.is_zero() || out[k - i].is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(&out[k - i]));
                }
                out.push(acc.mul(&c0_inv).neg());
            }
            return Ok(TruncSeries {
                p,
                vars: self.vars.clone(),
                coeffs: out,
            });
        }
        // u = c0 (1 - h) with h nilpotent modulo the truncation.
        let mut h = self.scale_by(&c0_inv).neg();
        h.coeffs[0] = C::zero(p);
        let mut term = Self::one(p, self.vars.clone());
        let mut acc = term.clone();
        loop {
            term = term.mul_unchecked(&h);
            if term.is_zero() {
                break;
            }
            acc = acc.zip(&term, |a, b| a.add(b));
        }
        Ok(acc.scale_by(&c0_inv))
    }

    /// Substitutes `subs[k]` for the `k`-th variable: the evaluation map
    /// `ev_(s_1, ..., s_k)`. Every substitution must lie in the maximal ideal
    /// and, for truncated source variables, be nilpotent of the matching order.
    pub fn compose(&self, subs: &[Self]) -> Result<Self> {
        if subs.len() != self.vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} substitutions for {} variables",
                subs.len(),
                self.vars.len()
            )));
        }
        let target = subs[0].vars.clone();
        for (s, v) in subs.iter().zip(&self.vars) {
            if s.p != self.p {
                return Err(Error::CharacteristicMismatch(self.p, s.p));
            }
            if s.vars != target {
                return Err(Error::VariableMismatch("substitutions live in different rings".into()));
            }
            if !s.constant_term().is_zero() {
                return Err(Error::NonZeroConstantTerm(v.name.clone()));
            }
        }
        // Highest exponent actually used per source variable.
        let mut max_exp = vec![0usize; self.vars.len()];
        for (exps, _) in self.terms() {
            for (m, e) in max_exp.iter_mut().zip(exps) {
                *m = (*m).max(e);
            }
        }
        let mut powers: Vec<Vec<Self>> = Vec::with_capacity(subs.len());
        for (k, s) in subs.iter().enumerate() {
            let mut pw = vec![Self::one(self.p, target.clone())];
            for e in 1..=max_exp[k] {
                let next = pw[e - 1].mul_unchecked(s);
                pw.push(next);
            }
            if self.vars[k].truncated {
                let order = self.vars[k].order;
                let nil = if order <= max_exp[k] {
                    pw[order].is_zero()
                } else {
                    let last = pw.last().unwrap().clone();
                    last.mul_unchecked(&s.pow((order - max_exp[k]) as u64)).is_zero()
                };
                if !nil {
                    return Err(Error::NotNilpotent {
                        var: self.vars[k].name.clone(),
                        order,
                    });
                }
            }
            powers.push(pw);
        }
        let strides = self.strides();
        let out = self
            .eval_level(0, 0, &strides, &powers)
            .unwrap_or_else(|| Self::zero(self.p, target.clone()));
        Ok(out)
    }

    fn eval_level(&self, level: usize, base: usize, strides: &[usize], powers: &[Vec<Self>]) -> Option<Self> {
        let order = self.vars[level].order;
        let last = level + 1 == self.vars.len();
        let mut acc: Option<Self> = None;
        for e in 0..order {
            let idx = base + e * strides[level];
            let term = if last {
                let c = &self.coeffs[idx];
                if c.is_zero() {
                    continue;
                }
                powers[level][e].scale_by(c)
            } else {
                match self.eval_level(level + 1, idx, strides, powers) {
                    None => continue,
                    Some(inner) => {
                        if e == 0 {
                            inner
                        } else {
                            powers[level][e].mul_unchecked(&inner)
                        }
                    }
                }
            };
            acc = Some(match acc {
                None => term,
                Some(a) => a.zip(&term, |x, y| x.add(y)),
            });
        }
        acc
    }

    /// First exponent tuple (in row-major order) where `self` and `o` differ,
    /// restricted to tuples accepted by `filter`.
    pub fn first_difference(&self, o: &Self, filter: impl Fn(&[usize]) -> bool) -> Result<Option<Vec<usize>>> {
        self.same_ring(o)?;
        for (i, (a, b)) in self.coeffs.iter().zip(&o.coeffs).enumerate() {
            if a != b {
                let exps = self.exponents_of(i);
                if filter(&exps) {
                    return Ok(Some(exps));
                }
            }
        }
        Ok(None)
    }
}

impl TruncSeries<Scalar> {
    /// Embeds an F_p series into F_p(t).
    pub fn lift(&self) -> RatSeries {
        self.map_into(|c| RatFn::from_scalar(*c))
    }
}

impl<C: Coeff> fmt::Display for TruncSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (exps, c) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mono: Vec<String> = exps
                .iter()
                .zip(&self.vars)
                .filter(|(e, _)| **e > 0)
                .map(|(e, v)| {
                    if *e == 1 {
                        v.name.clone()
                    } else {
                        format!("{}^{}", v.name, e)
                    }
                })
                .collect();
            let cs = c.to_string();
            if mono.is_empty() {
                f.write_str(&cs)?;
            } else if cs == "1" {
                f.write_str(&mono.join("*"))?;
            } else if cs.contains(['+', '/']) {
                write!(f, "({})*{}", cs, mono.join("*"))?;
            } else {
                write!(f, "{}*{}", cs, mono.join("*"))?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        let orders: Vec<String> = self.vars.iter().map(|v| format!("{}^{}", v.name, v.order)).collect();
        write!(f, " + O({})", orders.join(", "))
    }
}

impl<C: Coeff> fmt::Debug for TruncSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_ratfn;

    fn sx(p: u64, order: usize, c: &[i64]) -> ScalarSeries {
        TruncSeries::univariate(
            p,
            Var::precision("X", order),
            c.iter().map(|&v| Scalar::new(v, p)).collect(),
        )
    }

    #[test]
    fn freshman_dream_in_series() {
        let a = sx(2, 3, &[1, 1]);
        assert_eq!(a.mul(&a).unwrap(), sx(2, 3, &[1, 0, 1]));
    }

    #[test]
    fn truncation_kills_overflow() {
        let n = 6;
        let mut hi = vec![0; n];
        hi[n - 1] = 1;
        let a = sx(3, n, &hi);
        let x = sx(3, n, &[0, 1]);
        assert!(a.mul(&x).unwrap().is_zero());
    }

    #[test]
    fn difference_of_squares_over_rational_functions() {
        let p = 5;
        let var = Var::precision("X", 3);
        let t = parse_ratfn("t", p).unwrap();
        let a = TruncSeries::univariate(p, var.clone(), vec![RatFn::one(p), t.clone()]);
        let b = TruncSeries::univariate(p, var.clone(), vec![RatFn::one(p), -&t]);
        let expect = TruncSeries::univariate(
            p,
            var,
            vec![RatFn::one(p), RatFn::zero(p), parse_ratfn("4*t^2", p).unwrap()],
        );
        assert_eq!(a.mul(&b).unwrap(), expect);
    }

    #[test]
    fn mismatched_variables_rejected() {
        let a = sx(3, 4, &[1]);
        let b = sx(3, 5, &[1]);
        assert!(matches!(a.mul(&b), Err(Error::VariableMismatch(_))));
    }

    #[test]
    fn geometric_series_inverse() {
        let inv = sx(2, 3, &[1, 1]).invert().unwrap();
        assert_eq!(inv, sx(2, 3, &[1, 1, 1]));
        assert_eq!(sx(2, 3, &[1]).invert().unwrap(), sx(2, 3, &[1]));
        assert_eq!(sx(2, 3, &[0, 1]).invert(), Err(Error::NonUnit));
    }

    #[test]
    fn inverse_of_t_plus_x() {
        let p = 3;
        let var = Var::precision("X", 2);
        let u = TruncSeries::univariate(p, var.clone(), vec![RatFn::t(p), RatFn::one(p)]);
        let inv = u.invert().unwrap();
        assert_eq!(inv.coeff1(0), &parse_ratfn("1/t", p).unwrap());
        assert_eq!(inv.coeff1(1), &parse_ratfn("-1/t^2", p).unwrap());
        assert!(u.mul(&inv).unwrap() == TruncSeries::one(p, vec![var]));
    }

    #[test]
    fn compose_sum_squared_in_char_two() {
        let p = 2;
        let xy = vec![Var::precision("X", 4), Var::precision("Y", 4)];
        let f = sx(p, 4, &[0, 0, 1]);
        let x = ScalarSeries::variable(p, xy.clone(), 0);
        let y = ScalarSeries::variable(p, xy.clone(), 1);
        let s = x.add(&y).unwrap();
        let got = f.compose(&[s]).unwrap();
        let expect = x.mul(&x).unwrap().add(&y.mul(&y).unwrap()).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn compose_with_square() {
        let f = sx(7, 8, &[0, 1, 0, 1]);
        let s = sx(7, 8, &[0, 0, 1]);
        assert_eq!(f.compose(&[s]).unwrap(), sx(7, 8, &[0, 0, 1, 0, 0, 0, 1]));
    }

    #[test]
    fn compose_rejects_units_and_non_nilpotent_targets() {
        let f = sx(3, 4, &[0, 1]);
        assert!(matches!(
            f.compose(&[sx(3, 4, &[1, 1])]),
            Err(Error::NonZeroConstantTerm(_))
        ));
        // v in F_3[v]/(v^3) cannot go to X in a ring where X^3 != 0.
        let g = TruncSeries::univariate(3, Var::truncated("v", 3), vec![Scalar::zero(3), Scalar::one(3)]);
        let target = sx(3, 9, &[0, 1]);
        assert!(matches!(g.compose(&[target]), Err(Error::NotNilpotent { .. })));
        let ok = sx(3, 9, &[0, 0, 0, 1]);
        assert!(g.compose(&[ok]).is_ok());
    }

    #[test]
    fn multivariate_inverse() {
        let p = 3;
        let xy = vec![Var::precision("X", 4), Var::precision("Y", 4)];
        let x = ScalarSeries::variable(p, xy.clone(), 0);
        let y = ScalarSeries::variable(p, xy.clone(), 1);
        let u = ScalarSeries::one(p, xy.clone())
            .add(&x)
            .unwrap()
            .add(&x.mul(&y).unwrap().scale(Scalar::new(2, p)))
            .unwrap();
        let inv = u.invert().unwrap();
        assert_eq!(u.mul(&inv).unwrap(), ScalarSeries::one(p, xy));
    }
}
