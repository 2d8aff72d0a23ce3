//! Formal and truncated one-dimensional group laws over F_p.
//!
//! Every law handled here is a polynomial `F(X, Y) = sum c_ij X^i Y^j`, so a
//! formal law can be produced to any order and a truncated law is the exact
//! element of `F_p[v, w] / (v^q, w^q)` with `q = p^m`.

use std::fmt;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::field::{check_prime, pow_usize, Scalar};
use crate::series::{ScalarSeries, TruncSeries, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LawKind {
    Formal,
    /// An `m`-truncated law, living modulo `v^(p^m)` and `w^(p^m)`.
    Truncated {
        m: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LawTag {
    Additive,
    Multiplicative,
    /// `X + Y + cXY`.
    Mixed(Scalar),
    Custom,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupLaw {
    p: u64,
    kind: LawKind,
    tag: LawTag,
    /// Nonzero terms `(i, j, c_ij)`, sorted by `(i, j)`.
    terms: Vec<(usize, usize, Scalar)>,
}

/// Builds `X + Y` (additive), `X + Y + XY` (multiplicative) or `X + Y + cXY`.
pub fn make_law(tag: LawTag, p: u64, kind: LawKind) -> Result<GroupLaw> {
    check_prime(p)?;
    let one = Scalar::one(p);
    let mut terms = vec![(0, 1, one), (1, 0, one)];
    match tag {
        LawTag::Additive => {}
        LawTag::Multiplicative => terms.push((1, 1, one)),
        LawTag::Mixed(c) => {
            if c.modulus() != p {
                return Err(Error::CharacteristicMismatch(p, c.modulus()));
            }
            if !c.is_zero() {
                terms.push((1, 1, c));
            }
        }
        LawTag::Custom => return Err(Error::Invalid("custom laws are built with GroupLaw::custom".into())),
    }
    GroupLaw::build(p, kind, tag, terms)
}

impl GroupLaw {
    /// A law given by its coefficient table; the axioms are not checked here.
    pub fn custom(p: u64, kind: LawKind, table: &[(usize, usize, i64)]) -> Result<Self> {
        check_prime(p)?;
        let terms = table.iter().map(|&(i, j, c)| (i, j, Scalar::new(c, p))).collect();
        Self::build(p, kind, LawTag::Custom, terms)
    }

    fn build(p: u64, kind: LawKind, tag: LawTag, raw: Vec<(usize, usize, Scalar)>) -> Result<Self> {
        if kind == (LawKind::Truncated { m: 0 }) {
            return Err(Error::ZeroLevel);
        }
        let mut terms: Vec<(usize, usize, Scalar)> = Vec::new();
        let mut raw = raw;
        raw.sort_by_key(|&(i, j, _)| (i, j));
        for (i, j, c) in raw {
            if i == 0 && j == 0 && !c.is_zero() {
                return Err(Error::NonZeroConstantTerm("F".into()));
            }
            match terms.last_mut() {
                Some(last) if (last.0, last.1) == (i, j) => last.2 = last.2 + c,
                _ => terms.push((i, j, c)),
            }
        }
        let q = match kind {
            LawKind::Formal => usize::MAX,
            LawKind::Truncated { m } => pow_usize(p, m),
        };
        terms.retain(|&(i, j, c)| !c.is_zero() && i < q && j < q);
        Ok(GroupLaw { p, kind, tag, terms })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn tag(&self) -> LawTag {
        self.tag
    }

    pub fn terms(&self) -> &[(usize, usize, Scalar)] {
        &self.terms
    }

    /// `p^m` for a truncated law.
    pub fn q(&self) -> Option<usize> {
        match self.kind {
            LawKind::Formal => None,
            LawKind::Truncated { m } => Some(pow_usize(self.p, m)),
        }
    }

    /// The coefficient of `X^i Y^j`.
    pub fn coeff(&self, i: usize, j: usize) -> Scalar {
        self.terms
            .iter()
            .find(|&&(a, b, _)| (a, b) == (i, j))
            .map(|&(_, _, c)| c)
            .unwrap_or(Scalar::zero(self.p))
    }

    /// The natural variable of this law: precision `order` when formal,
    /// nilpotent of order `q` when truncated.
    pub fn var(&self, name: &str, order: usize) -> Var {
        match self.q() {
            None => Var::precision(name, order),
            Some(q) => Var::truncated(name, q),
        }
    }

    /// `F(a, b)` for series in a common ring.
    pub fn apply<C: Coeff>(&self, a: &TruncSeries<C>, b: &TruncSeries<C>) -> Result<TruncSeries<C>> {
        if a.modulus() != self.p {
            return Err(Error::CharacteristicMismatch(self.p, a.modulus()));
        }
        let max_i = self.terms.iter().map(|t| t.0).max().unwrap_or(0);
        let max_j = self.terms.iter().map(|t| t.1).max().unwrap_or(0);
        let pa = powers(a, max_i)?;
        let pb = powers(b, max_j)?;
        let mut acc = TruncSeries::zero(self.p, a.vars().to_vec());
        for &(i, j, c) in &self.terms {
            acc = acc.add(&pa[i].mul(&pb[j])?.scale(c))?;
        }
        Ok(acc)
    }

    /// `F(X, Y)` in two fresh variables (`X, Y` formal, `v, w` truncated).
    pub fn series(&self, order: usize) -> ScalarSeries {
        let (x, y) = match self.kind {
            LawKind::Formal => ("X", "Y"),
            LawKind::Truncated { .. } => ("v", "w"),
        };
        let vars = vec![self.var(x, order), self.var(y, order)];
        let vx = ScalarSeries::variable(self.p, vars.clone(), 0);
        let vy = ScalarSeries::variable(self.p, vars, 1);
        self.apply(&vx, &vy).expect("law variables share a ring")
    }

    pub fn is_commutative(&self) -> bool {
        self.terms.iter().all(|&(i, j, c)| self.coeff(j, i) == c)
    }

    pub fn format_with(&self, x: &str, y: &str) -> String {
        let mut out = String::new();
        let mut terms = self.terms.clone();
        terms.sort_by_key(|&(i, j, _)| (i + j, std::cmp::Reverse(i)));
        for (i, j, c) in terms {
            if !out.is_empty() {
                out.push('+');
            }
            let mut factors: Vec<String> = Vec::new();
            if c.value() != 1 {
                factors.push(c.value().to_string());
            }
            for (var, e) in [(x, i), (y, j)] {
                match e {
                    0 => {}
                    1 => factors.push(var.to_string()),
                    _ => factors.push(format!("{var}^{e}")),
                }
            }
            out.push_str(&factors.join("*"));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for GroupLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LawKind::Formal => f.write_str(&self.format_with("X", "Y")),
            LawKind::Truncated { .. } => f.write_str(&self.format_with("v", "w")),
        }
    }
}

fn powers<C: Coeff>(s: &TruncSeries<C>, max: usize) -> Result<Vec<TruncSeries<C>>> {
    let mut out = vec![TruncSeries::one(s.modulus(), s.vars().to_vec())];
    for e in 1..=max {
        let next = out[e - 1].mul(s)?;
        out.push(next);
    }
    Ok(out)
}

/// Evaluates a univariate series `f` at `s` as a polynomial in its coefficients.
pub(crate) fn eval_univariate<C: Coeff>(f: &TruncSeries<C>, s: &TruncSeries<C>) -> Result<TruncSeries<C>> {
    let p = s.modulus();
    let mut acc = TruncSeries::zero(p, s.vars().to_vec());
    let mut power = TruncSeries::one(p, s.vars().to_vec());
    for (k, c) in f.raw().iter().enumerate() {
        if k > 0 {
            power = power.mul(s)?;
            if power.is_zero() {
                break;
            }
        }
        if !c.is_zero() {
            acc = acc.add(&power.scale_by(c))?;
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    LeftUnit,
    RightUnit,
    Associativity,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::LeftUnit => "F(0,X)=X",
            Axiom::RightUnit => "F(X,0)=X",
            Axiom::Associativity => "associativity",
        })
    }
}

/// The first coefficient at which an axiom fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawFailure {
    pub axiom: Axiom,
    pub exponents: Vec<usize>,
    pub lhs: Scalar,
    pub rhs: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawReport {
    pub order: usize,
    pub failure: Option<LawFailure>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn mismatch(lhs: &ScalarSeries, rhs: &ScalarSeries) -> Option<(Vec<usize>, Scalar, Scalar)> {
    lhs.first_difference(rhs, |_| true)
        .expect("compared series share a ring")
        .map(|e| {
            let (a, b) = (lhs.coeff(&e), rhs.coeff(&e));
            (e, a, b)
        })
}

/// Verifies the unit and associativity axioms, exactly for a truncated law
/// and modulo `X^N, Y^N, Z^N` for a formal one.
pub fn check_group_law(law: &GroupLaw, order: usize) -> LawReport {
    let p = law.p;
    let order = law.q().unwrap_or(order);
    let one_var = vec![law.var("X", order)];
    let x = ScalarSeries::variable(p, one_var.clone(), 0);
    let zero = ScalarSeries::zero(p, one_var);
    let checks = [
        (Axiom::RightUnit, law.apply(&x, &zero)),
        (Axiom::LeftUnit, law.apply(&zero, &x)),
    ];
    for (axiom, value) in checks {
        if let Some((exponents, lhs, rhs)) = mismatch(&value.expect("same ring"), &x) {
            return LawReport {
                order,
                failure: Some(LawFailure {
                    axiom,
                    exponents,
                    lhs,
                    rhs,
                }),
            };
        }
    }
    let vars = vec![law.var("X", order), law.var("Y", order), law.var("Z", order)];
    let v: Vec<ScalarSeries> = (0..3).map(|k| ScalarSeries::variable(p, vars.clone(), k)).collect();
    let lhs = law.apply(&law.apply(&v[0], &v[1]).unwrap(), &v[2]).unwrap();
    let rhs = law.apply(&v[0], &law.apply(&v[1], &v[2]).unwrap()).unwrap();
    let failure = mismatch(&lhs, &rhs).map(|(exponents, lhs, rhs)| LawFailure {
        axiom: Axiom::Associativity,
        exponents,
        lhs,
        rhs,
    });
    LawReport { order, failure }
}

/// `F[m] = F(v_m, w_m)`. A truncated law may be truncated further.
pub fn truncate_law(law: &GroupLaw, m: u32) -> Result<GroupLaw> {
    if m == 0 {
        return Err(Error::ZeroLevel);
    }
    if let LawKind::Truncated { m: have } = law.kind {
        if m > have {
            return Err(Error::Precondition(format!(
                "cannot truncate a {have}-truncated law to level {m}"
            )));
        }
    }
    GroupLaw::build(law.p, LawKind::Truncated { m }, law.tag, law.terms.clone())
}

/// The coefficient twist `F^(fr^j)`. Over F_p the Frobenius fixes every
/// coefficient, so this is the identity.
pub fn frobenius_twist(law: &GroupLaw, _j: i64) -> GroupLaw {
    law.clone()
}

/// `[k]_F(X)` by `[1] = X`, `[k+1] = F(X, [k])`.
pub fn mult_by_m(law: &GroupLaw, k: u64, order: usize) -> Result<ScalarSeries> {
    if k == 0 {
        return Err(Error::Invalid("multiplication by m needs m >= 1".into()));
    }
    let vars = vec![law.var("X", order)];
    let x = ScalarSeries::variable(law.p, vars, 0);
    let mut acc = x.clone();
    for _ in 1..k {
        acc = law.apply(&x, &acc)?;
    }
    Ok(acc)
}

/// `V` with `[p]_F(X) = V(X^p)`, and `W`, the inverse Frobenius twist of `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerschiebungData {
    pub v: ScalarSeries,
    pub w: ScalarSeries,
}

/// Extracts the Verschiebung from `[p]_F`. For a law truncated at `q`, `V`
/// is returned modulo `X^(q/p)`.
pub fn verschiebung(law: &GroupLaw, order: usize) -> Result<VerschiebungData> {
    let p = law.p as usize;
    let mp = mult_by_m(law, law.p, order)?;
    for (e, c) in mp.raw().iter().enumerate() {
        if !c.is_zero() && e % p != 0 {
            return Err(Error::VerschiebungExponent(e));
        }
    }
    let n = mp.order().div_ceil(p);
    let mut var = mp.vars()[0].clone();
    var.order = n;
    let coeffs = (0..n).map(|i| *mp.coeff1(i * p)).collect();
    let v = ScalarSeries::univariate(law.p, var, coeffs);
    let w = v.clone();
    Ok(VerschiebungData { v, w })
}

/// The inverse `i(X)` with `F(X, i(X)) = 0`, solved one degree at a time.
pub fn formal_inverse(law: &GroupLaw, order: usize) -> Result<ScalarSeries> {
    let vars = vec![law.var("X", order)];
    let x = ScalarSeries::variable(law.p, vars.clone(), 0);
    let mut inv = ScalarSeries::zero(law.p, vars);
    let n = inv.order();
    for k in 1..n {
        // Raising i_k shifts the X^k coefficient of F(X, i) by exactly i_k.
        let c = *law.apply(&x, &inv)?.coeff1(k);
        if !c.is_zero() {
            let cur = *inv.coeff1(k);
            inv.set(&[k], cur - c);
        }
    }
    Ok(inv)
}

/// A homomorphism `alpha: F -> F'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupLawHom {
    source: GroupLaw,
    target: GroupLaw,
    alpha: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomFailure {
    Mismatch {
        exponents: Vec<usize>,
        lhs: Scalar,
        rhs: Scalar,
    },
    /// `alpha^q` does not vanish for the target truncation `q`.
    NotNilpotent { order: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomReport {
    pub order: usize,
    pub failure: Option<HomFailure>,
}

impl HomReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl GroupLawHom {
    /// `alpha` is given by its coefficients, index = exponent.
    pub fn new(source: GroupLaw, target: GroupLaw, alpha: Vec<Scalar>) -> Result<Self> {
        if source.p != target.p {
            return Err(Error::CharacteristicMismatch(source.p, target.p));
        }
        if let Some(c) = alpha.iter().find(|c| c.modulus() != source.p) {
            return Err(Error::CharacteristicMismatch(source.p, c.modulus()));
        }
        if alpha.first().is_some_and(|c| !c.is_zero()) {
            return Err(Error::NonZeroConstantTerm("alpha".into()));
        }
        Ok(GroupLawHom { source, target, alpha })
    }

    /// `alpha = c X^e`.
    pub fn monomial(source: GroupLaw, target: GroupLaw, c: Scalar, e: usize) -> Result<Self> {
        let mut alpha = vec![Scalar::zero(source.p); e + 1];
        alpha[e] = c;
        Self::new(source, target, alpha)
    }

    pub fn source(&self) -> &GroupLaw {
        &self.source
    }

    pub fn target(&self) -> &GroupLaw {
        &self.target
    }

    pub fn alpha_coeffs(&self) -> &[Scalar] {
        &self.alpha
    }

    /// `alpha` as a series in the given variable.
    pub fn alpha(&self, var: Var) -> ScalarSeries {
        ScalarSeries::univariate(self.source.p, var, self.alpha.clone())
    }
}

/// Verifies `alpha(F(X,Y)) = F'(alpha(X), alpha(Y))`, and for a truncated
/// target that `alpha^q` vanishes.
pub fn check_hom(h: &GroupLawHom, order: usize) -> HomReport {
    let p = h.source.p;
    let order = h.source.q().unwrap_or(order);
    let vx = h.source.var("X", order);
    let alpha = h.alpha(vx.clone());
    if let Some(q) = h.target.q() {
        if !alpha.pow(q as u64).is_zero() {
            return HomReport {
                order,
                failure: Some(HomFailure::NotNilpotent { order: q }),
            };
        }
    }
    let vars = vec![vx, h.source.var("Y", order)];
    let x = ScalarSeries::variable(p, vars.clone(), 0);
    let y = ScalarSeries::variable(p, vars.clone(), 1);
    let alpha2 = h.alpha(vars[0].clone());
    let lhs = eval_univariate(&alpha2, &h.source.apply(&x, &y).unwrap()).unwrap();
    let ax = eval_univariate(&alpha2, &x).unwrap();
    let ay = eval_univariate(&alpha2, &y).unwrap();
    let rhs = h.target.apply(&ax, &ay).unwrap();
    let failure = mismatch(&lhs, &rhs).map(|(exponents, lhs, rhs)| HomFailure::Mismatch { exponents, lhs, rhs });
    HomReport { order, failure }
}
