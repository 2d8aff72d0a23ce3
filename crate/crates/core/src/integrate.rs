//! Expanding truncated additive and multiplicative derivations of F_p(t)
//! to full iterative derivations.
//!
//! Given a canonical element `x`, the field `F_p(x)` carries the canonical
//! derivation `d_X(x) = F(x, X)`, and `t` is a simple root of
//! `P(T) = u(T) - x v(T)` over it (`x = u/v`). Since `P'(t) != 0` the
//! derivation extends uniquely to `K`: `d_X(t)` is the root of
//! `u(S) - F(x, X) v(S)` with constant term `t`, found by Newton iteration.

use std::sync::Arc;

use crate::derivation::{check_f_iterative, reindex_ppower, DerKind, HsDerivation, Reindex};
use crate::error::{Error, Result};
use crate::field::pow_usize;
use crate::hensel::{HenselLift, PolyAtOrder, SeriesPoly};
use crate::law::{make_law, GroupLaw, LawKind, LawTag};
use crate::poly::Poly;
use crate::ratfn::RatFn;
use crate::series::{RatSeries, Var};
use crate::structure::{canonical_element_additive, canonical_element_multiplicative, is_pbasis, CanonicalElement};

/// `P(T) = u(T) - x v(T)` for `x = u/v`, the minimal polynomial of `t`
/// over `F_p(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalPolynomial {
    pub x: RatFn,
    pub u: Poly,
    pub v: Poly,
}

impl MinimalPolynomial {
    pub fn degree(&self) -> usize {
        self.u.degree().unwrap_or(0).max(self.v.degree().unwrap_or(0))
    }

    /// `P(r)` with `x` kept as the given value.
    pub fn eval(&self, r: &RatFn) -> Result<RatFn> {
        let u = RatFn::from_poly(self.u.clone()).compose(r)?;
        let v = RatFn::from_poly(self.v.clone()).compose(r)?;
        Ok(&u - &(&self.x * &v))
    }

    /// `P'(r)`.
    pub fn eval_derivative(&self, r: &RatFn) -> Result<RatFn> {
        let u = RatFn::from_poly(self.u.derivative()).compose(r)?;
        let v = RatFn::from_poly(self.v.derivative()).compose(r)?;
        Ok(&u - &(&self.x * &v))
    }

    /// The polynomial with `x` replaced by the series `xs`:
    /// coefficient `k` is `u_k - xs v_k`.
    pub fn with_series(&self, xs: &RatSeries) -> Result<SeriesPoly> {
        let p = self.x.modulus();
        let vars = xs.vars().to_vec();
        let coeffs = (0..=self.degree())
            .map(|k| {
                let u = RatSeries::constant(RatFn::from_scalar(self.u.coeff(k)), vars.clone());
                u.sub(&xs.scale(self.v.coeff(k)))
            })
            .collect::<Result<Vec<_>>>()?;
        debug_assert!(coeffs.iter().all(|c| c.modulus() == p));
        SeriesPoly::new(coeffs)
    }

    pub fn format(&self) -> String {
        let u = self.u.format_with("T");
        let v = self.v.format_with("T");
        let wrap = |s: String| if s.contains(['+', '-']) { format!("({s})") } else { s };
        if self.v.is_one() {
            format!("{u} - x")
        } else {
            format!("{} - x*{}", wrap(u), wrap(v))
        }
    }
}

pub fn minimal_polynomial_over(x: &RatFn) -> Result<MinimalPolynomial> {
    if x.is_constant() {
        return Err(Error::Invalid("x is constant".into()));
    }
    if !is_pbasis(x) {
        return Err(Error::NotPBasis(x.to_string()));
    }
    Ok(MinimalPolynomial {
        x: x.clone(),
        u: x.num().clone(),
        v: x.den().clone(),
    })
}

/// `F(x, X)` to `order` coefficients.
fn law_at(law: &GroupLaw, x: &RatFn, order: usize) -> RatSeries {
    let p = x.modulus();
    let mut coeffs = vec![RatFn::zero(p); order];
    for &(i, j, c) in law.terms() {
        if j < order {
            coeffs[j] = &coeffs[j] + &x.pow(i as u64).scale(c);
        }
    }
    RatSeries::univariate(p, Var::precision("X", order), coeffs)
}

/// The resumable Newton lift for `d_X(t)` with `d_X(x) = F(x, X)`.
pub fn extend_canonical_lift(
    x: &RatFn,
    law: &GroupLaw,
    order: usize,
    budget: Option<usize>,
) -> Result<(MinimalPolynomial, HenselLift)> {
    if law.kind() != LawKind::Formal {
        return Err(Error::Precondition("extension needs a formal law".into()));
    }
    if law.modulus() != x.modulus() {
        return Err(Error::CharacteristicMismatch(law.modulus(), x.modulus()));
    }
    let minpoly = minimal_polynomial_over(x)?;
    let (mp, f, xv) = (minpoly.clone(), law.clone(), x.clone());
    let make: PolyAtOrder = Arc::new(move |n| mp.with_series(&law_at(&f, &xv, n)));
    let lift = HenselLift::new(make, &RatFn::t(x.modulus()), order, budget)?;
    Ok((minpoly, lift))
}

/// The unique derivation `D` of `K` with `D_X(x) = F(x, X)`, to `order`.
pub fn extend_canonical(x: &RatFn, law: &GroupLaw, order: usize, budget: Option<usize>) -> Result<HsDerivation> {
    let (_, lift) = extend_canonical_lift(x, law, order, budget)?;
    from_root(law, lift.root())
}

fn from_root(law: &GroupLaw, root: &RatSeries) -> Result<HsDerivation> {
    let p = law.modulus();
    let d = HsDerivation::new(
        p,
        DerKind::Formal {
            precision: root.order(),
        },
        root.raw().to_vec(),
    )?;
    Ok(d.with_law(law.clone()))
}

/// Agreement of the output with the input on `t` below `p^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Audit {
    pub checked: usize,
    pub mismatches: Vec<usize>,
}

impl Audit {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn compare(input: &HsDerivation, output: &HsDerivation) -> Self {
        let checked = input.len().min(output.len());
        let mismatches = (0..checked).filter(|&i| input.on_t(i) != output.on_t(i)).collect();
        Audit { checked, mismatches }
    }
}

/// How the output was obtained.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Route {
    /// Extension from a canonical element.
    Canonical {
        element: CanonicalElement,
        minimal_poly: MinimalPolynomial,
        lift: HenselLift,
    },
    /// `d_1 = 0`: the input was deflated by `p^j`, integrated, and inflated.
    Deflated { j: u32, inner: Box<IntegrationResult> },
    /// The input was trivial.
    Trivial,
}

#[derive(Clone, Debug)]
pub struct IntegrationResult {
    pub output: HsDerivation,
    pub route: Route,
    pub audit: Audit,
}

impl IntegrationResult {
    /// The canonical element, if the main branch was taken at some depth.
    pub fn canonical_element(&self) -> Option<&CanonicalElement> {
        match &self.route {
            Route::Canonical { element, .. } => Some(element),
            Route::Deflated { inner, .. } => inner.canonical_element(),
            Route::Trivial => None,
        }
    }

    /// Recomputes the output to a higher precision, continuing the stored
    /// Newton iteration instead of restarting it.
    pub fn resume(&self, order: usize, budget: Option<usize>) -> Result<HsDerivation> {
        let p = self.output.modulus();
        let law = self.output.law().cloned();
        match &self.route {
            Route::Trivial => HsDerivation::trivial(p, DerKind::Formal { precision: order }),
            Route::Canonical { lift, .. } => {
                let mut lift = lift.clone();
                let root = lift.extend_to(order, budget)?.clone();
                from_root(law.as_ref().expect("integrated outputs carry a law"), &root)
            }
            Route::Deflated { j, inner } => {
                let step = pow_usize(p, *j);
                let up = reindex_ppower(&inner.resume(order.div_ceil(step), budget)?, Reindex::Inflate(*j))?;
                cut(&up, order)
            }
        }
    }
}

fn cut(d: &HsDerivation, order: usize) -> Result<HsDerivation> {
    let images = d.images()[..order.min(d.len())].to_vec();
    let out = HsDerivation::new(d.modulus(), DerKind::Formal { precision: order }, images)?;
    Ok(match d.law() {
        Some(f) => out.with_law(f.clone()),
        None => out,
    })
}

fn require_iterative(d: &HsDerivation, law: &GroupLaw) -> Result<()> {
    let report = check_f_iterative(d, law, d.len())?;
    match report.failure {
        None => Ok(()),
        Some(f) => Err(Error::NotIterative { i: f.i, j: f.j }),
    }
}

fn level(d: &HsDerivation) -> Result<u32> {
    match d.kind() {
        DerKind::Truncated { m } => Ok(m),
        DerKind::Formal { .. } => Err(Error::Precondition("input must be a truncated derivation".into())),
    }
}

fn finish(input: &HsDerivation, output: HsDerivation, route: Route, law: &GroupLaw) -> Result<IntegrationResult> {
    let report = check_f_iterative(&output, law, output.len())?;
    if let Some(f) = report.failure {
        return Err(Error::Inconsistent(format!(
            "integrated derivation is not iterative at ({}, {})",
            f.i, f.j
        )));
    }
    let audit = Audit::compare(input, &output);
    Ok(IntegrationResult { output, route, audit })
}

/// Expands an additively iterative `m`-truncated derivation to an
/// additively iterative derivation known to `order`.
pub fn integrate_additive(d: &HsDerivation, order: usize, budget: Option<usize>) -> Result<IntegrationResult> {
    let p = d.modulus();
    let m = level(d)?;
    let trunc = make_law(LawTag::Additive, p, LawKind::Truncated { m })?;
    require_iterative(d, &trunc)?;
    let ga = make_law(LawTag::Additive, p, LawKind::Formal)?;
    if d.is_trivial() {
        let out = HsDerivation::trivial(p, DerKind::Formal { precision: order })?.with_law(ga.clone());
        return finish(d, out, Route::Trivial, &ga);
    }
    if d.on_t(1).is_zero() {
        let pu = p as usize;
        let j = (1..d.len())
            .filter(|&n| !d.on_t(n).is_zero())
            .map(|mut n| {
                let mut v = 0u32;
                while n % pu == 0 {
                    n /= pu;
                    v += 1;
                }
                v
            })
            .min()
            .expect("nontrivial input");
        if j == 0 {
            return Err(Error::Inconsistent(
                "d_1 vanishes but a component of index prime to p does not".into(),
            ));
        }
        let deflated = reindex_ppower(d, Reindex::Deflate(j))?;
        let step = pow_usize(p, j);
        let inner = integrate_additive(&deflated, order.div_ceil(step), budget)?;
        let up = reindex_ppower(&inner.output, Reindex::Inflate(j))?;
        let out = cut(&up, order)?.with_law(ga.clone());
        let route = Route::Deflated {
            j,
            inner: Box::new(inner),
        };
        return finish(d, out, route, &ga);
    }
    let element = canonical_element_additive(d)?;
    let (minimal_poly, lift) = extend_canonical_lift(&element.x, &ga, order, budget)?;
    let out = from_root(&ga, lift.root())?;
    let route = Route::Canonical {
        element,
        minimal_poly,
        lift,
    };
    finish(d, out, route, &ga)
}

/// Expands a multiplicatively iterative `m`-truncated derivation with
/// `d_1 != 0` to a multiplicatively iterative derivation known to `order`.
pub fn integrate_multiplicative(d: &HsDerivation, order: usize, budget: Option<usize>) -> Result<IntegrationResult> {
    let p = d.modulus();
    let m = level(d)?;
    let trunc = make_law(LawTag::Multiplicative, p, LawKind::Truncated { m })?;
    require_iterative(d, &trunc)?;
    let gm = make_law(LawTag::Multiplicative, p, LawKind::Formal)?;
    if d.is_trivial() {
        let out = HsDerivation::trivial(p, DerKind::Formal { precision: order })?.with_law(gm.clone());
        return finish(d, out, Route::Trivial, &gm);
    }
    if d.on_t(1).is_zero() {
        return Err(Error::Unsupported(
            "multiplicative inputs with d_1 = 0 are not integrated".into(),
        ));
    }
    let element = canonical_element_multiplicative(d)?;
    let (minimal_poly, lift) = extend_canonical_lift(&element.x, &gm, order, budget)?;
    let out = from_root(&gm, lift.root())?;
    let route = Route::Canonical {
        element,
        minimal_poly,
        lift,
    };
    finish(d, out, route, &gm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::{canonical_derivation, truncate_derivation};
    use crate::parse::parse_ratfn;

    fn r(s: &str, p: u64) -> RatFn {
        parse_ratfn(s, p).unwrap()
    }

    fn law(tag: LawTag, p: u64) -> GroupLaw {
        make_law(tag, p, LawKind::Formal).unwrap()
    }

    #[test]
    fn minimal_polynomials() {
        let mp = minimal_polynomial_over(&r("t^2+t", 2)).unwrap();
        assert_eq!(mp.degree(), 2);
        assert!(mp.eval(&r("t", 2)).unwrap().is_zero());
        assert_eq!(mp.eval_derivative(&r("t", 2)).unwrap(), r("1", 2));
        assert_eq!(minimal_polynomial_over(&r("t", 3)).unwrap().format(), "T - x");
        assert!(matches!(
            minimal_polynomial_over(&r("t^2", 2)),
            Err(Error::NotPBasis(_))
        ));
        assert!(minimal_polynomial_over(&r("2", 3)).is_err());
    }

    #[test]
    fn extensions() {
        let p = 2;
        let ga = law(LawTag::Additive, p);
        let d = extend_canonical(&r("t", p), &ga, 8, None).unwrap();
        assert_eq!(d, canonical_derivation(&ga, 8).unwrap());
        let e = extend_canonical(&r("t^2+t", p), &ga, 8, None).unwrap();
        let expected: Vec<RatFn> = ["t", "1", "1", "0", "1", "0", "0", "0"]
            .iter()
            .map(|s| r(s, p))
            .collect();
        assert_eq!(e.images(), expected.as_slice());
        assert!(check_f_iterative(&e, &ga, 8).unwrap().passed());
        let gm = law(LawTag::Multiplicative, p);
        assert_eq!(
            extend_canonical(&r("t", p), &gm, 8, None).unwrap(),
            canonical_derivation(&gm, 8).unwrap()
        );
    }

    #[test]
    fn round_trips() {
        for p in [2, 3] {
            for tag in [LawTag::Additive, LawTag::Multiplicative] {
                let f = law(tag, p);
                let d = truncate_derivation(&canonical_derivation(&f, 16).unwrap(), 1).unwrap();
                let res = match tag {
                    LawTag::Additive => integrate_additive(&d, 16, None),
                    _ => integrate_multiplicative(&d, 16, None),
                }
                .unwrap();
                assert!(res.audit.passed());
                assert_eq!(truncate_derivation(&res.output, 1).unwrap(), d);
            }
        }
    }

    #[test]
    fn degenerate_additive_branch() {
        let p = 2;
        let d = HsDerivation::new(p, DerKind::Truncated { m: 2 }, vec![r("t", p), r("0", p), r("1", p)]).unwrap();
        let res = integrate_additive(&d, 16, None).unwrap();
        assert!(matches!(res.route, Route::Deflated { j: 1, .. }));
        assert!(res.audit.passed());
        assert_eq!(res.output.on_t(2), &r("1", p));
        assert!(res
            .output
            .images()
            .iter()
            .enumerate()
            .all(|(i, c)| i % 2 == 0 || c.is_zero()));
        let longer = res.resume(32, None).unwrap();
        assert!(longer.agrees_with(&res.output, 16));
    }

    #[test]
    fn trivial_and_invalid_inputs() {
        let p = 3;
        let triv = HsDerivation::trivial(p, DerKind::Truncated { m: 1 }).unwrap();
        assert!(integrate_additive(&triv, 9, None).unwrap().output.is_trivial());
        let bad = HsDerivation::new(p, DerKind::Truncated { m: 1 }, vec![r("t", p), r("1", p), r("1", p)]).unwrap();
        assert!(matches!(
            integrate_additive(&bad, 9, None),
            Err(Error::NotIterative { .. })
        ));
        let zero_d1 = HsDerivation::new(2, DerKind::Truncated { m: 2 }, vec![r("t", 2), r("0", 2), r("t", 2)]).unwrap();
        let gm2 = make_law(LawTag::Multiplicative, 2, LawKind::Truncated { m: 2 }).unwrap();
        if check_f_iterative(&zero_d1, &gm2, 4).unwrap().passed() {
            assert!(matches!(
                integrate_multiplicative(&zero_d1, 8, None),
                Err(Error::Unsupported(_))
            ));
        }
    }

    #[test]
    fn budget_is_respected() {
        let ga = law(LawTag::Additive, 2);
        assert_eq!(
            extend_canonical(&r("t^2+t", 2), &ga, 64, Some(1)).unwrap_err(),
            Error::StepBudgetExhausted(1)
        );
    }
}
