//! Hasse-Schmidt derivations of F_p(t) over F_p.
//!
//! A derivation is the ring homomorphism `d_X : K -> K[[X]]` with
//! `d_X(r) = sum_n d_n(r) X^n`. Since `d_X` is a homomorphism fixing F_p it
//! is determined by the single series `d_X(t)`, which is all that is stored.
//! Truncated derivations use a nilpotent variable `X^q = 0` with `q = p^m`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::field::{binomial_mod, pow_usize, Scalar};
use crate::law::{eval_univariate, truncate_law, GroupLaw, GroupLawHom, LawKind};
use crate::linalg::fp_combination;
use crate::poly::Poly;
use crate::ratfn::RatFn;
use crate::series::{RatSeries, ScalarSeries, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DerKind {
    /// Known modulo `X^precision`.
    Formal { precision: usize },
    /// An `m`-truncated derivation, indices below `p^m`.
    Truncated { m: u32 },
}

const MEMO_LIMIT: usize = 4096;

#[derive(Default)]
struct Cache {
    images: Mutex<HashMap<RatFn, RatSeries>>,
    /// Powers of `d_X(t) - t`.
    hpow: Mutex<Vec<RatSeries>>,
}

#[derive(Clone)]
pub struct HsDerivation {
    p: u64,
    kind: DerKind,
    gen: RatSeries,
    law: Option<GroupLaw>,
    cache: Arc<Cache>,
}

impl PartialEq for HsDerivation {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind && self.gen == o.gen
    }
}

impl Eq for HsDerivation {}

fn kind_var(p: u64, kind: DerKind) -> Result<Var> {
    match kind {
        DerKind::Formal { precision } if precision > 0 => Ok(Var::precision("X", precision)),
        DerKind::Formal { .. } => Err(Error::Invalid("precision must be positive".into())),
        DerKind::Truncated { m: 0 } => Err(Error::ZeroLevel),
        DerKind::Truncated { m } => Ok(Var::truncated("X", pow_usize(p, m))),
    }
}

impl HsDerivation {
    /// Builds a derivation from `d_n(t)` for `n = 0, 1, ...`; missing entries
    /// are zero and the first must be `t`.
    pub fn new(p: u64, kind: DerKind, images: Vec<RatFn>) -> Result<Self> {
        crate::field::check_prime(p)?;
        let var = kind_var(p, kind)?;
        if images.len() > var.order {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for precision {}",
                images.len(),
                var.order
            )));
        }
        if let Some(r) = images.iter().find(|r| r.modulus() != p) {
            return Err(Error::CharacteristicMismatch(p, r.modulus()));
        }
        if images.first() != Some(&RatFn::t(p)) {
            return Err(Error::Invalid("the constant term of d_X(t) must be t".into()));
        }
        Ok(Self::from_parts(p, kind, RatSeries::univariate(p, var, images), None))
    }

    fn from_parts(p: u64, kind: DerKind, gen: RatSeries, law: Option<GroupLaw>) -> Self {
        HsDerivation {
            p,
            kind,
            gen,
            law,
            cache: Arc::new(Cache::default()),
        }
    }

    /// `d_X(t) = t`: every `d_n` with `n > 0` vanishes.
    pub fn trivial(p: u64, kind: DerKind) -> Result<Self> {
        Self::new(p, kind, vec![RatFn::t(p)])
    }

    /// Records the law this derivation is meant to be iterative for.
    pub fn with_law(mut self, law: GroupLaw) -> Self {
        self.law = Some(law);
        self
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn kind(&self) -> DerKind {
        self.kind
    }

    pub fn law(&self) -> Option<&GroupLaw> {
        self.law.as_ref()
    }

    /// Number of known components: the precision, or `p^m` when truncated.
    pub fn len(&self) -> usize {
        self.gen.order()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The series `d_X(t)`.
    pub fn gen_image(&self) -> &RatSeries {
        &self.gen
    }

    /// `d_n(t)`.
    pub fn on_t(&self, n: usize) -> &RatFn {
        self.gen.coeff1(n)
    }

    pub fn images(&self) -> &[RatFn] {
        self.gen.raw()
    }

    pub fn is_trivial(&self) -> bool {
        self.images()[1..].iter().all(|r| r.is_zero())
    }

    /// Whether the first `n` components of `d_X(t)` coincide.
    pub fn agrees_with(&self, o: &HsDerivation, n: usize) -> bool {
        n <= self.len() && n <= o.len() && self.images()[..n] == o.images()[..n]
    }

    fn var(&self) -> Var {
        self.gen.vars()[0].clone()
    }

    fn h_power(&self, k: usize) -> RatSeries {
        let mut hp = self.cache.hpow.lock().unwrap();
        if hp.is_empty() {
            hp.push(RatSeries::one(self.p, vec![self.var()]));
            let mut h = self.gen.clone();
            h.set(&[0], RatFn::zero(self.p));
            hp.push(h);
        }
        while hp.len() <= k {
            let next = hp.last().unwrap().mul(&hp[1]).expect("same ring");
            hp.push(next);
        }
        hp[k].clone()
    }

    /// `d_X(u)` for a polynomial `u`, via `u(t + h) = sum_k u^[k](t) h^k`
    /// with `h = d_X(t) - t` and `u^[k]` the Hasse derivatives.
    fn apply_poly(&self, u: &Poly) -> RatSeries {
        let n = self.len();
        let mut acc = RatSeries::zero(self.p, vec![self.var()]);
        for (k, part) in u.taylor_shift(n).into_iter().enumerate() {
            if part.is_zero() {
                continue;
            }
            let hk = self.h_power(k);
            if hk.is_zero() {
                break;
            }
            let c = RatFn::from_poly(part);
            acc = acc.add(&hk.scale_by(&c)).expect("same ring");
        }
        acc
    }

    /// The whole series `d_X(r)`.
    pub fn apply_series(&self, r: &RatFn) -> Result<RatSeries> {
        if r.modulus() != self.p {
            return Err(Error::CharacteristicMismatch(self.p, r.modulus()));
        }
        if r.is_constant() {
            return Ok(RatSeries::constant(r.clone(), vec![self.var()]));
        }
        if let Some(hit) = self.cache.images.lock().unwrap().get(r) {
            return Ok(hit.clone());
        }
        let num = self.apply_poly(r.num());
        let out = if r.den().is_one() {
            num
        } else {
            num.mul(&self.apply_poly(r.den()).invert()?)?
        };
        let mut memo = self.cache.images.lock().unwrap();
        if memo.len() >= MEMO_LIMIT {
            memo.clear();
        }
        memo.insert(r.clone(), out.clone());
        Ok(out)
    }

    /// `d_n(r)`.
    pub fn apply(&self, r: &RatFn, n: usize) -> Result<RatFn> {
        if n >= self.len() {
            return Err(Error::PrecisionExceeded {
                index: n,
                precision: self.len(),
            });
        }
        Ok(self.apply_series(r)?.coeff1(n).clone())
    }

    /// `d_n` applied `times` times.
    pub fn apply_iterated(&self, r: &RatFn, n: usize, times: usize) -> Result<RatFn> {
        let mut acc = r.clone();
        for _ in 0..times {
            acc = self.apply(&acc, n)?;
        }
        Ok(acc)
    }
}

impl fmt::Debug for HsDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HsDerivation")
            .field("p", &self.p)
            .field("kind", &self.kind)
            .field("gen", &self.gen)
            .finish()
    }
}

impl fmt::Display for HsDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d_X(t) = {}", self.gen)
    }
}

/// The derivation with `d_X = ev_F(t, X)`.
pub fn canonical_derivation(law: &GroupLaw, order: usize) -> Result<HsDerivation> {
    let p = law.modulus();
    let kind = match law.kind() {
        LawKind::Formal => DerKind::Formal { precision: order },
        LawKind::Truncated { m } => DerKind::Truncated { m },
    };
    let var = kind_var(p, kind)?;
    let mut images = vec![RatFn::zero(p); var.order];
    let t = RatFn::t(p);
    for &(i, j, c) in law.terms() {
        if j < images.len() {
            let term = t.pow(i as u64).scale(c);
            images[j] = &images[j] + &term;
        }
    }
    // F(t, 0) = t for a law, so the constant term is already t.
    if images[0] != t {
        return Err(Error::Invalid("F(t, 0) differs from t".into()));
    }
    Ok(HsDerivation::from_parts(
        p,
        kind,
        RatSeries::univariate(p, var, images),
        Some(law.clone()),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    Additive,
    Multiplicative,
}

/// The coefficient of `t^i` in `d_n(t^k)` for the canonical derivation of
/// the additive or multiplicative law.
///
/// Additive: `d_n(t^k) = C(k,n) t^(k-n)`. Multiplicative:
/// `d_n(t^k) = C(k,n) t^(k-n) (1+t)^n`, so the coefficient is
/// `k! / ((k-n)! (k-i)! (i+n-k)!) = C(k,n) C(n, i+n-k)`.
pub fn closed_form_coefficient(law: ClosedForm, p: u64, n: u64, k: u64, i: u64) -> Scalar {
    let value = match law {
        ClosedForm::Additive => {
            if n <= k && i == k - n {
                binomial_mod(k, n, p)
            } else {
                0
            }
        }
        ClosedForm::Multiplicative => {
            if n <= k && k - n <= i && i <= k {
                binomial_mod(k, n, p) * binomial_mod(n, i + n - k, p) % p
            } else {
                0
            }
        }
    };
    Scalar::from_u64(value, p)
}

/// The coefficient of `d_n` in `d_i o d_j` for a multiplicatively
/// iterative derivation: `n! / ((n-i)! (n-j)! (i+j-n)!)`.
pub fn multiplicative_rule_coefficient(p: u64, i: u64, j: u64, n: u64) -> Scalar {
    let value = if i.max(j) <= n && n <= i + j {
        binomial_mod(n, i, p) * binomial_mod(i, i + j - n, p) % p
    } else {
        0
    };
    Scalar::from_u64(value, p)
}

/// First index pair at which the iterativity diagram fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterFailure {
    pub i: usize,
    pub j: usize,
    /// `d_i(d_j(t))`.
    pub lhs: RatFn,
    /// The coefficient of `X^i Y^j` in `sum_n d_n(t) F(X,Y)^n`.
    pub rhs: RatFn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterReport {
    pub order: usize,
    pub failure: Option<IterFailure>,
}

impl IterReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn check_compatible(d: &HsDerivation, law: &GroupLaw) -> Result<()> {
    if d.p != law.modulus() {
        return Err(Error::CharacteristicMismatch(d.p, law.modulus()));
    }
    match (d.kind, law.kind()) {
        (DerKind::Formal { .. }, LawKind::Formal) => Ok(()),
        (DerKind::Truncated { m }, LawKind::Truncated { m: l }) if m == l => Ok(()),
        _ => Err(Error::Precondition(format!(
            "derivation of kind {:?} cannot be iterative for a law of kind {:?}",
            d.kind,
            law.kind()
        ))),
    }
}

/// `d_i(d_j(t))` for `i, j < n`, row `i`, column `j`.
fn double_table(d: &HsDerivation, n: usize) -> Result<Vec<Vec<RatFn>>> {
    let p = d.p;
    let mut table = vec![vec![RatFn::zero(p); n]; n];
    for j in 0..n {
        let image = d.apply_series(d.on_t(j))?;
        for (i, row) in table.iter_mut().enumerate() {
            row[j] = image.coeff1(i).clone();
        }
    }
    Ok(table)
}

/// Checks that `d` is `F`-iterative: `d_X[[Y]] o d_Y = ev_F o d_Z`.
///
/// Both sides are ring homomorphisms `K -> K[[X,Y]]` that fix F_p, and a
/// homomorphism on F_p(t) is determined by the image of `t`; so it suffices
/// to compare `d_i(d_j(t))` with the `X^i Y^j` coefficient of
/// `sum_n d_n(t) F(X,Y)^n`. For a formal derivation only `i + j < N` is
/// compared, since higher coefficients involve unknown `d_n(t)`, `n >= N`.
pub fn check_f_iterative(d: &HsDerivation, law: &GroupLaw, order: usize) -> Result<IterReport> {
    check_compatible(d, law)?;
    let p = d.p;
    let (n, formal) = match d.kind {
        DerKind::Formal { precision } => (order.min(precision), true),
        DerKind::Truncated { .. } => (d.len(), false),
    };
    let lhs = double_table(d, n)?;
    let xy = vec![law.var("X", n), law.var("Y", n)];
    let f = {
        let x = ScalarSeries::variable(p, xy.clone(), 0);
        let y = ScalarSeries::variable(p, xy.clone(), 1);
        law.apply(&x, &y)?
    };
    let mut rhs = vec![vec![RatFn::zero(p); n]; n];
    let mut power = ScalarSeries::one(p, xy);
    for k in 0..n {
        if k > 0 {
            power = power.mul(&f)?;
        }
        let a = d.on_t(k);
        if a.is_zero() {
            continue;
        }
        for (e, c) in power.terms() {
            if !c.is_zero() {
                let slot = &mut rhs[e[0]][e[1]];
                *slot = &*slot + &a.scale(*c);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if formal && i + j >= n {
                break;
            }
            if lhs[i][j] != rhs[i][j] {
                return Ok(IterReport {
                    order: n,
                    failure: Some(IterFailure {
                        i,
                        j,
                        lhs: lhs[i][j].clone(),
                        rhs: rhs[i][j].clone(),
                    }),
                });
            }
        }
    }
    Ok(IterReport {
        order: n,
        failure: None,
    })
}

fn check_same_shape(d: &HsDerivation, e: &HsDerivation) -> Result<()> {
    if d.p != e.p {
        return Err(Error::CharacteristicMismatch(d.p, e.p));
    }
    match (d.kind, e.kind) {
        (DerKind::Formal { .. }, DerKind::Formal { .. }) => Ok(()),
        (DerKind::Truncated { m }, DerKind::Truncated { m: l }) if m == l => Ok(()),
        (a, b) => Err(Error::Precondition(format!(
            "cannot combine derivations of kinds {a:?} and {b:?}"
        ))),
    }
}

/// `(d * e)_n = sum_{i+j=n} d_i o e_j`, realized on `t` as
/// `(d * e)_X(t) = sum_j d_X(e_j(t)) X^j`.
pub fn star_product(d: &HsDerivation, e: &HsDerivation) -> Result<HsDerivation> {
    check_same_shape(d, e)?;
    let p = d.p;
    let kind = match d.kind {
        DerKind::Formal { precision } => DerKind::Formal {
            precision: precision.min(e.len()),
        },
        k => k,
    };
    let var = kind_var(p, kind)?;
    let n = var.order;
    let mut out = vec![RatFn::zero(p); n];
    for j in 0..n {
        let b = e.on_t(j);
        if b.is_zero() {
            continue;
        }
        let image = d.apply_series(b)?;
        for i in 0..n - j {
            let c = image.coeff1(i);
            if !c.is_zero() {
                out[i + j] = &out[i + j] + c;
            }
        }
    }
    Ok(HsDerivation::from_parts(
        p,
        kind,
        RatSeries::univariate(p, var, out),
        None,
    ))
}

/// The `m`-fold star power `E_(m)`.
pub fn star_power(d: &HsDerivation, m: usize) -> Result<HsDerivation> {
    if m == 0 {
        return Err(Error::Invalid("star power needs m >= 1".into()));
    }
    let mut acc = d.clone();
    for _ in 1..m {
        acc = star_product(d, &acc)?;
    }
    acc.law = None;
    Ok(acc)
}

/// The inverse of `d` in the star group: solved degree by degree from
/// `(d * e)_n(t) = 0` for `n > 0`.
pub fn star_inverse(d: &HsDerivation) -> Result<HsDerivation> {
    let p = d.p;
    let n = d.len();
    let mut images = vec![RatFn::zero(p); n];
    images[0] = RatFn::t(p);
    for k in 1..n {
        // (d * e)_k(t) = e_k(t) + sum_{j<k} d_{k-j}(e_j(t)).
        let mut acc = RatFn::zero(p);
        for (j, b) in images.iter().enumerate().take(k) {
            if !b.is_zero() {
                acc = &acc + &d.apply(b, k - j)?;
            }
        }
        images[k] = -&acc;
    }
    let gen = RatSeries::univariate(p, d.var(), images);
    Ok(HsDerivation::from_parts(p, d.kind, gen, None))
}

/// Verifies `d_i o d_j = d_j o d_i` on `t` for all known index pairs.
pub fn check_commuting(d: &HsDerivation) -> Result<Option<(usize, usize)>> {
    let n = d.len();
    let formal = matches!(d.kind, DerKind::Formal { .. });
    let table = double_table(d, n)?;
    for (i, row) in table.iter().enumerate() {
        for (j, entry) in row.iter().enumerate().skip(i + 1) {
            if formal && i + j >= n {
                break;
            }
            if entry != &table[j][i] {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// `d^(p) = (d_i^(p))_i`, the componentwise `p`-fold composition.
///
/// For a formal derivation the components are read off the `X^(pi)`
/// coefficients of the `p`-th star power; the other coefficients must
/// vanish. A truncated derivation is composed directly.
pub fn pth_comp_power(d: &HsDerivation) -> Result<HsDerivation> {
    if let Some((i, j)) = check_commuting(d)? {
        return Err(Error::Precondition(format!("d_{i} and d_{j} do not commute on t")));
    }
    let p = d.p;
    let pu = p as usize;
    match d.kind {
        DerKind::Formal { precision } => {
            let power = star_power(d, pu)?;
            for (e, c) in power.images().iter().enumerate() {
                if !c.is_zero() && e % pu != 0 {
                    return Err(Error::Inconsistent(format!(
                        "p-th star power has a nonzero coefficient at X^{e}"
                    )));
                }
            }
            let n = precision.div_ceil(pu);
            let images = (0..n).map(|i| power.on_t(i * pu).clone()).collect();
            HsDerivation::new(p, DerKind::Formal { precision: n }, images)
        }
        DerKind::Truncated { .. } => {
            let mut images = Vec::with_capacity(d.len());
            images.push(RatFn::t(p));
            for i in 1..d.len() {
                images.push(d.apply_iterated(&RatFn::t(p), i, pu)?);
            }
            HsDerivation::new(p, d.kind, images)
        }
    }
}

/// `d_j(d_i(r))`.
pub fn compose_terms(d: &HsDerivation, i: usize, j: usize, r: &RatFn) -> Result<RatFn> {
    d.apply(&d.apply(r, i)?, j)
}

/// Whether `d_j(d_i(r)) - C(i+j, i) d_{i+j}(r)` is an F_p-combination of
/// `d_1(r), ..., d_{i+j-1}(r)`; returns the coefficients when it is.
pub fn lower_order_combination(d: &HsDerivation, i: usize, j: usize, r: &RatFn) -> Result<Option<Vec<Scalar>>> {
    let p = d.p;
    let series = d.apply_series(r)?;
    let n = i + j;
    if n >= d.len() {
        return Err(Error::PrecisionExceeded {
            index: n,
            precision: d.len(),
        });
    }
    let c = Scalar::from_u64(binomial_mod(n as u64, i as u64, p), p);
    let diff = &compose_terms(d, i, j, r)? - &series.coeff1(n).scale(c);
    let lower: Vec<RatFn> = (1..n).map(|k| series.coeff1(k).clone()).collect();
    fp_combination(&lower, &diff)
}

/// The `l`-truncation `(d_i)_{i < p^l}`.
pub fn truncate_derivation(d: &HsDerivation, l: u32) -> Result<HsDerivation> {
    if l == 0 {
        return Err(Error::ZeroLevel);
    }
    let q = pow_usize(d.p, l);
    if q > d.len() {
        return Err(Error::PrecisionExceeded {
            index: q - 1,
            precision: d.len(),
        });
    }
    let law = match &d.law {
        Some(f) => truncate_law(f, l).ok(),
        None => None,
    };
    let kind = DerKind::Truncated { m: l };
    let var = kind_var(d.p, kind)?;
    let gen = RatSeries::univariate(d.p, var, d.images()[..q].to_vec());
    Ok(HsDerivation::from_parts(d.p, kind, gen, law))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reindex {
    /// `d' = (d_{i p^j})_i`; needs `d_n = 0` unless `p^j | n`.
    Deflate(u32),
    /// `d'_X = d_{X^(p^j)}`.
    Inflate(u32),
}

/// Moves between `d` and the derivation on `p^j`-th power indices.
pub fn reindex_ppower(d: &HsDerivation, dir: Reindex) -> Result<HsDerivation> {
    let p = d.p;
    match dir {
        Reindex::Deflate(j) => {
            let step = pow_usize(p, j);
            if let Some(n) = (1..d.len()).find(|&n| n % step != 0 && !d.on_t(n).is_zero()) {
                return Err(Error::DeflateNonzero(n));
            }
            let kind = match d.kind {
                DerKind::Formal { precision } => DerKind::Formal {
                    precision: precision.div_ceil(step),
                },
                DerKind::Truncated { m } if m > j => DerKind::Truncated { m: m - j },
                DerKind::Truncated { .. } => return Err(Error::ZeroLevel),
            };
            let var = kind_var(p, kind)?;
            let images = (0..var.order).map(|i| d.on_t(i * step).clone()).collect();
            let gen = RatSeries::univariate(p, var, images);
            Ok(HsDerivation::from_parts(p, kind, gen, d.law.clone()))
        }
        Reindex::Inflate(j) => {
            let step = pow_usize(p, j);
            let kind = match d.kind {
                DerKind::Formal { precision } => DerKind::Formal {
                    precision: precision * step,
                },
                DerKind::Truncated { m } => DerKind::Truncated { m: m + j },
            };
            let var = kind_var(p, kind)?;
            let mut images = vec![RatFn::zero(p); var.order];
            for (i, r) in d.images().iter().enumerate() {
                images[i * step] = r.clone();
            }
            let gen = RatSeries::univariate(p, var, images);
            Ok(HsDerivation::from_parts(p, kind, gen, d.law.clone()))
        }
    }
}

/// The derivation `d_X = ev_alpha o d'_X` for a homomorphism
/// `alpha: F -> F'` and an `F'`-derivation `d'`.
pub fn pullback_along_hom(d: &HsDerivation, h: &GroupLawHom) -> Result<HsDerivation> {
    let p = d.p;
    if h.source().modulus() != p {
        return Err(Error::CharacteristicMismatch(p, h.source().modulus()));
    }
    let kind = match (h.source().kind(), d.kind) {
        (LawKind::Formal, DerKind::Formal { precision }) => DerKind::Formal { precision },
        (LawKind::Truncated { m }, DerKind::Truncated { m: l }) if h.target().q() == Some(pow_usize(p, l)) => {
            DerKind::Truncated { m }
        }
        (a, b) => {
            return Err(Error::Precondition(format!(
                "homomorphism from a {a:?} law cannot pull back a {b:?} derivation"
            )))
        }
    };
    let var = kind_var(p, kind)?;
    let alpha = h.alpha(var.clone()).lift();
    let source = RatSeries::univariate(p, var, d.images().to_vec());
    let gen = eval_univariate(&source, &alpha)?;
    Ok(HsDerivation::from_parts(p, kind, gen, Some(h.source().clone())))
}

/// `d_{cX}`: the components become `c^n d_n`.
pub fn scale(d: &HsDerivation, c: Scalar) -> Result<HsDerivation> {
    if c.modulus() != d.p {
        return Err(Error::CharacteristicMismatch(d.p, c.modulus()));
    }
    let images = d
        .images()
        .iter()
        .enumerate()
        .map(|(n, r)| r.scale(c.pow(n as u64)))
        .collect();
    let gen = RatSeries::univariate(d.p, d.var(), images);
    Ok(HsDerivation::from_parts(d.p, d.kind, gen, None))
}

/// The 1-truncated additive derivation `(D^i / i!)_{i<p}` attached to the
/// ordinary derivation `D` with `D(t) = g`; requires `D^p = 0`.
pub fn from_plain_derivation(p: u64, g: &RatFn) -> Result<HsDerivation> {
    crate::field::check_prime(p)?;
    let plain = |r: &RatFn| &r.derivative() * g;
    let mut powers = vec![RatFn::t(p)];
    for _ in 1..=p {
        let next = plain(powers.last().unwrap());
        powers.push(next);
    }
    if !powers[p as usize].is_zero() {
        return Err(Error::Precondition("D^p does not vanish".into()));
    }
    let mut fact = Scalar::one(p);
    let mut images = Vec::with_capacity(p as usize);
    for (i, r) in powers.into_iter().take(p as usize).enumerate() {
        if i > 0 {
            fact = fact * Scalar::from_u64(i as u64, p);
        }
        images.push(r.scale(fact.inv().expect("i < p")));
    }
    HsDerivation::new(p, DerKind::Truncated { m: 1 }, images)
}

/// `D(t) = d_1(t)`, the ordinary derivation underlying `d`.
pub fn plain_part(d: &HsDerivation) -> RatFn {
    d.on_t(1).clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::{make_law, LawTag};
    use crate::parse::parse_ratfn;

    fn r(s: &str, p: u64) -> RatFn {
        parse_ratfn(s, p).unwrap()
    }

    fn formal(p: u64, n: usize, images: &[&str]) -> HsDerivation {
        HsDerivation::new(
            p,
            DerKind::Formal { precision: n },
            images.iter().map(|s| r(s, p)).collect(),
        )
        .unwrap()
    }

    fn law(tag: LawTag, p: u64) -> GroupLaw {
        make_law(tag, p, LawKind::Formal).unwrap()
    }

    #[test]
    fn canonical_images() {
        let ga = canonical_derivation(&law(LawTag::Additive, 3), 6).unwrap();
        assert_eq!(ga, formal(3, 6, &["t", "1"]));
        let gm = canonical_derivation(&law(LawTag::Multiplicative, 2), 4).unwrap();
        assert_eq!(gm, formal(2, 4, &["t", "t+1"]));
        let f0 = canonical_derivation(&law(LawTag::Mixed(Scalar::zero(2)), 2), 4).unwrap();
        assert_eq!(f0, canonical_derivation(&law(LawTag::Additive, 2), 4).unwrap());
    }

    #[test]
    fn evaluation() {
        let ga = canonical_derivation(&law(LawTag::Additive, 5), 6).unwrap();
        assert_eq!(ga.apply(&r("t^3", 5), 2).unwrap(), r("3t", 5));
        assert_eq!(ga.apply(&r("1/t", 5), 1).unwrap(), r("-1/t^2", 5));
        assert_eq!(ga.apply(&r("4", 5), 3).unwrap(), r("0", 5));
        assert!(matches!(ga.apply(&r("t", 5), 6), Err(Error::PrecisionExceeded { .. })));
        let gm = canonical_derivation(&law(LawTag::Multiplicative, 3), 4).unwrap();
        assert_eq!(gm.apply(&r("t^2", 3), 1).unwrap(), r("2t+2t^2", 3));
    }

    #[test]
    fn closed_forms() {
        assert_eq!(closed_form_coefficient(ClosedForm::Additive, 5, 2, 3, 1).value(), 3);
        // d_1(t^2) = 2t + 2t^2 over F_3.
        for (i, v) in [(0, 0), (1, 2), (2, 2)] {
            assert_eq!(
                closed_form_coefficient(ClosedForm::Multiplicative, 3, 1, 2, i).value(),
                v
            );
        }
        assert_eq!(
            closed_form_coefficient(ClosedForm::Multiplicative, 3, 0, 4, 4).value(),
            1
        );
        assert_eq!(
            closed_form_coefficient(ClosedForm::Multiplicative, 3, 0, 4, 3).value(),
            0
        );
        assert_eq!(multiplicative_rule_coefficient(3, 1, 1, 1).value(), 1);
        assert_eq!(multiplicative_rule_coefficient(3, 1, 1, 2).value(), 2);
    }

    #[test]
    fn iterativity() {
        for p in [2, 3] {
            for tag in [LawTag::Additive, LawTag::Multiplicative] {
                let f = law(tag, p);
                let d = canonical_derivation(&f, 12).unwrap();
                assert!(check_f_iterative(&d, &f, 12).unwrap().passed());
                let triv = HsDerivation::trivial(p, DerKind::Formal { precision: 12 }).unwrap();
                assert!(check_f_iterative(&triv, &f, 12).unwrap().passed());
            }
        }
        let ga = law(LawTag::Additive, 2);
        let bad = formal(2, 4, &["t", "1", "t"]);
        let failure = check_f_iterative(&bad, &ga, 4).unwrap().failure.unwrap();
        assert_eq!((failure.i, failure.j), (1, 2));
        assert_eq!((failure.lhs, failure.rhs), (r("1", 2), r("0", 2)));
        let bad = formal(2, 4, &["t", "1", "0", "1"]);
        let failure = check_f_iterative(&bad, &ga, 4).unwrap().failure.unwrap();
        assert_eq!((failure.i, failure.j), (1, 2));
        // X + X^2 is the truncation of an iterative series and passes.
        assert!(check_f_iterative(&formal(2, 4, &["t", "1", "1"]), &ga, 4)
            .unwrap()
            .passed());
    }

    #[test]
    fn star_group() {
        let p = 3;
        let ga = canonical_derivation(&law(LawTag::Additive, p), 9).unwrap();
        let triv = HsDerivation::trivial(p, DerKind::Formal { precision: 9 }).unwrap();
        assert_eq!(star_product(&ga, &triv).unwrap(), ga);
        let inv = star_inverse(&ga).unwrap();
        assert_eq!(inv, formal(p, 9, &["t", "-1"]));
        assert!(star_product(&ga, &inv).unwrap().is_trivial());
        assert!(star_power(&ga, 3).unwrap().is_trivial());
        assert!(pth_comp_power(&ga).unwrap().is_trivial());
        let gm = canonical_derivation(&law(LawTag::Multiplicative, p), 27).unwrap();
        assert!(gm.agrees_with(&pth_comp_power(&gm).unwrap(), 9));
    }

    #[test]
    fn composition_rules() {
        let gm2 = canonical_derivation(&law(LawTag::Multiplicative, 2), 8).unwrap();
        let x = r("t^3+1/(t+1)", 2);
        assert_eq!(compose_terms(&gm2, 1, 1, &x).unwrap(), gm2.apply(&x, 1).unwrap());
        let gm3 = canonical_derivation(&law(LawTag::Multiplicative, 3), 9).unwrap();
        let y = r("t^2", 3);
        let rhs = &gm3.apply(&y, 1).unwrap() + &gm3.apply(&y, 2).unwrap().scale(Scalar::new(2, 3));
        assert_eq!(compose_terms(&gm3, 1, 1, &y).unwrap(), rhs);
        assert!(lower_order_combination(&gm3, 2, 3, &r("1/(t^2+1)", 3))
            .unwrap()
            .is_some());
    }

    #[test]
    fn truncation_and_reindexing() {
        let p = 2;
        let gm = canonical_derivation(&law(LawTag::Multiplicative, p), 8).unwrap();
        let t1 = truncate_derivation(&gm, 1).unwrap();
        assert_eq!(t1.images(), &[r("t", p), r("t+1", p)]);
        let t2 = truncate_derivation(&gm, 2).unwrap();
        assert_eq!(truncate_derivation(&t2, 1).unwrap(), t1);
        let f1 = t1.law().unwrap().clone();
        assert!(check_f_iterative(&t1, &f1, 0).unwrap().passed());

        let ga = canonical_derivation(&law(LawTag::Additive, p), 8).unwrap();
        let up = reindex_ppower(&ga, Reindex::Inflate(1)).unwrap();
        assert_eq!(up, formal(p, 16, &["t", "0", "1"]));
        assert!(check_f_iterative(&up, &law(LawTag::Additive, p), 16).unwrap().passed());
        assert_eq!(reindex_ppower(&up, Reindex::Deflate(1)).unwrap(), ga);
        assert_eq!(reindex_ppower(&ga, Reindex::Deflate(1)), Err(Error::DeflateNonzero(1)));
    }

    #[test]
    fn pullbacks() {
        let p = 3;
        let gm = law(LawTag::Multiplicative, p);
        let c = Scalar::new(2, p);
        let fc = law(LawTag::Mixed(c), p);
        let d = canonical_derivation(&gm, 9).unwrap();
        let h = GroupLawHom::monomial(fc.clone(), gm.clone(), c, 1).unwrap();
        let pulled = pullback_along_hom(&d, &h).unwrap();
        assert!(check_f_iterative(&pulled, &fc, 9).unwrap().passed());
        assert_eq!(pulled, scale(&d, c).unwrap());
        let id = GroupLawHom::monomial(gm.clone(), gm, Scalar::one(p), 1).unwrap();
        assert_eq!(pullback_along_hom(&d, &id).unwrap(), d);

        let ga = law(LawTag::Additive, p);
        let e = canonical_derivation(&ga, 9).unwrap();
        let frob = GroupLawHom::monomial(ga.clone(), ga, Scalar::one(p), 3).unwrap();
        let inflated = reindex_ppower(&e, Reindex::Inflate(1)).unwrap();
        assert!(pullback_along_hom(&e, &frob).unwrap().agrees_with(&inflated, 9));
    }

    #[test]
    fn plain_derivations() {
        let p = 3;
        let d = from_plain_derivation(p, &RatFn::one(p)).unwrap();
        let ga1 = truncate_law(&law(LawTag::Additive, p), 1).unwrap();
        assert!(check_f_iterative(&d, &ga1, 0).unwrap().passed());
        assert_eq!(plain_part(&d), RatFn::one(p));
        // D = t d/dt has D^3 = D over F_3, so it is rejected.
        assert!(from_plain_derivation(p, &RatFn::t(p)).is_err());
    }
}
