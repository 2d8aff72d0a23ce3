//! Linear algebra over the constants `C = F_p(t^q)`, `q = p^m`, and the
//! canonical elements of truncated additive and multiplicative derivations.
//!
//! `K = F_p(t)` is a `q`-dimensional `C`-vector space with basis
//! `1, t, ..., t^(q-1)`. Coordinates are rational functions in `s = t^q`,
//! stored as [`RatFn`] in their own variable.

use crate::derivation::{DerKind, HsDerivation};
use crate::error::{Error, Result};
use crate::field::{binomial_mod, pow_usize, Scalar};
use crate::linalg::{linsolve, same_span, LinSolution, Matrix};
use crate::poly::Poly;
use crate::ratfn::RatFn;

/// Coordinates of an element of `K` over `F_p(t^(p^m))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantsDecomposition {
    pub p: u64,
    pub m: u32,
    /// `coords[j]` is a function of `s = t^(p^m)`, the coefficient of `t^j`.
    pub coords: Vec<RatFn>,
}

impl ConstantsDecomposition {
    pub fn q(&self) -> usize {
        self.coords.len()
    }

    /// `sum_j coords[j](t^q) t^j`.
    pub fn reassemble(&self) -> RatFn {
        reassemble(self.p, &self.coords)
    }

    pub fn format(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.format_with("s")).collect()
    }
}

/// Writes `r = u/v` as `u v^(q-1) / v(s)` and splits the numerator by
/// exponent residues mod `q`.
pub fn decompose(r: &RatFn, m: u32) -> ConstantsDecomposition {
    let p = r.modulus();
    let q = pow_usize(p, m);
    let den = r.den();
    let w = r.num() * &den.pow(q as u64 - 1);
    // v^q = v(t^q) because the coefficients lie in F_p.
    let coords = w
        .split_residues(q)
        .into_iter()
        .map(|part| RatFn::new(part, den.clone()).expect("nonzero denominator"))
        .collect();
    ConstantsDecomposition { p, m, coords }
}

/// `sum_j coords[j](t^q) t^j` with `q = coords.len()`.
pub fn reassemble(p: u64, coords: &[RatFn]) -> RatFn {
    let q = coords.len();
    let mut acc = RatFn::zero(p);
    for (j, c) in coords.iter().enumerate() {
        if !c.is_zero() {
            let tj = RatFn::from_poly(Poly::monomial(Scalar::one(p), j));
            acc = &acc + &(&c.inflate(q) * &tj);
        }
    }
    acc
}

/// The matrix of `d_n` on `K` over `C = F_p(t^(p^m))` in the basis `t^j`.
///
/// Errors unless `d_n(t^(q+j)) = t^q d_n(t^j)` for every basis element,
/// which is what makes `d_n` a `C`-linear map.
pub fn linear_map_matrix(d: &HsDerivation, n: usize, m: u32) -> Result<Matrix<RatFn>> {
    let p = d.modulus();
    let q = pow_usize(p, m);
    let s = RatFn::from_poly(Poly::monomial(Scalar::one(p), q));
    let mut columns = Vec::with_capacity(q);
    for j in 0..q {
        let tj = RatFn::from_poly(Poly::monomial(Scalar::one(p), j));
        let image = d.apply(&tj, n)?;
        let shifted = d.apply(&(&tj * &s), n)?;
        if shifted != &image * &s {
            return Err(Error::NotConstantLinear { n, j });
        }
        columns.push(decompose(&image, m).coords);
    }
    Matrix::from_columns(p, q, &columns)
}

fn level_of(d: &HsDerivation) -> Result<u32> {
    match d.kind() {
        DerKind::Truncated { m } => Ok(m),
        DerKind::Formal { .. } => Err(Error::Precondition("a truncated derivation is required".into())),
    }
}

fn d1_nonzero(d: &HsDerivation) -> bool {
    d.len() > 1 && !d.on_t(1).is_zero()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeReport {
    pub m: u32,
    /// `[K : C']` where `C'` is the joint kernel of `d_n`, `0 < n < p^m`.
    pub degree: usize,
    /// Dimension of the joint kernel over `F_p(t^(p^m))`.
    pub kernel_dim: usize,
    /// Whether the joint kernel is exactly `F_p(t^(p^m))`.
    pub kernel_is_c: bool,
    /// Whether `d_1` is nonzero.
    pub precondition: bool,
}

/// `[K : C]` for the constants of `(d_n)_{n < p^m}`, computed from the
/// joint kernel of the matrices of `d_1, ..., d_{p^m - 1}` over
/// `F_p(t^(p^m))`.
pub fn constants_degree(d: &HsDerivation, m: u32) -> Result<DegreeReport> {
    if m == 0 {
        return Err(Error::ZeroLevel);
    }
    let p = d.modulus();
    let q = pow_usize(p, m);
    let mut stacked = Matrix::zeros(p, 0, q);
    for n in 1..q {
        stacked = stacked.vstack(&linear_map_matrix(d, n, m)?)?;
    }
    let kernel = stacked.kernel();
    let kernel_dim = kernel.len();
    let kernel_is_c = kernel_dim == 1 && kernel[0][1..].iter().all(|c| c.is_zero());
    Ok(DegreeReport {
        m,
        degree: q / kernel_dim.max(1),
        kernel_dim,
        kernel_is_c,
        precondition: d1_nonzero(d),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageKernelReport {
    pub image: Vec<Vec<RatFn>>,
    pub kernel: Vec<Vec<RatFn>>,
    pub equal: bool,
}

/// Compares `im(d_1)` with `ker(d_1^(p-1))` as subspaces over `F_p(t^p)`;
/// requires `d_1 != 0` and `d_1^(p) = 0`.
pub fn image_kernel_check(d: &HsDerivation) -> Result<ImageKernelReport> {
    let p = d.modulus();
    if !d1_nonzero(d) {
        return Err(Error::Precondition("d_1 vanishes".into()));
    }
    let a = linear_map_matrix(d, 1, 1)?;
    if !a.pow(p as u32)?.is_zero() {
        return Err(Error::Precondition("d_1^(p) is not zero".into()));
    }
    let image = a.column_space();
    let kernel = a.pow(p as u32 - 1)?.kernel();
    let equal = same_span(p, &image, &kernel)?;
    Ok(ImageKernelReport { image, kernel, equal })
}

/// A nonzero `x` with `d_1(x) = x`; requires `d_1 != 0` and `d_1^(p) = d_1`.
pub fn solve_dx_eq_x(d: &HsDerivation) -> Result<RatFn> {
    let p = d.modulus();
    if !d1_nonzero(d) {
        return Err(Error::Precondition("d_1 vanishes".into()));
    }
    let a = linear_map_matrix(d, 1, 1)?;
    if a.pow(p as u32)? != a {
        return Err(Error::Precondition("d_1^(p) differs from d_1".into()));
    }
    let shifted = a.sub(&Matrix::identity(p, p as usize))?;
    let kernel = shifted.kernel();
    let v = kernel
        .first()
        .ok_or_else(|| Error::Inconsistent("d_1 - id is injective".into()))?;
    Ok(reassemble(p, v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Additive,
    Multiplicative,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalElement {
    pub x: RatFn,
    pub flavor: Flavor,
    pub m: u32,
    /// Intermediate elements: the level-by-level `x` for the additive
    /// construction, `x_0, ..., x_{m-1}` for the multiplicative one.
    pub chain: Vec<RatFn>,
}

/// First index `n < p^m` at which `x` violates the defining equations:
/// `d_1(x) = 1` (additive) or `d_1(x) = x + 1 != 0` (multiplicative), and
/// `d_n(x) = 0` for `2 <= n < p^m`.
pub fn canonical_violation(d: &HsDerivation, x: &RatFn, flavor: Flavor) -> Result<Option<usize>> {
    let p = d.modulus();
    let image = d.apply_series(x)?;
    let want1 = match flavor {
        Flavor::Additive => RatFn::one(p),
        Flavor::Multiplicative => x + &RatFn::one(p),
    };
    if image.coeff1(1) != &want1 || want1.is_zero() {
        return Ok(Some(1));
    }
    Ok((2..d.len()).find(|&n| !image.coeff1(n).is_zero()))
}

/// A canonical element for an additively iterative truncated derivation.
///
/// Level one uses `x = D^(i-1)(t) / D^(i)(t)` for the last `i` with
/// `D^(i)(t) != 0`, `D = d_1`. Passing from level `k` to `k + 1` solves
/// `d_{p^k}(y) = d_{p^k}(x)` for `y` in `F_p(t^(p^k))`, a `p`-dimensional
/// space over `F_p(t^(p^(k+1)))`, and replaces `x` by `x - y`.
pub fn canonical_element_additive(d: &HsDerivation) -> Result<CanonicalElement> {
    let p = d.modulus();
    let m = level_of(d)?;
    if !d1_nonzero(d) {
        return Err(Error::Precondition("d_1 vanishes; deflate first".into()));
    }
    let t = RatFn::t(p);
    let mut iterates = vec![t.clone()];
    loop {
        let next = d.apply(iterates.last().unwrap(), 1)?;
        if next.is_zero() {
            break;
        }
        if iterates.len() > p as usize {
            return Err(Error::Precondition("d_1^(p) is not zero".into()));
        }
        iterates.push(next);
    }
    let i = iterates.len() - 1;
    let mut x = iterates[i - 1].checked_div(&iterates[i])?;
    let mut chain = vec![x.clone()];
    for k in 1..m {
        let step = pow_usize(p, k);
        let y = solve_level_step(d, &x, k)?;
        x = &x - &y;
        chain.push(x.clone());
        debug_assert!(d.apply(&x, step)?.is_zero());
    }
    let out = CanonicalElement {
        x,
        flavor: Flavor::Additive,
        m,
        chain,
    };
    if let Some(n) = canonical_violation(d, &out.x, Flavor::Additive)? {
        return Err(Error::Inconsistent(format!(
            "additive canonical element fails at index {n}"
        )));
    }
    Ok(out)
}

/// `y` in `F_p(t^(p^k))` with `d_{p^k}(y) = d_{p^k}(x)`.
fn solve_level_step(d: &HsDerivation, x: &RatFn, k: u32) -> Result<RatFn> {
    let p = d.modulus();
    let step = pow_usize(p, k);
    let target = decompose(&d.apply(x, step)?, k + 1);
    let pick = |dec: &ConstantsDecomposition| -> Result<Vec<RatFn>> {
        for (j, c) in dec.coords.iter().enumerate() {
            if j % step != 0 && !c.is_zero() {
                return Err(Error::Inconsistent(format!(
                    "d_{step}(x) is not constant for d_1, ..., d_{}",
                    step - 1
                )));
            }
        }
        Ok((0..p as usize).map(|l| dec.coords[l * step].clone()).collect())
    };
    let b = pick(&target)?;
    let mut columns = Vec::with_capacity(p as usize);
    for l in 0..p as usize {
        let basis = RatFn::from_poly(Poly::monomial(Scalar::one(p), l * step));
        columns.push(pick(&decompose(&d.apply(&basis, step)?, k + 1))?);
    }
    let a = Matrix::from_columns(p, p as usize, &columns)?;
    match linsolve(&a, &b)? {
        LinSolution::Solved { particular, .. } => {
            let mut coords = vec![RatFn::zero(p); step * p as usize];
            for (l, c) in particular.into_iter().enumerate() {
                coords[l * step] = c;
            }
            Ok(reassemble(p, &coords))
        }
        LinSolution::Inconsistent { .. } => Err(Error::Inconsistent(format!(
            "d_{step}(x) is not in the image of d_{step} on the constants"
        ))),
    }
}

/// Polynomials in `t` of degree at most `bound`, by increasing degree, each
/// degree enumerated over all coefficient patterns with nonzero leading term.
pub fn polynomial_search_order(p: u64, bound: usize) -> impl Iterator<Item = Poly> {
    (0..=bound).flat_map(move |deg| {
        let count = (p - 1) * p.pow(deg as u32);
        (0..count).map(move |mut code| {
            let mut coeffs = vec![0u64; deg + 1];
            for c in coeffs.iter_mut().take(deg) {
                *c = code % p;
                code /= p;
            }
            coeffs[deg] = code + 1;
            Poly::new(p, coeffs)
        })
    })
}

/// Default degree bound for the `y` search in the multiplicative case.
pub const DEFAULT_SEARCH_DEGREE: usize = 4;

/// A canonical element for a multiplicatively iterative truncated
/// derivation, with the default search bound.
pub fn canonical_element_multiplicative(d: &HsDerivation) -> Result<CanonicalElement> {
    canonical_element_multiplicative_with(d, DEFAULT_SEARCH_DEGREE)
}

/// Builds `x_0, ..., x_{m-1}` with `d_1(x_i) = x_i` and `d_{p^k}(x_i) = 0`
/// for `1 <= k <= i`, starting from `d_1(x_0) = x_0` and setting
/// `x_{i+1} = z - d_Q^(p-1)(z)`, `z = y^Q x_i`, `Q = p^(i+1)`, for the first
/// `y` in the search order giving a nonzero result. Returns `x_{m-1} - 1`.
pub fn canonical_element_multiplicative_with(d: &HsDerivation, bound: usize) -> Result<CanonicalElement> {
    let p = d.modulus();
    let m = level_of(d)?;
    if !d1_nonzero(d) {
        return Err(Error::Precondition("d_1 vanishes".into()));
    }
    let mut xi = solve_dx_eq_x(d)?;
    let mut chain = vec![xi.clone()];
    for i in 0..m.saturating_sub(1) {
        let big_q = pow_usize(p, i + 1);
        let mut found = None;
        for y in polynomial_search_order(p, bound) {
            let z = &RatFn::from_poly(y.pow(big_q as u64)) * &xi;
            let next = &z - &d.apply_iterated(&z, big_q, p as usize - 1)?;
            if !next.is_zero() {
                found = Some(next);
                break;
            }
        }
        xi = found.ok_or(Error::SearchExhausted(bound))?;
        if let Some(k) = star_violation(d, &xi, i + 1)? {
            return Err(Error::Inconsistent(format!(
                "x_{} fails its equations at d_{}",
                i + 1,
                k
            )));
        }
        chain.push(xi.clone());
    }
    let x = &xi - &RatFn::one(p);
    if let Some(n) = canonical_violation(d, &x, Flavor::Multiplicative)? {
        return Err(Error::Inconsistent(format!(
            "multiplicative canonical element fails at index {n}"
        )));
    }
    Ok(CanonicalElement {
        x,
        flavor: Flavor::Multiplicative,
        m,
        chain,
    })
}

/// First index among `1, p, ..., p^i` where `d_1(x) = x`, `d_{p^k}(x) = 0`
/// fails.
pub fn star_violation(d: &HsDerivation, x: &RatFn, i: u32) -> Result<Option<usize>> {
    let p = d.modulus();
    if d.apply(x, 1)? != *x {
        return Ok(Some(1));
    }
    for k in 1..=i {
        let n = pow_usize(p, k);
        if !d.apply(x, n)?.is_zero() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Whether `x` alone is a p-basis of `F_p(t)` over F_p, i.e. `x` is not a
/// p-th power, i.e. `dx/dt != 0`.
pub fn is_pbasis(x: &RatFn) -> bool {
    !x.derivative().is_zero()
}

/// Rank over `K` of the `p x p` matrix `(D^(l)(t^k))^q`, `D = d_1`.
pub fn independence_rank(d: &HsDerivation, q: u64) -> Result<usize> {
    let p = d.modulus();
    let mut rows = Vec::with_capacity(p as usize);
    let mut current: Vec<RatFn> = (0..p as usize)
        .map(|k| RatFn::from_poly(Poly::monomial(Scalar::one(p), k)))
        .collect();
    for _ in 0..p {
        rows.push(current.iter().map(|r| r.pow(q)).collect());
        current = current.iter().map(|r| d.apply(r, 1)).collect::<Result<_>>()?;
    }
    Ok(Matrix::from_rows(p, rows)?.rank())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralReport {
    /// `D^(p-1) + sum_l sum_i l^(p-1-i) D^(i) = 0` on every sample.
    pub identity1: bool,
    /// `D(S_l(a)) = l S_l(a)` with `S_l = sum_i l^(p-1-i) D^(i)`; `None` when
    /// `D^(p) = D` fails on `t`.
    pub identity2: Option<bool>,
    /// The expansion of `d_{p^i}^(j)(x y^(p^i))` for `p^i < len`, `j <= p`.
    pub product_rule: bool,
}

/// Evaluates the identities for `D = d_1` on the given samples.
pub fn general_identity_check(d: &HsDerivation, samples: &[RatFn]) -> Result<GeneralReport> {
    let p = d.modulus();
    let pu = p as usize;
    let iterate = |a: &RatFn, k: usize| d.apply_iterated(a, 1, k);
    let fp = |v: u64| Scalar::from_u64(v % p, p);
    let partial = |a: &RatFn, l: u64| -> Result<RatFn> {
        let mut acc = RatFn::zero(p);
        for i in 1..pu {
            let c = fp(l).pow((pu - 1 - i) as u64);
            acc = &acc + &iterate(a, i)?.scale(c);
        }
        Ok(acc)
    };
    let mut identity1 = true;
    for a in samples {
        let mut total = iterate(a, pu - 1)?;
        for l in 1..p {
            total = &total + &partial(a, l)?;
        }
        identity1 &= total.is_zero();
    }
    let t = RatFn::t(p);
    let identity2 = if iterate(&t, pu)? == d.apply(&t, 1)? {
        let mut ok = true;
        for a in samples {
            for l in 1..p {
                let s = partial(a, l)?;
                ok &= d.apply(&s, 1)? == s.scale(fp(l));
            }
        }
        Some(ok)
    } else {
        None
    };
    let mut product_rule = true;
    let mut i = 0u32;
    while pow_usize(p, i) < d.len() && samples.len() >= 2 {
        let n = pow_usize(p, i);
        for pair in samples.windows(2) {
            let (x, y) = (&pair[0], &pair[1]);
            let yq = y.pow(n as u64);
            for j in 0..=pu {
                let lhs = d.apply_iterated(&(x * &yq), n, j)?;
                let mut rhs = RatFn::zero(p);
                for l in 0..=j {
                    let c = fp(binomial_mod(j as u64, l as u64, p));
                    let term = &d.apply_iterated(x, n, j - l)? * &iterate(y, l)?.pow(n as u64);
                    rhs = &rhs + &term.scale(c);
                }
                product_rule &= lhs == rhs;
            }
        }
        i += 1;
    }
    Ok(GeneralReport {
        identity1,
        identity2,
        product_rule,
    })
}
