//! The verification suites run by `hsd verify`.

use hasse::derivation::{
    closed_form_coefficient, compose_terms, lower_order_combination, multiplicative_rule_coefficient, pth_comp_power,
    pullback_along_hom, scale, star_power, truncate_derivation, ClosedForm,
};
use hasse::integrate::extend_canonical;
use hasse::law::{check_group_law, mult_by_m, verschiebung};
use hasse::sample::{random_ratfn, random_unit};
use hasse::structure::{
    canonical_element_additive, canonical_element_multiplicative, canonical_violation, constants_degree,
    general_identity_check, Flavor,
};
use hasse::{
    canonical_derivation, check_f_iterative, integrate_additive, integrate_multiplicative, make_law, GroupLaw,
    GroupLawHom, HsDerivation, LawKind, LawTag, RatFn, Result, Scalar,
};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One parameter tuple of a suite run.
#[derive(Clone, Debug)]
pub struct Case {
    pub p: u64,
    pub m: Option<u32>,
    pub order: usize,
    pub samples: usize,
    pub seed: u64,
    pub budget: Option<usize>,
}

impl Case {
    fn m(&self) -> u32 {
        self.m.expect("suite declared uses_m")
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        let tuple = self.p << 8 | self.m.unwrap_or(0) as u64;
        ChaCha8Rng::seed_from_u64(self.seed ^ tuple.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
    }
}

/// `Ok(None)` on success, `Ok(Some(witness))` on a mathematical failure.
pub type Outcome = Result<Option<String>>;

pub struct Suite {
    pub name: &'static str,
    pub about: &'static str,
    pub uses_m: bool,
    pub run: fn(&Case) -> Outcome,
}

pub static SUITES: &[Suite] = &[
    Suite {
        name: "laws",
        about: "group-law axioms for Ga, Gm and F_c",
        uses_m: false,
        run: laws,
    },
    Suite {
        name: "iterativity",
        about: "canonical derivations are F-iterative; perturbations are caught",
        uses_m: false,
        run: iterativity,
    },
    Suite {
        name: "closed-form",
        about: "canonical Ga and Gm on t^k against binomial closed forms",
        uses_m: false,
        run: closed_form,
    },
    Suite {
        name: "ppower-support",
        about: "the p-th star power lives on multiples of p and equals d^(p)",
        uses_m: false,
        run: ppower_support,
    },
    Suite {
        name: "composing",
        about: "E_(m) = ev_[m]_F o d_X for m <= p+1",
        uses_m: false,
        run: composing,
    },
    Suite {
        name: "pthpower",
        about: "d^(p) = ev_W o d_X; trivial for Ga, d itself for Gm",
        uses_m: false,
        run: pthpower,
    },
    Suite {
        name: "approx",
        about: "d_j d_i - C(i+j,i) d_(i+j) lies in the span of lower components",
        uses_m: true,
        run: approx,
    },
    Suite {
        name: "multiter",
        about: "the composition rule for Gm, i+j < p^2",
        uses_m: false,
        run: multiter,
    },
    Suite {
        name: "degree",
        about: "[K:C] = p^m via the joint kernel",
        uses_m: true,
        run: degree,
    },
    Suite {
        name: "canonical",
        about: "canonical elements on canonical and pulled-back inputs",
        uses_m: true,
        run: canonical,
    },
    Suite {
        name: "general",
        about: "identities for d_1 and the p-power product rule on samples",
        uses_m: true,
        run: general,
    },
    Suite {
        name: "roundtrip-additive",
        about: "integrate Ga[m] inputs and truncate back",
        uses_m: true,
        run: roundtrip_additive,
    },
    Suite {
        name: "roundtrip-multiplicative",
        about: "integrate Gm[m] inputs and truncate back",
        uses_m: true,
        run: roundtrip_multiplicative,
    },
    Suite {
        name: "non-uniqueness",
        about: "x = t and x = t^p + t integrate Ga[1] differently",
        uses_m: false,
        run: non_uniqueness,
    },
];

pub fn find(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

macro_rules! fail_if {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
            return Ok(Some(format!($($msg)+)));
        }
    };
}

fn builtins(p: u64, kind: LawKind) -> Result<Vec<GroupLaw>> {
    let mut out = vec![
        make_law(LawTag::Additive, p, kind)?,
        make_law(LawTag::Multiplicative, p, kind)?,
    ];
    for c in 1..p as i64 {
        out.push(make_law(LawTag::Mixed(Scalar::new(c, p)), p, kind)?);
    }
    Ok(out)
}

fn laws(c: &Case) -> Outcome {
    for f in builtins(c.p, LawKind::Formal)? {
        let rep = check_group_law(&f, c.order);
        if let Some(w) = rep.failure {
            return Ok(Some(format!("{f}: {} fails at {:?}", w.axiom, w.exponents)));
        }
    }
    Ok(None)
}

fn iterativity(c: &Case) -> Outcome {
    let p = c.p;
    for kind in [LawKind::Formal, LawKind::Truncated { m: 1 }] {
        for f in builtins(p, kind)? {
            let d = canonical_derivation(&f, c.order)?;
            let rep = check_f_iterative(&d, &f, d.len())?;
            if let Some(w) = rep.failure {
                return Ok(Some(format!("{f}: fails at ({}, {})", w.i, w.j)));
            }
        }
    }
    if c.order > 2 {
        for f in builtins(p, LawKind::Formal)? {
            let d = canonical_derivation(&f, c.order)?;
            let mut images = d.images().to_vec();
            images[2] = &images[2] + &RatFn::t(p);
            let bad = HsDerivation::new(p, d.kind(), images)?;
            fail_if!(
                check_f_iterative(&bad, &f, c.order)?.passed(),
                "{f}: perturbed derivation passed"
            );
        }
    }
    Ok(None)
}

fn closed_form(c: &Case) -> Outcome {
    let p = c.p;
    let top = c.order.min(13) as u64;
    for (tag, cf) in [
        (LawTag::Additive, ClosedForm::Additive),
        (LawTag::Multiplicative, ClosedForm::Multiplicative),
    ] {
        let d = canonical_derivation(&make_law(tag, p, LawKind::Formal)?, top as usize)?;
        for k in 0..top {
            let tk = RatFn::t(p).pow(k);
            for n in 0..top {
                let got = d.apply(&tk, n as usize)?;
                let mut want = RatFn::zero(p);
                for i in 0..=k {
                    want = &want + &RatFn::t(p).pow(i).scale(closed_form_coefficient(cf, p, n, k, i));
                }
                fail_if!(got != want, "{tag:?}: d_{n}(t^{k}) = {got}, expected {want}");
            }
        }
    }
    Ok(None)
}

fn ppower_support(c: &Case) -> Outcome {
    let p = c.p;
    let pu = p as usize;
    for f in builtins(p, LawKind::Formal)? {
        let d = canonical_derivation(&f, c.order)?;
        let power = star_power(&d, pu)?;
        if let Some(e) = (0..power.len()).find(|&e| e % pu != 0 && !power.on_t(e).is_zero()) {
            return Ok(Some(format!("{f}: X^{e} coefficient {}", power.on_t(e))));
        }
        let pth = pth_comp_power(&d)?;
        for i in 0..pth.len() {
            let direct = d.apply_iterated(&RatFn::t(p), i, pu)?;
            fail_if!(pth.on_t(i) != &direct, "{f}: index {i}: {} vs {direct}", pth.on_t(i));
        }
    }
    Ok(None)
}

fn composing(c: &Case) -> Outcome {
    let p = c.p;
    for f in builtins(p, LawKind::Formal)? {
        let d = canonical_derivation(&f, c.order)?;
        for m in 1..=p + 1 {
            let e = star_power(&d, m as usize)?;
            let want = d.gen_image().compose(&[mult_by_m(&f, m, c.order)?.lift()])?;
            fail_if!(e.gen_image() != &want, "{f}: E_({m}) differs from ev_[{m}]");
        }
    }
    Ok(None)
}

fn pthpower(c: &Case) -> Outcome {
    let p = c.p;
    for f in builtins(p, LawKind::Formal)? {
        let d = canonical_derivation(&f, c.order)?;
        let pth = pth_comp_power(&d)?;
        let w = verschiebung(&f, c.order)?.w;
        let want = d.gen_image().with_order(w.order()).compose(&[w.lift()])?;
        fail_if!(pth.gen_image() != &want, "{f}: d^(p) differs from ev_W");
        let expected = match f.tag() {
            LawTag::Additive => pth.is_trivial(),
            LawTag::Multiplicative => pth.agrees_with(&d, pth.len()),
            _ => true,
        };
        fail_if!(!expected, "{f}: d^(p) is not the expected special case");
    }
    Ok(None)
}

fn approx(c: &Case) -> Outcome {
    let p = c.p;
    let q = p.pow(c.m()) as usize;
    if q < 3 {
        return Ok(None);
    }
    let laws = builtins(p, LawKind::Formal)?;
    let mut rng = c.rng(1);
    for k in 0..c.samples {
        let f = &laws[(rng.next_u32() as usize) % laws.len()];
        let d = scale(&canonical_derivation(f, q)?, random_unit(&mut rng, p))?;
        let i = 1 + (rng.next_u32() as usize) % (q - 2);
        let j = 1 + (rng.next_u32() as usize) % (q - 1 - i);
        let r = random_ratfn(&mut rng, p, 3);
        fail_if!(
            lower_order_combination(&d, i, j, &r)?.is_none(),
            "sample {k}: {f}, (i, j) = ({i}, {j}), r = {r}"
        );
    }
    Ok(None)
}

fn multiter(c: &Case) -> Outcome {
    let p = c.p;
    let q = (p * p) as usize;
    let gm = make_law(LawTag::Multiplicative, p, LawKind::Formal)?;
    let d = canonical_derivation(&gm, q)?;
    let fxy = gm.series(q);
    let mut rng = c.rng(2);
    let mut tests = vec![RatFn::t(p)];
    tests.extend((0..c.samples.min(4)).map(|_| random_ratfn(&mut rng, p, 3)));
    for i in 0..q {
        for j in 0..q - i {
            for n in i.max(j)..=i + j {
                let coeff = multiplicative_rule_coefficient(p, i as u64, j as u64, n as u64);
                let oracle = fxy.pow(n as u64).coeff(&[i, j]);
                fail_if!(coeff != oracle, "coefficient ({i}, {j}, {n}): {coeff} vs {oracle}");
            }
            for r in &tests {
                let lhs = compose_terms(&d, j, i, r)?;
                let mut rhs = RatFn::zero(p);
                for n in i.max(j)..=i + j {
                    let coeff = multiplicative_rule_coefficient(p, i as u64, j as u64, n as u64);
                    rhs = &rhs + &d.apply(r, n)?.scale(coeff);
                }
                fail_if!(lhs != rhs, "d_{i} d_{j} on {r}");
            }
        }
    }
    Ok(None)
}

fn degree(c: &Case) -> Outcome {
    let (p, m) = (c.p, c.m());
    for tag in [LawTag::Additive, LawTag::Multiplicative] {
        let d = canonical_derivation(&make_law(tag, p, LawKind::Truncated { m })?, 1)?;
        let rep = constants_degree(&d, m)?;
        fail_if!(
            rep.degree != p.pow(m) as usize || !rep.kernel_is_c,
            "{tag:?}: degree {} kernel dimension {}",
            rep.degree,
            rep.kernel_dim
        );
    }
    Ok(None)
}

/// The canonical `F[m]`-derivation and its pullbacks along endomorphisms.
fn truncated_inputs(tag: LawTag, p: u64, m: u32) -> Result<Vec<HsDerivation>> {
    let f = make_law(tag, p, LawKind::Truncated { m })?;
    let q = p.pow(m) as usize;
    let d = canonical_derivation(&f, q)?;
    let s = |c: i64| Scalar::new(c, p);
    let alphas: Vec<Vec<Scalar>> = match tag {
        LawTag::Additive => {
            let mut frob = vec![s(0); p as usize + 1];
            frob[1] = s(1);
            frob[p as usize] = s(1);
            vec![vec![s(0), s(-1)], frob]
        }
        _ => [p + 1, p - 1]
            .iter()
            .map(|&k| mult_by_m(&f, k, q).map(|a| a.raw().to_vec()))
            .collect::<Result<_>>()?,
    };
    let mut out = vec![d.clone()];
    for alpha in alphas {
        out.push(pullback_along_hom(&d, &GroupLawHom::new(f.clone(), f.clone(), alpha)?)?);
    }
    Ok(out)
}

fn canonical(c: &Case) -> Outcome {
    let (p, m) = (c.p, c.m());
    for (tag, flavor) in [
        (LawTag::Additive, Flavor::Additive),
        (LawTag::Multiplicative, Flavor::Multiplicative),
    ] {
        for (k, d) in truncated_inputs(tag, p, m)?.iter().enumerate() {
            let ce = match flavor {
                Flavor::Additive => canonical_element_additive(d)?,
                Flavor::Multiplicative => canonical_element_multiplicative(d)?,
            };
            if let Some(n) = canonical_violation(d, &ce.x, flavor)? {
                return Ok(Some(format!("{tag:?} input {k}: x = {} fails at index {n}", ce.x)));
            }
        }
    }
    Ok(None)
}

fn general(c: &Case) -> Outcome {
    let (p, m) = (c.p, c.m());
    let mut rng = c.rng(3);
    let samples: Vec<RatFn> = (0..c.samples.max(2)).map(|_| random_ratfn(&mut rng, p, 3)).collect();
    for tag in [LawTag::Additive, LawTag::Multiplicative] {
        let d = canonical_derivation(&make_law(tag, p, LawKind::Truncated { m })?, 1)?;
        let rep = general_identity_check(&d, &samples)?;
        fail_if!(
            !rep.identity1 || rep.identity2 == Some(false) || !rep.product_rule,
            "{tag:?}: {rep:?}"
        );
    }
    Ok(None)
}

fn round_trip(c: &Case, tag: LawTag) -> Outcome {
    let (p, m) = (c.p, c.m());
    let law = make_law(tag, p, LawKind::Formal)?;
    for (k, d) in truncated_inputs(tag, p, m)?.iter().enumerate() {
        let res = match tag {
            LawTag::Additive => integrate_additive(d, c.order, c.budget)?,
            _ => integrate_multiplicative(d, c.order, c.budget)?,
        };
        fail_if!(
            !res.audit.passed(),
            "input {k}: audit mismatches at {:?}",
            res.audit.mismatches
        );
        let rep = check_f_iterative(&res.output, &law, res.output.len())?;
        if let Some(w) = rep.failure {
            return Ok(Some(format!("input {k}: output fails at ({}, {})", w.i, w.j)));
        }
        if res.output.len() >= d.len() {
            fail_if!(
                &truncate_derivation(&res.output, m)? != d,
                "input {k}: truncation differs from the input"
            );
        }
    }
    Ok(None)
}

fn roundtrip_additive(c: &Case) -> Outcome {
    round_trip(c, LawTag::Additive)
}

fn roundtrip_multiplicative(c: &Case) -> Outcome {
    round_trip(c, LawTag::Multiplicative)
}

fn non_uniqueness(c: &Case) -> Outcome {
    let p = c.p;
    let pu = p as usize;
    if c.order <= pu {
        return Ok(Some(format!("order must exceed {p}")));
    }
    let ga = make_law(LawTag::Additive, p, LawKind::Formal)?;
    let d = canonical_derivation(&make_law(LawTag::Additive, p, LawKind::Truncated { m: 1 })?, 1)?;
    let mut outs = Vec::new();
    for x in [RatFn::t(p), &RatFn::t(p).pow(p) + &RatFn::t(p)] {
        fail_if!(
            canonical_violation(&d, &x, Flavor::Additive)?.is_some(),
            "{x} is not canonical"
        );
        let out = extend_canonical(&x, &ga, c.order, c.budget)?;
        fail_if!(
            !check_f_iterative(&out, &ga, c.order)?.passed(),
            "x = {x}: not iterative"
        );
        fail_if!(truncate_derivation(&out, 1)? != d, "x = {x}: truncation differs");
        outs.push(out);
    }
    let first = (0..c.order).find(|&i| outs[0].on_t(i) != outs[1].on_t(i));
    fail_if!(first != Some(pu), "first difference at {first:?}, expected {p}");
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(p: u64, m: Option<u32>) -> Case {
        Case {
            p,
            m,
            order: 9,
            samples: 5,
            seed: 3,
            budget: None,
        }
    }

    #[test]
    fn registry_names_are_unique() {
        let mut names: Vec<_> = SUITES.iter().map(|s| s.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), SUITES.len());
        assert!(find("pthpower").is_some() && find("nosuch").is_none());
    }

    #[test]
    fn suites_pass_at_small_parameters() {
        for s in SUITES {
            let m = s.uses_m.then_some(1);
            assert_eq!((s.run)(&case(3, m)).unwrap(), None, "{}", s.name);
        }
    }

    #[test]
    fn seeds_separate_parameter_tuples() {
        let (a, b) = (case(2, Some(1)), case(2, Some(2)));
        assert_ne!(a.rng(0).next_u64(), b.rng(0).next_u64());
        assert_eq!(a.rng(0).next_u64(), case(2, Some(1)).rng(0).next_u64());
    }
}
