use hasse::derivation::{pullback_along_hom, truncate_derivation};
use hasse::integrate::{integrate_additive, integrate_multiplicative};
use hasse::sample::random_ratfn;
use hasse::structure::{
    canonical_element_additive, canonical_element_multiplicative, constants_degree, general_identity_check,
    image_kernel_check, independence_rank, solve_dx_eq_x, star_violation,
};
use hasse::{
    canonical_derivation, check_f_iterative, make_law, GroupLawHom, HsDerivation, LawKind, LawTag, RatFn, Scalar,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn truncated(tag: LawTag, p: u64, m: u32) -> HsDerivation {
    let f = make_law(tag, p, LawKind::Truncated { m }).unwrap();
    canonical_derivation(&f, p.pow(m) as usize).unwrap()
}

#[test]
fn canonical_elements_vanish_below_the_level() {
    for p in [2u64, 3] {
        for m in [1u32, 2] {
            let q = p.pow(m) as usize;
            let d = truncated(LawTag::Additive, p, m);
            let x = canonical_element_additive(&d).unwrap().x;
            // Checking p-power indices alone already forces the rest.
            let image = d.apply_series(&x).unwrap();
            assert_eq!(image.coeff1(1), &RatFn::one(p));
            assert!((2..q).all(|n| image.coeff1(n).is_zero()));
        }
    }
}

#[test]
fn multiplicative_chain_satisfies_each_stage() {
    for p in [2u64, 3] {
        for m in [1u32, 2] {
            let d = truncated(LawTag::Multiplicative, p, m);
            let ce = canonical_element_multiplicative(&d).unwrap();
            assert_eq!(ce.chain.len(), m as usize);
            for (i, xi) in ce.chain.iter().enumerate() {
                assert_eq!(
                    star_violation(&d, xi, i as u32).unwrap(),
                    None,
                    "p={p} m={m} x_{i}={xi}"
                );
            }
            assert_eq!(ce.x, &ce.chain[m as usize - 1] - &RatFn::one(p));
        }
    }
}

#[test]
fn eigenvector_of_d1() {
    for p in [2u64, 3, 5] {
        let d = truncated(LawTag::Multiplicative, p, 1);
        let x = solve_dx_eq_x(&d).unwrap();
        assert!(!x.is_zero());
        assert_eq!(d.apply(&x, 1).unwrap(), x);
    }
}

#[test]
fn image_equals_kernel_for_plain_derivations() {
    for p in [2u64, 3] {
        let rep = image_kernel_check(&truncated(LawTag::Additive, p, 1)).unwrap();
        assert!(rep.equal, "p={p}");
    }
}

#[test]
fn p_power_rows_are_independent() {
    for p in [2u64, 3] {
        let d = truncated(LawTag::Additive, p, 1);
        for q in [1, p] {
            assert_eq!(independence_rank(&d, q).unwrap(), p as usize, "p={p} q={q}");
        }
    }
}

#[test]
fn general_identities_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [2u64, 3] {
        let samples: Vec<RatFn> = (0..4).map(|_| random_ratfn(&mut rng, p, 3)).collect();
        let gm = truncated(LawTag::Multiplicative, p, 2);
        let rep = general_identity_check(&gm, &samples).unwrap();
        assert!(
            rep.identity1 && rep.identity2 == Some(true) && rep.product_rule,
            "p={p}: {rep:?}"
        );
        let ga = truncated(LawTag::Additive, p, 2);
        let rep = general_identity_check(&ga, &samples).unwrap();
        assert!(
            rep.identity1 && rep.identity2.is_none() && rep.product_rule,
            "p={p}: {rep:?}"
        );
    }
}

#[test]
fn joint_kernel_is_the_constant_field() {
    for p in [2u64, 3] {
        for m in [1u32, 2] {
            for tag in [LawTag::Additive, LawTag::Multiplicative] {
                let rep = constants_degree(&truncated(tag, p, m), m).unwrap();
                assert_eq!(rep.kernel_dim, 1);
                assert!(rep.kernel_is_c);
            }
        }
    }
}

#[test]
fn pulled_back_mixed_laws_integrate_multiplicatively() {
    // X -> X/c maps Gm to X + Y + cXY, so F_c[1]-derivations pull back to
    // Gm[1]-derivations.
    for p in [2u64, 3, 5] {
        for c in 1..p as i64 {
            let c = Scalar::new(c, p);
            let fc = make_law(LawTag::Mixed(c), p, LawKind::Truncated { m: 1 }).unwrap();
            let gm1 = make_law(LawTag::Multiplicative, p, LawKind::Truncated { m: 1 }).unwrap();
            let d = canonical_derivation(&fc, p as usize).unwrap();
            let h = GroupLawHom::monomial(gm1.clone(), fc, c.inv().unwrap(), 1).unwrap();
            let pulled = pullback_along_hom(&d, &h).unwrap();
            assert!(check_f_iterative(&pulled, &gm1, p as usize).unwrap().passed());
            let res = integrate_multiplicative(&pulled, 16, None).unwrap();
            assert!(res.audit.passed());
            assert_eq!(truncate_derivation(&res.output, 1).unwrap(), pulled);
        }
    }
}

#[test]
fn integrated_outputs_resume_consistently() {
    let p = 3;
    let d = truncated(LawTag::Additive, p, 2);
    let res = integrate_additive(&d, 10, None).unwrap();
    let longer = res.resume(30, None).unwrap();
    assert!(longer.agrees_with(&res.output, 10));
    let ga = make_law(LawTag::Additive, p, LawKind::Formal).unwrap();
    assert!(check_f_iterative(&longer, &ga, 30).unwrap().passed());
}
