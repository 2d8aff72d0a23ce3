//! Randomized algebraic identities.

use hasse::derivation::{
    from_plain_derivation, lower_order_combination, plain_part, reindex_ppower, star_inverse, star_product,
    truncate_derivation, Reindex,
};
use hasse::integrate::extend_canonical;
use hasse::law::{formal_inverse, mult_by_m, verschiebung};
use hasse::structure::{decompose, reassemble};
use hasse::{
    canonical_derivation, check_f_iterative, make_law, parse_ratfn, DerKind, GroupLaw, HsDerivation, LawKind, LawTag,
    Poly, RatFn, Scalar, ScalarSeries, TruncSeries, Var,
};
use proptest::prelude::*;

fn arb_poly(p: u64, len: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec(0..p, 0..len).prop_map(move |c| Poly::new(p, c))
}

fn arb_ratfn(p: u64) -> impl Strategy<Value = RatFn> {
    (arb_poly(p, 5), arb_poly(p, 4)).prop_filter_map("zero denominator", |(n, d)| RatFn::new(n, d).ok())
}

fn arb_prime() -> impl Strategy<Value = u64> {
    prop_oneof![Just(2u64), Just(3), Just(5)]
}

fn ratfns(n: usize) -> impl Strategy<Value = (u64, Vec<RatFn>)> {
    arb_prime().prop_flat_map(move |p| (Just(p), proptest::collection::vec(arb_ratfn(p), n)))
}

fn scalar_series(p: u64, vars: Vec<Var>, c: &[u64]) -> ScalarSeries {
    let size: usize = vars.iter().map(|v| v.order).product();
    let coeffs = (0..size)
        .map(|i| Scalar::from_u64(c.get(i).copied().unwrap_or(0), p))
        .collect();
    TruncSeries::from_table(p, vars, coeffs).unwrap()
}

fn two_vars(trunc: bool) -> Vec<Var> {
    if trunc {
        vec![Var::truncated("v", 4), Var::truncated("w", 4)]
    } else {
        vec![Var::precision("X", 5), Var::precision("Y", 4)]
    }
}

fn iterative_examples(p: u64, n: usize) -> Vec<(HsDerivation, GroupLaw)> {
    let ga = make_law(LawTag::Additive, p, LawKind::Formal).unwrap();
    let gm = make_law(LawTag::Multiplicative, p, LawKind::Formal).unwrap();
    let x = parse_ratfn("t^2+t", p).unwrap();
    vec![
        (canonical_derivation(&ga, n).unwrap(), ga.clone()),
        (canonical_derivation(&gm, n).unwrap(), gm.clone()),
        (extend_canonical(&x, &ga, n, None).unwrap(), ga),
        (
            extend_canonical(&parse_ratfn("1/(t+1)", p).unwrap(), &gm, n, None).unwrap(),
            gm,
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ratfn_field_axioms((p, v) in ratfns(3)) {
        let (a, b, c) = (&v[0], &v[1], &v[2]);
        prop_assert_eq!(&(a + b) + c, a + &(b + c));
        prop_assert_eq!(&(a * b) * c, a * &(b * c));
        prop_assert_eq!(a * &(b + c), &(a * b) + &(a * c));
        prop_assert_eq!(a * b, b * a);
        if !a.is_zero() {
            prop_assert_eq!(a * &a.inv().unwrap(), RatFn::one(p));
        }
        prop_assert!((a - a).is_zero());
    }

    #[test]
    fn ratfn_composition_is_a_homomorphism((p, v) in ratfns(2), g in arb_poly(5, 4)) {
        let g = RatFn::from_poly(Poly::new(p, g.raw().iter().map(|c| c % p).collect()));
        prop_assume!(!g.is_constant());
        let (a, b) = (&v[0], &v[1]);
        if let (Ok(ag), Ok(bg)) = (a.compose(&g), b.compose(&g)) {
            prop_assert_eq!((a * b).compose(&g).unwrap(), &ag * &bg);
            prop_assert_eq!((a + b).compose(&g).unwrap(), &ag + &bg);
        }
    }

    #[test]
    fn series_ring_axioms(
        trunc in any::<bool>(),
        a in proptest::collection::vec(0u64..3, 20),
        b in proptest::collection::vec(0u64..3, 20),
        c in proptest::collection::vec(0u64..3, 20),
    ) {
        let vars = two_vars(trunc);
        let (a, b, c) = (scalar_series(3, vars.clone(), &a), scalar_series(3, vars.clone(), &b), scalar_series(3, vars, &c));
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
    }

    #[test]
    fn series_composition_is_a_homomorphism(
        f in proptest::collection::vec(0u64..5, 6),
        g in proptest::collection::vec(0u64..5, 6),
        s in proptest::collection::vec(0u64..5, 20),
    ) {
        let p = 5;
        let one = vec![Var::precision("X", 6)];
        let (f, g) = (scalar_series(p, one.clone(), &f), scalar_series(p, one, &g));
        let mut s = scalar_series(p, two_vars(false), &s);
        s.set(&[0, 0], Scalar::zero(p));
        let lhs = f.mul(&g).unwrap().compose(std::slice::from_ref(&s)).unwrap();
        let rhs = f.compose(std::slice::from_ref(&s)).unwrap().mul(&g.compose(&[s]).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn series_inversion_round_trip((p, c) in arb_prime().prop_flat_map(|p| (Just(p), proptest::collection::vec(arb_ratfn(p), 1..6)))) {
        prop_assume!(!c[0].is_zero());
        let u = TruncSeries::univariate(p, Var::precision("X", 6), c);
        let inv = u.invert().unwrap();
        prop_assert_eq!(u.mul(&inv).unwrap(), TruncSeries::one(p, vec![Var::precision("X", 6)]));
    }

    #[test]
    fn decomposition_round_trip((p, v) in ratfns(1), m in 1u32..=2) {
        let r = &v[0];
        let dec = decompose(r, m);
        prop_assert_eq!(dec.coords.len(), p.pow(m) as usize);
        prop_assert_eq!(&reassemble(p, &dec.coords), r);
    }

    #[test]
    fn derivations_are_ring_homomorphisms((p, v) in ratfns(2), which in 0usize..4) {
        let (d, _) = iterative_examples(p, 8).swap_remove(which);
        let (a, b) = (&v[0], &v[1]);
        let (da, db) = (d.apply_series(a).unwrap(), d.apply_series(b).unwrap());
        prop_assert_eq!(d.apply_series(&(a * b)).unwrap(), da.mul(&db).unwrap());
        prop_assert_eq!(d.apply_series(&(a + b)).unwrap(), da.add(&db).unwrap());
        if !a.is_zero() {
            prop_assert_eq!(d.apply_series(&a.inv().unwrap()).unwrap(), da.invert().unwrap());
        }
    }

    #[test]
    fn lower_order_terms((p, v) in ratfns(1), which in 0usize..4, i in 1usize..6, j in 1usize..6) {
        prop_assume!(i + j < 8);
        let (d, _) = iterative_examples(p, 8).swap_remove(which);
        prop_assert!(lower_order_combination(&d, i, j, &v[0]).unwrap().is_some());
    }

    #[test]
    fn p_power_components_vanish_on_constants((p, v) in ratfns(1), m in 1u32..=2, which in 0usize..4) {
        let q = p.pow(m) as usize;
        let (d, _) = iterative_examples(p, q).swap_remove(which);
        let c = v[0].inflate(q);
        let image = d.apply_series(&c).unwrap();
        for n in 1..q {
            prop_assert!(image.coeff1(n).is_zero());
        }
    }

    #[test]
    fn kernel_of_d1_lies_in_lower_kernels((p, v) in ratfns(2), which in 0usize..4) {
        // a(t^p) + b(t^p) x^p is killed by d_1 for every x.
        let (d, _) = iterative_examples(p, p as usize).swap_remove(which);
        let x = parse_ratfn("t^2+t+1", p).unwrap();
        let r = &v[0].inflate(p as usize) + &(&v[1].inflate(p as usize) * &x.pow(p));
        prop_assert!(d.apply(&r, 1).unwrap().is_zero());
        for n in 2..p as usize {
            prop_assert!(d.apply(&r, n).unwrap().is_zero());
        }
    }

    #[test]
    fn star_inverse_is_an_inverse(p in arb_prime(), which in 0usize..4) {
        let (d, _) = iterative_examples(p, 8).swap_remove(which);
        let e = star_inverse(&d).unwrap();
        prop_assert!(star_product(&d, &e).unwrap().is_trivial());
        prop_assert!(star_product(&e, &d).unwrap().is_trivial());
    }

    #[test]
    fn inflate_then_deflate(p in arb_prime(), which in 0usize..4, j in 1u32..=2) {
        let (d, f) = iterative_examples(p, 6).swap_remove(which);
        let up = reindex_ppower(&d, Reindex::Inflate(j)).unwrap();
        prop_assert!(check_f_iterative(&up, &f, up.len().min(16)).unwrap().passed());
        prop_assert_eq!(reindex_ppower(&up, Reindex::Deflate(j)).unwrap(), d);
    }

    #[test]
    fn plain_derivations_round_trip(p in arb_prime(), g in arb_poly(5, 4)) {
        // g in F_p(t^p) gives D = g d/dt with D^p = 0.
        let g = RatFn::from_poly(Poly::new(p, g.raw().iter().map(|c| c % p).collect())).inflate(p as usize);
        prop_assume!(!g.is_zero());
        let d = from_plain_derivation(p, &g).unwrap();
        let ga1 = make_law(LawTag::Additive, p, LawKind::Truncated { m: 1 }).unwrap();
        prop_assert!(check_f_iterative(&d, &ga1, d.len()).unwrap().passed());
        prop_assert_eq!(&plain_part(&d), &g);
        let back = from_plain_derivation(p, &plain_part(&d)).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(truncate_derivation(&back, 1).unwrap(), d);
    }
}

fn endomorphism_holds(f: &GroupLaw, k: u64, order: usize) -> bool {
    let fxy = f.series(order);
    let vars = fxy.vars().to_vec();
    let mk = mult_by_m(f, k, order).unwrap();
    let lhs = mk.compose(std::slice::from_ref(&fxy)).unwrap();
    let x = ScalarSeries::variable(f.modulus(), vars.clone(), 0);
    let y = ScalarSeries::variable(f.modulus(), vars, 1);
    let (kx, ky) = (mk.compose(&[x]).unwrap(), mk.compose(&[y]).unwrap());
    lhs == f.apply(&kx, &ky).unwrap()
}

#[test]
fn multiplication_by_m_is_an_endomorphism() {
    for p in [2u64, 3, 5] {
        for kind in [LawKind::Formal, LawKind::Truncated { m: 2 }] {
            let laws = [
                make_law(LawTag::Additive, p, kind).unwrap(),
                make_law(LawTag::Multiplicative, p, kind).unwrap(),
                make_law(LawTag::Mixed(Scalar::new(p as i64 - 1, p)), p, kind).unwrap(),
            ];
            for f in &laws {
                for k in 1..=p + 1 {
                    assert!(endomorphism_holds(f, k, 12), "{f} k={k} p={p}");
                }
            }
        }
    }
}

#[test]
fn verschiebung_and_inverse_are_consistent() {
    for p in [2u64, 3, 5] {
        for tag in [
            LawTag::Additive,
            LawTag::Multiplicative,
            LawTag::Mixed(Scalar::new(2, p)),
        ] {
            let f = make_law(tag, p, LawKind::Formal).unwrap();
            let n = 30;
            let mp = mult_by_m(&f, p, n).unwrap();
            let vw = verschiebung(&f, n).unwrap();
            for (i, c) in vw.v.raw().iter().enumerate() {
                assert_eq!(c, mp.coeff1(i * p as usize));
            }
            assert_eq!(vw.v, vw.w);
            let inv = formal_inverse(&f, n).unwrap();
            let x = ScalarSeries::variable(p, inv.vars().to_vec(), 0);
            assert!(f.apply(&x, &inv).unwrap().is_zero());
            assert!(f.apply(&inv, &x).unwrap().is_zero());
        }
    }
}

#[test]
fn newton_roots_are_unique() {
    let p = 3;
    let ga = make_law(LawTag::Additive, p, LawKind::Formal).unwrap();
    let x = parse_ratfn("(t^3+t)/(t^2+1)", p).unwrap();
    let a = extend_canonical(&x, &ga, 20, None).unwrap();
    let b = extend_canonical(&x, &ga, 20, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.apply_series(&x).unwrap().raw()[1], RatFn::one(p));
    assert!(matches!(a.kind(), DerKind::Formal { precision: 20 }));
}
