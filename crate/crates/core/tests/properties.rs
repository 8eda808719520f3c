//! Randomized invariants across the public API.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use pwshadow::circlemap::{compose, preimage_arc, sup_dist, Arc, CirclePoint, Lift};
use pwshadow::families::{make_beta, make_psi, BetaParams, PsiParams};
use pwshadow::measure::{affine_onto, distribution, is_preserving, lambda_equivalent, lebesgueize};
use pwshadow::seeds::random_lift;
use pwshadow::PiRational;

fn r(n: i64, d: i64) -> PiRational {
    PiRational::ratio(n, d)
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-200i64..200, 1i64..60).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn value() -> impl Strategy<Value = PiRational> {
    prop_oneof![
        3 => (rational(), rational()).prop_map(|(a, b)| PiRational::linear(&a, &b)),
        1 => (rational(), rational(), rational(), rational()).prop_filter_map("zero denominator", |(a, b, c, d)| {
            PiRational::from_polys(&[a, b], &[c, d]).ok()
        }),
    ]
}

/// A point of `[0, 1)` that is either rational or of the form `q + pi`.
fn unit_point() -> impl Strategy<Value = PiRational> {
    (0i64..997, any::<bool>()).prop_map(|(k, shifted)| {
        let x = r(k, 997);
        if shifted {
            (x + PiRational::pi()).mod1()
        } else {
            x
        }
    })
}

fn surjective_lift() -> impl Strategy<Value = Lift> {
    (any::<u64>(), prop::sample::select(vec![1i64, 2, 3, -1, -2]), 2usize..6)
        .prop_map(|(seed, deg, n)| random_lift(seed, deg, n, 30))
}

fn beta_params() -> impl Strategy<Value = BetaParams> {
    (0usize..4).prop_flat_map(|k| {
        let laps = 2 * k + 1;
        prop::collection::btree_set(1i64..400, laps - 1).prop_map(move |set| {
            let mut xs = vec![PiRational::zero()];
            xs.extend(set.into_iter().map(|n| r(n, 400)));
            xs.push(PiRational::one());
            BetaParams::new(laps, xs).unwrap()
        })
    })
}

fn psi_params() -> impl Strategy<Value = PsiParams> {
    (1i64..100, prop::collection::btree_set(1i64..600, 4)).prop_filter_map("inequalities", |(e, set)| {
        let v: Vec<PiRational> = set.into_iter().map(|n| r(n, 600)).collect();
        PsiParams::new(r(e, 600), v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_laws(x in value(), y in value(), z in value()) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&(&x - &y) + &y, x.clone());
        if !y.is_zero() {
            prop_assert_eq!(&(&x / &y) * &y, x);
        }
    }

    #[test]
    fn order_agrees_with_subtraction(x in value(), y in value()) {
        let d = &x - &y;
        prop_assert_eq!(x.cmp(&y), d.cmp(&PiRational::zero()));
        prop_assert_eq!(x.cmp(&y), y.cmp(&x).reverse());
    }

    #[test]
    fn floor_brackets_the_value(x in value()) {
        let f = PiRational::integer(x.floor());
        prop_assert!(f <= x && x < &f + &PiRational::one());
        let m = x.mod1();
        prop_assert!(!m.is_negative() && m < PiRational::one());
        prop_assert!((&x - &m).is_rational());
    }

    #[test]
    fn display_parses_back(x in value()) {
        let back: PiRational = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn lifts_commute_with_integer_shifts(l in surjective_lift(), x in unit_point(), k in -3i64..3) {
        let kk = PiRational::integer(k);
        let deg = PiRational::integer(l.degree() * k);
        prop_assert_eq!(l.eval(&(&x + &kk)), &l.eval(&x) + &deg);
    }

    #[test]
    fn sup_dist_is_a_metric(f in surjective_lift(), g in surjective_lift(), h in surjective_lift()) {
        prop_assert!(sup_dist(&f, &f).is_zero());
        prop_assert_eq!(sup_dist(&f, &g), sup_dist(&g, &f));
        prop_assert!(sup_dist(&f, &h) <= &sup_dist(&f, &g) + &sup_dist(&g, &h));
        prop_assert!(sup_dist(&f, &g) <= r(1, 2));
    }

    #[test]
    fn composition_is_associative(f in surjective_lift(), g in surjective_lift(), h in surjective_lift(), x in unit_point()) {
        let left = compose(&compose(&f, &g), &h);
        let right = compose(&f, &compose(&g, &h));
        prop_assert_eq!(left.degree(), right.degree());
        prop_assert_eq!(left.eval(&x), right.eval(&x));
        prop_assert_eq!(left.eval(&x), f.eval(&g.eval(&h.eval(&x))));
    }

    #[test]
    fn lebesgueized_maps_preserve_measure(l in surjective_lift()) {
        let g = lebesgueize(&l).unwrap();
        prop_assert!(is_preserving(&g).unwrap().verdict);
        prop_assert_eq!(lebesgueize(&g).unwrap(), g.clone());
        prop_assert!(distribution(g.as_interval_map()).is_ok());
    }

    #[test]
    fn preimages_of_preserving_maps_keep_length(l in surjective_lift(), a in 0i64..64, len in 1i64..32) {
        let g = lebesgueize(&l).unwrap();
        let arc = Arc::new(&CirclePoint::new(&r(a, 64)), &CirclePoint::new(&r(a + len, 64)));
        let pre = preimage_arc(&g, &arc).unwrap();
        let total = pre.iter().fold(PiRational::zero(), |acc, p| &acc + p.length());
        prop_assert_eq!(total, r(len, 64));
    }

    #[test]
    fn zigzags_are_preserving(p in beta_params()) {
        let map = make_beta(&p);
        let values = map.values();
        prop_assert!(values.iter().enumerate().all(|(k, v)| *v == PiRational::integer((k % 2) as i64)));
        prop_assert!(is_preserving(&Lift::from_map(map, 1).unwrap()).unwrap().verdict);
    }

    #[test]
    fn pinch_maps_fix_ends_and_preserve(p in psi_params()) {
        let map = make_psi(&p);
        prop_assert!(map.eval(&PiRational::zero()).is_zero());
        prop_assert_eq!(map.eval(&PiRational::one()), PiRational::one());
        prop_assert!(is_preserving(&Lift::from_map(map, 1).unwrap()).unwrap().verdict);
    }

    #[test]
    fn rescaled_zigzags_match_affine_surjections(
        p in beta_params(), a in -40i64..0, w in 1i64..40, c in 0i64..40, h in 1i64..40, inc in any::<bool>()
    ) {
        let (a, b, c, d) = (r(a, 16), r(a + w, 16), r(c, 16), r(c + h, 16));
        let f = make_beta(&p).rescale(&a, &b, &c, &d, inc);
        prop_assert!(lambda_equivalent(&f, &affine_onto(&a, &b, &c, &d, inc).unwrap()).unwrap());
        prop_assert!(lambda_equivalent(&f, &affine_onto(&a, &b, &c, &d, !inc).unwrap()).unwrap());
    }
}
