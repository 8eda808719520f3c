use num_bigint::BigInt;
use num_traits::One;

use pwshadow::circlemap::{sup_dist, CirclePoint};
use pwshadow::measure::is_preserving;
use pwshadow::perturb::{perturb_pipeline, refine_against, verify_conditions};
use pwshadow::seeds::{seed_by_name, seed_maps};
use pwshadow::shadowing::{
    adversarial_orbit, gen_asymptotic_orbit, gen_pseudo_orbit, gen_pseudo_orbit_with, nearby_maps, noise_models,
    slimit_trace, verify_trace, PointChoice, Schedule, Tracer,
};
use pwshadow::PiRational;

fn r(n: i64, d: i64) -> PiRational {
    PiRational::ratio(n, d)
}

fn noise_bound(delta: &PiRational) -> PiRational {
    delta.scale(&BigInt::from(255), &BigInt::from(256))
}

#[test]
fn every_seed_gives_a_certified_system() {
    for seed in seed_maps() {
        let g = seed.build().unwrap();
        assert!(is_preserving(&g).unwrap().verdict, "{}", seed.name());
        let eps = r(1, 5);
        let sys = perturb_pipeline(&g, &eps).unwrap();
        let report = verify_conditions(&sys);
        assert!(report.all_passed(), "{}:\n{report}", seed.name());
        assert!(sys.mesh() < eps);
        assert_eq!(sys.source_dist, Some(sup_dist(&g, &sys.theta)));
        assert!(is_preserving(&sys.theta).unwrap().verdict);
    }
}

#[test]
fn traces_stay_within_the_mesh_under_every_noise_model() {
    let g = seed_by_name("tripling").unwrap().build().unwrap();
    let sys = perturb_pipeline(&g, &r(1, 5)).unwrap();
    let tracer = Tracer::new(&sys, &sys.theta).unwrap();
    let delta = noise_bound(&sys.delta);
    for (k, noise) in noise_models().iter().enumerate() {
        let orbit = gen_pseudo_orbit_with(&sys.theta, &CirclePoint::new(&r(2, 7)), &delta, 300, k as u64, noise.as_ref());
        assert!(orbit.is_consistent(&sys.theta));
        let res = tracer.trace(&orbit, 299).unwrap();
        let report = verify_trace(&sys.theta, &res.tracing_point, &orbit, &sys.mesh(), None);
        assert!(report.passed(), "{}: {report}", noise.name());
        assert_eq!(report.forward_errors, res.forward_errors);
        for s in 0..=res.horizon {
            assert!(res.arc(s).contains(&tau_iterate(&sys.theta, &res.tracing_point, s)));
        }
    }
}

fn tau_iterate(tau: &pwshadow::circlemap::Lift, z: &CirclePoint, s: usize) -> CirclePoint {
    tau.iterate(z, s).pop().unwrap()
}

#[test]
fn nearby_maps_are_traced_too() {
    let g = seed_by_name("tent").unwrap().build().unwrap();
    let sys = perturb_pipeline(&g, &r(1, 10)).unwrap();
    for (name, tau) in nearby_maps(&sys.theta, &sys.delta) {
        assert!(sup_dist(&tau, &sys.theta) < sys.delta, "{name}");
        let tracer = Tracer::new(&sys, &tau).unwrap();
        let orbit = gen_pseudo_orbit(&tau, &CirclePoint::new(&r(1, 3)), &noise_bound(&sys.delta), 200, 5);
        let res = tracer.trace(&orbit, 199).unwrap();
        assert!(res.sup_error() < sys.mesh(), "{name}");
    }
}

#[test]
fn minimax_point_never_does_worse_than_the_midpoint() {
    let g = seed_by_name("doubling").unwrap().build().unwrap();
    let sys = perturb_pipeline(&g, &r(1, 5)).unwrap();
    let tracer = Tracer::new(&sys, &sys.theta).unwrap();
    for seed in 0..5 {
        let orbit = gen_pseudo_orbit(&sys.theta, &CirclePoint::new(&r(seed as i64 + 1, 9)), &noise_bound(&sys.delta), 15, seed);
        let mid = tracer.trace_with(&orbit, 14, PointChoice::Midpoint).unwrap();
        let best = tracer.trace_with(&orbit, 14, PointChoice::Minimax).unwrap();
        assert!(best.sup_error() <= mid.sup_error());
    }
}

#[test]
fn two_scale_tracing_handles_both_handover_cases() {
    let g = seed_by_name("tripling").unwrap().build().unwrap();
    let eps = r(1, 5);
    let coarse = perturb_pipeline(&g, &eps).unwrap();
    let fine = refine_against(&coarse, &coarse.theta, &eps.scale(&BigInt::one(), &BigInt::from(4))).unwrap();
    assert!(fine.q.refines(&coarse.q));
    assert!(verify_conditions(&fine).all_passed());
    let tau = &fine.theta;
    let (ct, ft) = (Tracer::new(&coarse, tau).unwrap(), Tracer::new(&fine, tau).unwrap());

    let schedule = Schedule::Geometric { block: 8, floor: None };
    let orbit = gen_asymptotic_orbit(tau, &CirclePoint::new(&r(3, 11)), &noise_bound(&coarse.delta), &schedule, 250, 2).unwrap();
    let res = slimit_trace(&ct, &ft, &orbit, 249).unwrap();
    let switch = res.phase_switch.unwrap();
    let report = verify_trace(tau, &res.tracing_point, &orbit, &coarse.mesh(), Some((switch + 1, &fine.mesh())));
    assert!(report.passed(), "{report}");

    let adv = adversarial_orbit(&ct, &ft, 120, 3).unwrap().expect("an adversarial orbit exists");
    let res = slimit_trace(&ct, &ft, &adv, 119).unwrap();
    assert!(res.second_case);
    let switch = res.phase_switch.unwrap();
    assert!(verify_trace(tau, &res.tracing_point, &adv, &coarse.mesh(), Some((switch + 1, &fine.mesh()))).passed());
}
