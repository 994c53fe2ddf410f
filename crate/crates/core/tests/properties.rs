//! Invariants as properties over random fields and parameters.

use proptest::prelude::*;

use semilinear_lab::config::ExperimentConfig;
use semilinear_lab::data::{classify_case, Case};
use semilinear_lab::heat::{heat_apply, HeatModel, Propagator};
use semilinear_lab::norms::{morrey_norm, primed_norm, strong_average_norm, weak_zygmund_norm};
use semilinear_lab::phi::Phi;
use semilinear_lab::rearrangement::rearrange;
use semilinear_lab::report::{fmt_f64, to_json};
use semilinear_lab::system::{run_iteration, IterationOptions, SystemParams, TimeSchedule};
use semilinear_lab::{Field, GridGeometry};

fn field_1d(m: usize) -> impl Strategy<Value = Field> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..10.0f64, (1u32..4).prop_map(|k| k as f64)], m)
        .prop_map(move |v| Field::new(GridGeometry::new(1, 4.0, m).unwrap(), v).unwrap())
}

fn phi() -> impl Strategy<Value = Phi> {
    prop_oneof![Just(Phi::Identity), (0.5..3.0f64).prop_map(Phi::log)]
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rearrangement_is_non_increasing_and_equimeasurable(f in field_1d(64), r in 1.0..6.0f64) {
        let p = rearrange(&f);
        prop_assert!(p.levels().windows(2).all(|w| w[0] > w[1]));
        let (a, b) = (p.lr_norm(r), f.lp_norm(r));
        prop_assert!(close(a, b, a.max(b)));
        prop_assert!(close(p.total_mass(), f.integral(), f.integral()));
    }

    #[test]
    fn rearrangement_is_homogeneous_and_translation_invariant(f in field_1d(64), k in 0.01..100.0f64, shift in -40isize..40) {
        let p = rearrange(&f);
        let pk = rearrange(&f.scale(k).unwrap());
        let pt = rearrange(&f.translate(&[shift, 0, 0]));
        for s in [0.0, 0.1, 0.5, 1.0, 3.0, 7.9] {
            prop_assert!(close(pk.f_star(s), k * p.f_star(s), k * p.max_level()));
            prop_assert_eq!(pt.f_star(s), p.f_star(s));
        }
    }

    #[test]
    fn maximal_average_dominates(f in field_1d(64), s in 1e-3..8.0f64) {
        let p = rearrange(&f);
        prop_assert!(p.f_star_star(s).unwrap() >= p.f_star(s) * (1.0 - 1e-12));
    }

    #[test]
    fn norm_chain(f in field_1d(64), r in 1.2..5.0f64, alpha in 0.0..2.0f64, phi in phi()) {
        let weak = weak_zygmund_norm(&f, r, alpha, &phi);
        let strong = strong_average_norm(&f, r, alpha, &phi);
        let primed = primed_norm(&f, r, alpha, &phi).unwrap();
        let scale = strong.max(1e-300);
        prop_assert!(weak <= strong + 1e-10 * scale);
        prop_assert!(weak <= primed + 1e-10 * scale);
        prop_assert!(primed <= r / (r - 1.0) * weak + 1e-10 * scale);
    }

    #[test]
    fn norms_are_homogeneous(f in field_1d(64), k in 0.01..100.0f64, r in 1.0..5.0f64, phi in phi()) {
        let a = strong_average_norm(&f.scale(k).unwrap(), r, 0.5, &phi);
        let b = k * strong_average_norm(&f, r, 0.5, &phi);
        prop_assert!((a - b).abs() <= 1e-10 * a.max(b));
    }

    #[test]
    fn morrey_power_identity(f in field_1d(64), q in 1.0..3.0f64, r in 1.5..4.0f64) {
        let lhs = morrey_norm(&f.pointwise_power(q), r, 1.0, 1.0).unwrap();
        let rhs = morrey_norm(&f, q * r, q, 1.0).unwrap().powf(q);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(rhs).max(1e-300));
    }

    #[test]
    fn lattice_heat_is_positive_contractive_and_conservative(f in field_1d(64), dt in 1e-4..1.0f64) {
        let prop = Propagator::with_model(f.geometry(), HeatModel::Lattice);
        let (out, clamped) = prop.apply(f.values(), dt);
        let g = Field::new(*f.geometry(), out).unwrap();
        prop_assert!(clamped <= 1e-12 * f.integral().max(1e-300));
        prop_assert!(g.max() <= f.max() * (1.0 + 1e-12));
        prop_assert!(close(g.integral(), f.integral(), f.integral()));
    }

    #[test]
    fn spectral_semigroup_identity(f in field_1d(64), t1 in 0.05..0.5f64, t2 in 0.05..0.5f64) {
        let a = heat_apply(&heat_apply(&f, 1.0, t1).unwrap().field, 1.0, t2).unwrap().field;
        let b = heat_apply(&f, 1.0, t1 + t2).unwrap().field;
        prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-12 * f.max().max(1e-300));
    }

    #[test]
    fn exactly_one_case(n in 1usize..4, p in 0.3..6.0f64, q in 0.3..6.0f64) {
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        match classify_case(n, p, q) {
            Ok(l) => prop_assert!(p * q > 1.0 && l.fujita == 1.0 + 2.0 / n as f64),
            Err(_) => prop_assert!(p * q <= 1.0),
        }
    }

    #[test]
    fn floats_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        let back: f64 = serde_json::from_str(&to_json(&x)).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn config_round_trip(case in prop_oneof![Just(Case::A), Just(Case::B), Just(Case::C), Just(Case::D), Just(Case::E), Just(Case::F)], c in 0.0..10.0f64) {
        let cfg = ExperimentConfig::default_for_case(case, c);
        let text = cfg.to_toml_string().unwrap();
        prop_assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn picard_iterates_increase(u in field_1d(32), v in field_1d(32), c in 1e-3..0.2f64, p in 1.5..3.0f64, q in 1.5..3.0f64) {
        let params = SystemParams::new(1, p.min(q), p.max(q), 1.0, 1.0).unwrap();
        let sched = TimeSchedule::new(0.05, 12, 2.0).unwrap();
        let trace = run_iteration(&u.scale(c).unwrap(), &v.scale(c).unwrap(), &params, &sched, &IterationOptions::default(), None).unwrap();
        for r in &trace.records {
            prop_assert!(r.max_drop <= 1e-12, "iterate {} dropped by {}", r.n, r.max_drop);
        }
    }
}
