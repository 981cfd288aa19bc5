use std::f64::consts::PI;

use proptest::prelude::*;

use otlab_core::bergman::{build_space, dual_norm_sq, minimal_extension, FunctionalVector, IdealSubspace};
use otlab_core::monomial::{HoloPoly, MultiIndex};
use otlab_core::multiplier::{
    ideal_membership, jumping_numbers, member_by_staircase, staircase_orders, ResolutionData, Q,
};
use otlab_core::quadrature::{monomial_pairing, QuadratureRule, Region};
use otlab_core::verify::config::ExperimentConfig;
use otlab_core::verify::extrapolate::extrapolate_exponential;
use otlab_core::weights::{BaseWeight, DomainSpec, GreenData, RealPoly, SingularWeight, Term, WeightSpec};
use otlab_core::Complex64;

fn rational() -> impl Strategy<Value = Q> {
    (1i64..=5, 1i64..=4).prop_map(|(n, d)| Q::new(n, d))
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn staircase_steps_by_one_at_jumps(c in rational(), a in prop::collection::vec(1u32..=5, 1..=3)) {
        let res = ResolutionData::principal(c, &MultiIndex(a)).unwrap();
        let spec = jumping_numbers(&res, Q::from_integer(3));
        for (i, jump) in spec.jumps.iter().enumerate() {
            let now = staircase_orders(&res, jump.m).orders;
            let before = staircase_orders(&res, spec.previous(i + 1)).orders;
            for k in 0..now.len() {
                let expected = before[k] + u32::from(jump.divisors.contains(&k));
                prop_assert_eq!(now[k], expected);
            }
        }
    }

    #[test]
    fn blowup_staircase_steps_by_one(c in rational(), n in 2usize..=3, d in 1u32..=3) {
        let res = ResolutionData::maximal_ideal_power(c, n, d).unwrap();
        let spec = jumping_numbers(&res, Q::from_integer(4));
        for (i, jump) in spec.jumps.iter().enumerate() {
            let now = staircase_orders(&res, jump.m).orders[0];
            let before = staircase_orders(&res, spec.previous(i + 1)).orders[0];
            prop_assert_eq!(now, before + 1);
        }
    }

    #[test]
    fn membership_shrinks_with_m(
        c in rational(),
        a in prop::collection::vec(1u32..=4, 2),
        beta in prop::collection::vec(0u32..=6, 2),
        m1 in 0i64..=24,
        dm in 0i64..=24,
    ) {
        let domain = DomainSpec::unit(2);
        let psi = SingularWeight::principal(c, MultiIndex(a), &domain).unwrap();
        let b = MultiIndex(beta);
        let lo = Q::new(m1, 8);
        let hi = lo + Q::new(dm, 8);
        let at_hi = ideal_membership(&b, hi, &psi).unwrap();
        prop_assert!(!at_hi || ideal_membership(&b, lo, &psi).unwrap());
        prop_assert_eq!(ideal_membership(&b, lo, &psi).unwrap(), member_by_staircase(psi.resolution(), &b, lo));
    }

    #[test]
    fn blowup_membership_matches_staircase(c in rational(), beta in prop::collection::vec(0u32..=6, 2), m in 0i64..=32) {
        let domain = DomainSpec::unit(2);
        let psi = SingularWeight::maximal_ideal_power(c, 1, &domain).unwrap();
        let b = MultiIndex(beta);
        let m = Q::new(m, 8);
        prop_assert_eq!(ideal_membership(&b, m, &psi).unwrap(), member_by_staircase(psi.resolution(), &b, m));
    }

    #[test]
    fn minimal_extension_is_a_projection(
        a in 0.0f64..2.0,
        coeffs in prop::collection::vec(complex(), 4),
        shift in complex(),
        k in 1u32..=5,
    ) {
        let disc = DomainSpec::unit(1);
        let w = WeightSpec::plain(BaseWeight::Radial { coefficients: vec![0.0, a] });
        let space = build_space(&disc, &w, 8, &QuadratureRule::default_for(1)).unwrap();
        let ideal = IdealSubspace::from_subvariety(&space, &GreenData::point(1));
        let f = HoloPoly {
            terms: coeffs.iter().enumerate().map(|(i, c)| (MultiIndex(vec![i as u32]), *c)).collect(),
        };
        let ext = minimal_extension(&space, &ideal, &f).unwrap();
        let plain = space.norm_sq(&space.coefficients(&f).unwrap());
        prop_assert!(ext.norm_sq <= plain * (1.0 + 1e-12));
        prop_assert!(ext.orthogonality_defect < 1e-10);
        let g = f.add(&HoloPoly { terms: vec![(MultiIndex(vec![k]), shift)] });
        let ext2 = minimal_extension(&space, &ideal, &g).unwrap();
        prop_assert!((ext2.norm_sq - ext.norm_sq).abs() <= 1e-10 * ext.norm_sq.max(1e-300));
    }

    #[test]
    fn dual_norm_bounds_values(
        v in prop::collection::vec(complex(), 6),
        h in prop::collection::vec(complex(), 6),
        re in -0.5f64..0.5,
    ) {
        let bidisc = DomainSpec::unit(2);
        let w = WeightSpec::plain(BaseWeight::Pointwise {
            terms: RealPoly {
                terms: vec![
                    Term { coeff: 1.0, x: vec![], y: vec![], s: vec![1, 1] },
                    Term { coeff: re, x: vec![1, 0], y: vec![], s: vec![] },
                ],
            },
        });
        let space = build_space(&bidisc, &w, 2, &QuadratureRule::default_for(2)).unwrap();
        prop_assert_eq!(space.dim(), 6);
        let xi = FunctionalVector::new(v);
        let lhs = xi.apply(&h).norm_sqr();
        let rhs = dual_norm_sq(&space, &xi) * space.norm_sq(&h);
        prop_assert!(lhs <= rhs * (1.0 + 1e-10));
        // The representer attains the bound.
        let r = xi.representer(&space);
        let attained = xi.apply(&r).norm_sqr();
        let bound = dual_norm_sq(&space, &xi) * space.norm_sq(&r);
        prop_assert!((attained - bound).abs() <= 1e-9 * bound);
    }

    #[test]
    fn disc_monomial_moments(k in 0u32..=40, r in 0.2f64..3.0) {
        let disc = DomainSpec::new(1, vec![r]).unwrap();
        let a = MultiIndex(vec![k]);
        let v = monomial_pairing(&a, &a, &WeightSpec::zero(), &disc, &Region::Full, &QuadratureRule::default_for(1)).unwrap();
        let expected = PI * r.powi(2 * k as i32 + 2) / (k as f64 + 1.0);
        prop_assert!((v.re - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn exponential_tail_is_recovered(limit in -5.0f64..5.0, amp in 0.1f64..3.0, sign in prop::bool::ANY, kappa in 0.3f64..2.0) {
        let amp = if sign { amp } else { -amp };
        let pts: Vec<(f64, f64)> = (1..=8).map(|i| -(i as f64)).map(|x| (x, limit + amp * (kappa * x).exp())).collect();
        let e = extrapolate_exponential(&pts).unwrap();
        prop_assert!(!e.indeterminate);
        prop_assert!((e.limit - limit).abs() < 1e-8 * limit.abs().max(1.0));
        prop_assert!((e.rate - kappa).abs() < 1e-6);
    }

    #[test]
    fn config_rejects_any_unknown_top_level_key(key in "[a-z]{3,10}") {
        let known = [
            "experiment", "description", "domain", "weight", "green", "psi", "f", "functionals", "grids", "t", "p",
            "jump", "m_max", "q_at_s", "sweep_q", "decay_t", "degree", "quadrature", "tolerances", "oracle", "output",
        ];
        prop_assume!(!known.contains(&key.as_str()));
        let json = format!(r#"{{"domain": {{"dimension": 1}}, "{key}": 1}}"#);
        prop_assert!(ExperimentConfig::from_json(&json).is_err());
    }

    #[test]
    fn config_round_trips(t in prop::collection::vec(-10.0f64..0.0, 1..8), degree in 1u32..20) {
        let mut cfg = ExperimentConfig::minimal(1);
        cfg.grids.t = Some(t);
        cfg.degree = Some(degree);
        let text = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }
}
