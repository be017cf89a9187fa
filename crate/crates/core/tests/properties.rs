use proptest::prelude::*;

use stoint::afunc::{a_closed, AArgs};
use stoint::bfunc::{b_alternating, b_series, DEFAULT_SERIES_TOL};
use stoint::coeffs::{generate_terms, ungrouped_polynomial};
use stoint::model::w_forms;
use stoint::{evaluate, EvalConfig, IntegralClass, IntegralRequest, SlaterOrbital};

fn orbital() -> impl Strategy<Value = SlaterOrbital> {
    (1u32..=3)
        .prop_flat_map(|n| (Just(n), 0..n))
        .prop_flat_map(|(n, l)| (Just(n), Just(l), -(l as i32)..=l as i32, 0.5f64..2.0))
        .prop_map(|(n, l, m, d)| SlaterOrbital::new(n, l, m, d))
}

fn class() -> impl Strategy<Value = IntegralClass> {
    prop_oneof![Just(IntegralClass::Exchange), Just(IntegralClass::Hybrid), Just(IntegralClass::Coulomb)]
}

fn request() -> impl Strategy<Value = IntegralRequest> {
    (class(), [orbital(), orbital(), orbital(), orbital()], 0.3f64..6.0)
        .prop_map(|(c, o, r)| IntegralRequest::new(c, o, r))
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn b_paths_agree(mu in 0u32..=8, g in 0u32..=6, s in 0u32..=4, beta in -25.0f64..25.0) {
        prop_assume!(s <= mu);
        let a = b_series(mu, g, beta, s, DEFAULT_SERIES_TOL).unwrap();
        let b = b_alternating(mu, g, beta, s).unwrap();
        prop_assert!(rel(a, b) < 1e-9, "{} {}", a, b);
    }

    #[test]
    fn b_parity_is_exact(mu in 0u32..=8, g in 0u32..=6, s in 0u32..=4, beta in 0.01f64..25.0) {
        prop_assume!(s <= mu);
        let p = b_series(mu, g, beta, s, DEFAULT_SERIES_TOL).unwrap();
        let n = b_series(mu, g, -beta, s, DEFAULT_SERIES_TOL).unwrap();
        let sign = if (mu + s + g) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(n, sign * p);
    }

    #[test]
    fn a_sign_alternates_with_sigma(mu in 0u32..=4, r1 in 0u32..=3, r2 in 0u32..=3, a1 in 0.3f64..12.0, a2 in 0.3f64..12.0, s in 0u32..=2) {
        prop_assume!(s <= mu);
        let v = a_closed(&AArgs::new(mu, r1, r2, a1, a2, s)).unwrap();
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(sign * v > 0.0 && v.is_finite(), "{}", v);
    }

    #[test]
    fn w_forms_agree(req in request()) {
        let w = w_forms(&req);
        prop_assert!(rel(w[0], w[1]) < 1e-12 && rel(w[0], w[2]) < 1e-12, "{:?}", w);
    }

    #[test]
    fn grouped_polynomial_matches(req in request(), x in -1.0f64..1.0, y in -1.0f64..1.0, u in 1.0f64..4.0, v in 1.0f64..4.0) {
        if let Ok(t) = generate_terms(&req) {
            let g = t.polynomial(x, y, u, v);
            let f = ungrouped_polynomial(&req, x, y, u, v).unwrap();
            let scale: f64 = t
                .terms
                .iter()
                .map(|c| {
                    let k = c.key;
                    (c.coeff * x.powi(k.g1 as i32) * y.powi(k.g2 as i32) * u.powi(k.r1 as i32) * v.powi(k.r2 as i32)).abs()
                })
                .sum();
            prop_assert!((g - f).abs() <= 1e-13 * scale.max(f.abs()), "{} {}", g, f);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn selection_zero_is_exact(req in request()) {
        prop_assume!(req.m_values().iter().sum::<i32>() != 0);
        let r = evaluate(&req, &EvalConfig::default()).unwrap();
        prop_assert!(r.zero_by_selection);
        prop_assert_eq!(r.value, 0.0);
    }

    #[test]
    fn scaling_law(z1 in 0.6f64..1.6, z2 in 0.6f64..1.6, r in 0.5f64..4.0, up in any::<bool>()) {
        let c = if up { 2.0 } else { 0.5 };
        let s = |z: f64| SlaterOrbital::new(1, 0, 0, z);
        let cfg = EvalConfig::default();
        let base = IntegralRequest::new(IntegralClass::Exchange, [s(z1), s(z1), s(z2), s(z2)], r);
        let scaled = IntegralRequest::new(IntegralClass::Exchange, [s(c * z1), s(c * z1), s(c * z2), s(c * z2)], r / c);
        let a = evaluate(&base, &cfg).unwrap().value;
        let b = evaluate(&scaled, &cfg).unwrap().value;
        prop_assert!(rel(b, c * a) < 1e-11, "{} {}", b, c * a);
    }
}
