use dunkl::root_system::{make_product_z2, RootSystem, RootSystemSpec};
use dunkl::DunklError;
use proptest::prelude::*;

#[test]
fn homogeneous_dimension_counts_both_roots() {
    assert_eq!(make_product_z2(1, &[0.0]).unwrap().homogeneous_dimension(), 1.0);
    assert_eq!(make_product_z2(1, &[1.0]).unwrap().homogeneous_dimension(), 3.0);
    assert_eq!(make_product_z2(2, &[0.5, 1.5]).unwrap().homogeneous_dimension(), 6.0);
}

#[test]
fn roots_are_normalized_and_paired() {
    let rs = make_product_z2(3, &[0.2, 0.0, 2.0]).unwrap();
    assert_eq!(rs.roots().len(), 6);
    for a in rs.roots() {
        let n2: f64 = a.vector.iter().map(|v| v * v).sum();
        assert!((n2 - 2.0).abs() < 1e-15);
        let neg: Vec<f64> = a.vector.iter().map(|v| -v).collect();
        let partner = rs.roots().iter().find(|b| b.vector == neg).expect("−α is a root");
        assert_eq!(partner.multiplicity, a.multiplicity);
    }
}

#[test]
fn negative_multiplicity_is_rejected() {
    assert!(matches!(make_product_z2(2, &[0.5, -0.1]), Err(DunklError::Parameter(_))));
    assert!(matches!(make_product_z2(0, &[]), Err(DunklError::Parameter(_))));
    assert!(matches!(make_product_z2(2, &[0.5]), Err(DunklError::Parameter(_))));
}

#[test]
fn c_k_matches_gaussian_integral() {
    // k ≡ 0: (2π)^{N/2}
    let rs = make_product_z2(3, &[0.0; 3]).unwrap();
    assert!((rs.c_k() - (2.0 * std::f64::consts::PI).powf(1.5)).abs() < 1e-12);
    // k = 1 in rank one: ∫ e^{−s²/2} 2 s² ds = 2√(2π)
    let rs = make_product_z2(1, &[1.0]).unwrap();
    assert!((rs.c_k() - 2.0 * (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    for k in [0.3, 1.7, 4.0] {
        let rs = make_product_z2(1, &[k]).unwrap();
        assert!((rs.c_k() / rs.c_k_quadrature() - 1.0).abs() < 1e-10, "k={k}");
    }
}

#[test]
fn reflection_examples() {
    let rs = make_product_z2(2, &[1.0, 1.0]).unwrap();
    let a = &rs.roots()[0];
    let image = rs.reflect(a, &a.vector);
    assert_eq!(image, a.vector.iter().map(|v| -v).collect::<Vec<_>>());
    // x ⟂ α is fixed
    let perp = [0.0, 3.5];
    assert_eq!(rs.reflect(a, &perp), perp.to_vec());
    let r1 = make_product_z2(1, &[0.5]).unwrap();
    assert_eq!(r1.reflect(&r1.roots()[0], &[1.25]), vec![-1.25]);
}

#[test]
fn weight_examples() {
    let rs = make_product_z2(1, &[1.0]).unwrap();
    // |2√2|·|−2√2|
    assert!((rs.weight(&[2.0]) - 8.0).abs() < 1e-12);
    assert_eq!(make_product_z2(2, &[0.0, 0.0]).unwrap().weight(&[0.3, -4.0]), 1.0);
    assert_eq!(rs.weight(&[0.0]), 0.0);
}

#[test]
fn orbit_distance_examples() {
    let rs = make_product_z2(1, &[0.5]).unwrap();
    assert_eq!(rs.orbit_distance(&[1.0], &[-1.0]), 0.0);
    assert_eq!(rs.orbit_distance(&[1.0], &[3.0]), 2.0);
    assert_eq!(rs.orbit_distance(&[0.7], &[0.7]), 0.0);
    assert_eq!(rs.orbit(&[0.7]).len(), 2);
}

#[test]
fn ball_volume_closed_forms() {
    for k in [0.0, 0.5, 1.0, 2.5] {
        let rs = make_product_z2(1, &[k]).unwrap();
        for r in [0.3f64, 1.0, 4.0] {
            let exact = 2f64.powf(k) * 2.0 * r.powf(2.0 * k + 1.0) / (2.0 * k + 1.0);
            let v = rs.ball_volume(&[0.0], r, 1e-10).unwrap();
            assert!((v / exact - 1.0).abs() < 1e-9, "k={k} r={r}: {v} vs {exact}");
        }
    }
    let rs = make_product_z2(1, &[0.0]).unwrap();
    assert!((rs.ball_volume(&[1.7], 0.4, 1e-12).unwrap() - 0.8).abs() < 1e-12);
}

#[test]
fn ball_volume_is_homogeneous_of_degree_n() {
    let tol = 1e-9;
    let rs = make_product_z2(2, &[0.5, 1.0]).unwrap();
    let big_n = rs.homogeneous_dimension();
    let x = [0.6, -0.35];
    let base = rs.ball_volume(&x, 0.8, tol).unwrap();
    for t in [0.5, 2.0, 10.0] {
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        let v = rs.ball_volume(&tx, t * 0.8, tol).unwrap();
        let expect = t.powf(big_n) * base;
        assert!((v - expect).abs() <= 10.0 * tol * expect, "t={t}");
    }
}

#[test]
fn ball_volume_is_comparable_to_the_envelope() {
    let rs = make_product_z2(2, &[0.5, 1.5]).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for x in [[0.0, 0.0], [1.0, -2.0], [5.0, 0.1], [-0.3, 7.0]] {
        for r in [0.01, 0.3, 2.0, 20.0] {
            let q = rs.ball_volume(&x, r, 1e-8).unwrap() / (r * r * rs.ball_envelope(&x, r));
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    assert!(lo > 0.0 && hi / lo < 1e3, "comparability factor {}", hi / lo);
}

#[test]
fn spec_round_trips_through_json() {
    let rs = make_product_z2(2, &[0.5, 1.0]).unwrap();
    let text = serde_json::to_string(&rs.spec()).unwrap();
    assert!(text.contains("\"N\":2"));
    let back: RootSystemSpec = serde_json::from_str(&text).unwrap();
    let rs2 = RootSystem::from_spec(&back).unwrap();
    assert_eq!(rs2.k(), rs.k());
    let bad = RootSystemSpec { group: "B2".into(), n: 2, k: vec![1.0, 1.0] };
    assert!(RootSystem::from_spec(&bad).is_err());
}

proptest! {
    #[test]
    fn reflection_is_a_bitwise_involution(x in prop::collection::vec(-1e6f64..1e6, 3), j in 0usize..6) {
        let rs = make_product_z2(3, &[0.5, 1.0, 2.0]).unwrap();
        let a = &rs.roots()[j];
        prop_assert_eq!(rs.reflect(a, &rs.reflect(a, &x)), x);
    }

    #[test]
    fn weight_is_group_invariant(x in prop::collection::vec(-10f64..10.0, 2), j in 0usize..4) {
        let rs = make_product_z2(2, &[0.7, 1.3]).unwrap();
        let a = &rs.roots()[j];
        let w = rs.weight(&x);
        prop_assert!((rs.weight(&rs.reflect(a, &x)) - w).abs() <= 1e-12 * w.max(1.0));
    }

    #[test]
    fn orbit_distance_is_a_pseudometric(
        x in prop::collection::vec(-5f64..5.0, 2),
        y in prop::collection::vec(-5f64..5.0, 2),
        z in prop::collection::vec(-5f64..5.0, 2),
    ) {
        let rs = make_product_z2(2, &[1.0, 0.5]).unwrap();
        let dxy = rs.orbit_distance(&x, &y);
        prop_assert!((dxy - rs.orbit_distance(&y, &x)).abs() < 1e-12);
        prop_assert!(dxy <= rs.orbit_distance(&x, &z) + rs.orbit_distance(&z, &y) + 1e-12);
    }
}
