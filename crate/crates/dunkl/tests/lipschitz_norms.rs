use dunkl::dunkl_kernel::{FunctionHandle, TrigSeries};
use dunkl::heat_poisson::{KernelEvaluator, TimeGrid};
use dunkl::lipschitz_norms::*;
use dunkl::root_system::make_product_z2;
use dunkl::DunklError;
use proptest::prelude::*;

fn small_grid() -> SpaceGrid {
    SpaceGrid::new(std::f64::consts::PI, 48, 16).unwrap()
}

fn small_times() -> TimeGrid {
    TimeGrid::log_spaced(1e-3, 10.0, 25).unwrap()
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

#[test]
fn space_grid_layout() {
    let g = SpaceGrid::default_grid();
    assert!(g.points.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(g.points[0], -std::f64::consts::PI);
    assert!(g.points.contains(&0.0) && g.points.contains(&2f64.powi(-32)));
    assert_eq!(g.len(), 512 + 1 + 64);
    let d = g.doubled();
    assert!(g.points.iter().all(|p| d.points.contains(p)));
    assert!(d.len() > g.len());
    assert!(g.folded().iter().all(|p| *p >= 0.0));
    assert!(SpaceGrid::new(1.0, 1, 0).is_err());
    assert!(SpaceGrid::from_points(vec![]).is_err());
    assert!(SpaceGrid::from_points(vec![0.0, f64::NAN]).is_err());
}

#[test]
fn cusp_has_unit_holder_constant() {
    for beta in [0.3, 0.5, 0.7] {
        let c = CorpusFunction::cusp(beta).unwrap();
        let e = classical_lip_norm(&c.handle, beta, &SpaceGrid::default_grid()).unwrap();
        assert!((e.seminorm - 1.0).abs() < 1e-12, "β={beta}: {}", e.seminorm);
        assert!((e.value - 2.0).abs() < 1e-12);
        assert_eq!(e.kind, EstimatorKind::Classical);
    }
}

#[test]
fn sine_holder_constant_matches_a_dense_scan() {
    let omega = 1.0;
    for beta in [0.3, 0.5, 0.7] {
        // sup over h of 2|sin(ωh/2)|/h^β, attained at a symmetric pair (−h/2, h/2)
        let exact = (1..200_000)
            .map(|i| {
                let h = i as f64 * 1e-4;
                2.0 * (0.5 * omega * h).sin().abs() / h.powf(beta)
            })
            .fold(0.0, f64::max);
        let f = CorpusFunction::sine(omega).handle;
        let e = classical_lip_norm(&f, beta, &SpaceGrid::default_grid()).unwrap();
        assert!(e.seminorm <= exact * (1.0 + 1e-9) && e.seminorm > 0.99 * exact, "β={beta}: {} vs {exact}", e.seminorm);
    }
}

#[test]
fn classical_norm_rejects_bad_exponents() {
    let f = CorpusFunction::sine(1.0).handle;
    let g = small_grid();
    assert!(matches!(classical_lip_norm(&f, 0.0, &g), Err(DunklError::Parameter(_))));
    assert!(matches!(classical_lip_norm(&f, 1.0, &g), Err(DunklError::Parameter(_))));
    assert!(matches!(zygmund_seminorm(&f, 2.0, &g), Err(DunklError::Parameter(_))));
    assert!(higher_order_classical_norm(&f, 0.5, &g).is_err());
    let cusp = CorpusFunction::cusp(0.5).unwrap().handle;
    assert!(matches!(higher_order_classical_norm(&cusp, 1.5, &g), Err(DunklError::Function(_))));
}

#[test]
fn higher_order_norm_of_the_gaussian() {
    let f = CorpusFunction::gaussian(1.0).handle;
    let g = SpaceGrid::default_grid();
    let e = higher_order_classical_norm(&f, 1.5, &g).unwrap();
    assert_eq!(e.m, Some(1));
    // ‖f‖_∞ + ‖f′‖_∞ = 1 + √(2/e)
    let lower = 1.0 + (2.0 / std::f64::consts::E).sqrt();
    assert!(e.sup_norm >= lower * (1.0 - 1e-4) && e.sup_norm <= lower + 1e-12);
    assert!(e.seminorm > 0.0 && e.seminorm < 2.0 * 2f64.sqrt());
}

#[test]
fn power_law_fit_recovers_synthetic_slopes() {
    let ts = small_times();
    let samples: Vec<(f64, f64)> = ts.times.iter().map(|&t| (t, 3.0 * t.powf(-0.7))).collect();
    let fit = fit_power_law(&samples, 0.0);
    assert!((fit.slope + 0.7).abs() < 1e-12 && (fit.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(fit.residual < 1e-12 && !fit.degenerate && fit.points == 25);
    let fit = fit_power_law(&samples, 1e9);
    assert!(fit.degenerate && fit.slope.is_nan());
}

#[test]
fn corpus_members() {
    let w = CorpusFunction::weierstrass(0.5, 2.0).unwrap();
    let CorpusKind::Weierstrass { terms, .. } = w.kind else { panic!() };
    let q = 2f64.powf(-0.5);
    assert!(q.powi(terms as i32 - 1) < 1e-4 && q.powi(terms as i32 - 2) >= 1e-4);
    assert!((w.tail_bound - q.powi(terms as i32) / (1.0 - q)).abs() < 1e-15);
    assert_eq!(default_corpus(0.5).unwrap().len(), 3);
    assert_eq!(default_corpus(1.5).unwrap().len(), 2);
    assert!(matches!(corpus_by_name("gaussian", 0.5).unwrap().kind, CorpusKind::Gaussian { .. }));
    assert!(matches!(corpus_by_name("nope", 0.5), Err(DunklError::Config(_))));
    assert!(CorpusFunction::cusp(1.5).is_err());
    assert!(CorpusFunction::weierstrass(0.5, 1.0).is_err());
}

#[test]
fn poisson_norm_barely_depends_on_the_order() {
    let ke = KernelEvaluator::poisson(&make_product_z2(1, &[0.5]).unwrap());
    let (ts, g) = (small_times(), small_grid());
    for f in [CorpusFunction::weierstrass(0.5, 2.0).unwrap().handle, CorpusFunction::sine(1.0).handle] {
        let m = order_above(0.5);
        let a = semigroup_norm_poisson_m(&ke, &f, 0.5, m, &ts, &g, 1e-8).unwrap();
        let b = semigroup_norm_poisson_m(&ke, &f, 0.5, m + 1, &ts, &g, 1e-8).unwrap();
        let r = a.value / b.value;
        assert!(r > 1.0 / 20.0 && r < 20.0, "{}: {r}", f.name);
        assert_eq!(a.m, Some(m));
    }
}

#[test]
fn semigroup_norms_are_comparable_to_the_classical_norm() {
    let (ts, g) = (small_times(), small_grid());
    for k in [0.0, 1.0] {
        let rs = make_product_z2(1, &[k]).unwrap();
        let (pk, hk) = (KernelEvaluator::poisson(&rs), KernelEvaluator::heat(&rs));
        for c in default_corpus(0.5).unwrap() {
            let base = classical_lip_norm(&c.handle, 0.5, &g).unwrap().value;
            for e in [
                semigroup_norm_poisson(&pk, &c.handle, 0.5, &ts, &g, 1e-8).unwrap(),
                semigroup_norm_heat(&hk, &c.handle, 0.5, &ts, &g, 1e-8).unwrap(),
            ] {
                let r = e.value / base;
                assert!(r > 1.0 / 50.0 && r < 50.0, "{} k={k} {:?}: {r}", c.name(), e.kind);
            }
        }
    }
}

#[test]
fn heat_estimator_needs_a_heat_evaluator() {
    let ke = KernelEvaluator::poisson(&make_product_z2(1, &[0.0]).unwrap());
    let f = CorpusFunction::sine(1.0).handle;
    assert!(semigroup_norm_heat(&ke, &f, 0.5, &small_times(), &small_grid(), 1e-8).is_err());
}

#[test]
fn empty_beta_list_is_rejected() {
    let s = NormSettings { times: small_times(), grid: small_grid(), tol: 1e-8, band: (0.02, 50.0) };
    let r = equivalence_report(&default_corpus, &[], &[0.0], &s);
    assert!(matches!(r, Err(DunklError::Parameter(_))));
}

#[test]
fn small_equivalence_report_is_in_band() {
    let s = NormSettings { times: small_times(), grid: small_grid(), tol: 1e-8, band: (0.02, 50.0) };
    let only_cusp = |b: f64| Ok(vec![CorpusFunction::cusp(b)?]);
    let rows = equivalence_report(&only_cusp, &[0.5], &[0.0, 1.0], &s).unwrap();
    assert!(rows.len() >= 4);
    for r in &rows {
        assert!(r.in_band(), "{r:?}");
        assert!(r.value.is_finite() && r.grid_points == s.grid.len());
    }
    let again = equivalence_report(&only_cusp, &[0.5], &[0.0, 1.0], &s).unwrap();
    assert_eq!(rows, again);
}

#[test]
fn bessel_potential_of_eigenfunctions() {
    // k = 0: cos(ωx); k = 1: sin(λx)/(λx). Both have symbol (1 + λ²)^{−γ/2}.
    let cos = FunctionHandle::trig_series("cos", TrigSeries::cosines(0.0, vec![(1.0, 2.0)]));
    let sincf = FunctionHandle::new_1d("j", |x| sinc(2.0 * x)).with_sup_norm(1.0).with_even(true).with_scale(0.25).with_active_radius(2000.0);
    for (k, f) in [(0.0, cos), (1.0, sincf)] {
        let ke = KernelEvaluator::heat(&make_product_z2(1, &[k]).unwrap());
        for gamma in [0.4, 1.0] {
            let sym = 5f64.powf(-0.5 * gamma);
            for x in [0.0, 0.7] {
                let v = bessel_potential_apply(&ke, &f, gamma, x, 1e-9).unwrap();
                assert!((v - sym * f.eval1(x)).abs() < 1e-6, "k={k} γ={gamma} x={x}: {v} vs {}", sym * f.eval1(x));
            }
        }
        let a = bessel_potential_compose(&ke, &f, 0.4, 0.6, 0.7, 1e-9).unwrap();
        assert!((a - 5f64.powf(-0.5) * f.eval1(0.7)).abs() < 1e-6);
    }
}

#[test]
fn bessel_rule_mass_is_one() {
    let f = FunctionHandle::constant(1.0);
    for gamma in [0.2, 0.8, 1.6] {
        let r = BesselRule::new(gamma, &f).unwrap();
        assert!((r.mass() - 1.0).abs() < 1e-9, "γ={gamma}: {}", r.mass());
    }
    let c = BesselRule::composed(0.4, 0.6, 1e-14, 60.0, 1e-10).unwrap();
    assert!((c.mass() - 1.0).abs() < 1e-8);
    assert!(BesselRule::new(0.0, &f).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn holder_seminorm_scales_like_lambda_to_beta(lambda in 0.2f64..5.0, beta in 0.1f64..0.95, omega in 0.5f64..3.0) {
        let g = small_grid();
        let f = FunctionHandle::new_1d("s", move |x| (omega * x).sin());
        let fl = FunctionHandle::new_1d("s", move |x| (omega * lambda * x).sin());
        let a = classical_lip_norm(&f, beta, &g).unwrap().seminorm;
        let b = classical_lip_norm(&fl, beta, &g.scaled(1.0 / lambda)).unwrap().seminorm;
        prop_assert!((b / (lambda.powf(beta) * a) - 1.0).abs() < 1e-9);
    }
}
