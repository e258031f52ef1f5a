use std::f64::consts::PI;

use dunkl::dunkl_kernel::{FunctionHandle, KernelCache, TrigSeries};
use dunkl::heat_poisson::{KernelEvaluator, PoissonRoute, TimeGrid};
use dunkl::report::kernel_table;
use dunkl::root_system::make_product_z2;
use dunkl::suites::{classical_heat, classical_poisson, kernel_composition_residual, kernel_mass_defect, richardson_time_derivative, LAW_TIMES};
use dunkl::DunklError;
use proptest::prelude::*;

fn evaluators(k: f64) -> (KernelEvaluator, KernelEvaluator) {
    let rs = make_product_z2(1, &[k]).unwrap();
    (KernelEvaluator::heat(&rs), KernelEvaluator::poisson(&rs))
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// x ↦ j_{1/2}(λx) = sin(λx)/(λx): the k = 1 eigenfunction of Δ_k with eigenvalue −λ².
fn bessel_eigenfunction(lambda: f64) -> FunctionHandle {
    FunctionHandle::new_1d("j", move |x| sinc(lambda * x))
        .with_sup_norm(1.0)
        .with_even(true)
        .with_scale(0.25)
        .with_active_radius(2000.0)
}

#[test]
fn classical_limits() {
    let (h, p) = evaluators(0.0);
    for (x, y) in [(0.0, 0.0), (0.5, -1.0), (2.0, 1.5)] {
        for t in [0.01, 0.5, 3.0] {
            let g = classical_heat(t, x, y);
            assert!((h.heat_kernel(t, &[x], &[y]).unwrap() / g - 1.0).abs() < 1e-12);
            let dg = g * ((x - y).powi(2) / (4.0 * t * t) - 0.5 / t);
            assert!((h.heat_time_derivative(1, t, &[x], &[y]).unwrap() - dg).abs() < 1e-9 * g / t);
            let c = classical_poisson(t, x, y);
            assert!((p.poisson_kernel(t, &[x], &[y], 1e-12).unwrap() / c - 1.0).abs() < 1e-8);
            let d2 = (x - y).powi(2);
            let dc = (d2 - t * t) / (PI * (t * t + d2).powi(2));
            assert!((p.poisson_time_derivative(1, t, &[x], &[y], 1e-12).unwrap() - dc).abs() < 1e-8 * c / t);
        }
    }
}

#[test]
fn zeroth_derivatives_reduce_to_kernels() {
    let (h, p) = evaluators(1.0);
    let (x, y) = ([0.4], [-1.3]);
    assert_eq!(h.heat_time_derivative(0, 0.7, &x, &y).unwrap(), h.heat_kernel(0.7, &x, &y).unwrap());
    assert_eq!(p.poisson_time_derivative(0, 0.7, &x, &y, 1e-10).unwrap(), p.poisson_kernel(0.7, &x, &y, 1e-10).unwrap());
}

#[test]
fn unsupported_orders_are_rejected() {
    let (h, p) = evaluators(1.0);
    assert!(matches!(h.heat_time_derivative(99, 1.0, &[0.0], &[1.0]), Err(DunklError::UnsupportedOrder { .. })));
    assert!(matches!(p.poisson_time_derivative(99, 1.0, &[0.0], &[1.0], 1e-8), Err(DunklError::UnsupportedOrder { .. })));
    assert!(h.heat_kernel(0.0, &[0.0], &[1.0]).is_err());
}

#[test]
fn time_derivatives_match_richardson() {
    for k in [0.5, 1.0, 2.5] {
        let (h, p) = evaluators(k);
        for (x, y) in [(0.3, 0.9), (-1.0, 2.0), (0.0, 0.5)] {
            for t in [0.1, 1.0] {
                for n in [1usize, 2] {
                    let e = h.heat_time_derivative(n, t, &[x], &[y]).unwrap();
                    let fd = richardson_time_derivative(|s| h.heat_kernel(s, &[x], &[y]).unwrap(), t, n);
                    let scale = h.heat_kernel(t, &[x], &[y]).unwrap() / t.powi(n as i32);
                    assert!((e - fd).abs() <= 1e-6 * scale.max(e.abs()), "heat k={k} n={n}");
                    let e = p.poisson_time_derivative(n, t, &[x], &[y], 1e-12).unwrap();
                    let fd = richardson_time_derivative(|s| p.poisson_kernel(s, &[x], &[y], 1e-12).unwrap(), t, n);
                    let scale = p.poisson_kernel(t, &[x], &[y], 1e-12).unwrap() / t.powi(n as i32);
                    assert!((e - fd).abs() <= 1e-6 * scale.max(e.abs()), "poisson k={k} n={n}");
                }
            }
        }
    }
}

#[test]
fn kernels_are_symmetric_and_positive() {
    let (h, p) = evaluators(1.0);
    let pts = [-2.0, -0.3, 0.0, 0.8, 3.0];
    for &x in &pts {
        for &y in &pts {
            let a = h.heat_kernel(0.3, &[x], &[y]).unwrap();
            assert!(a > 0.0 && (h.heat_kernel(0.3, &[y], &[x]).unwrap() - a).abs() <= 1e-12 * a);
            let b = p.poisson_kernel(0.3, &[x], &[y], 1e-12).unwrap();
            assert!(b > 0.0 && (p.poisson_kernel(0.3, &[y], &[x], 1e-12).unwrap() - b).abs() <= 1e-12 * b);
        }
    }
}

#[test]
fn subordination_route_agrees_off_the_diagonal() {
    let rs = make_product_z2(1, &[1.0]).unwrap();
    let radial = KernelEvaluator::poisson(&rs);
    let sub = KernelEvaluator::poisson(&rs).with_route(PoissonRoute::Subordination);
    for (x, y) in [(0.0, 1.0), (0.5, -1.5), (2.0, 0.5)] {
        for t in [0.3, 1.0, 3.0] {
            let a = radial.poisson_kernel(t, &[x], &[y], 1e-10).unwrap();
            let b = sub.poisson_kernel(t, &[x], &[y], 1e-10).unwrap();
            assert!((a / b - 1.0).abs() < 1e-7, "t={t} x={x} y={y}: {a} vs {b}");
            let (n1, _) = sub.poisson_kernel_subordination(t, &[x], &[y], 1e-10).unwrap();
            let (n2, _) = sub.poisson_kernel_subordination(t, &[x], &[y], 1e-12).unwrap();
            assert!((n1 - n2).abs() <= 1e-10 * n2.max(1.0));
        }
    }
}

#[test]
fn kernel_mass_is_one() {
    for k in [0.0, 1.0] {
        let (h, p) = evaluators(k);
        for ke in [&h, &p] {
            for t in [0.1, 1.0] {
                for x in [0.0, 1.0] {
                    assert!(kernel_mass_defect(ke, 0, t, x, 1e-7).unwrap() <= 1e-6);
                    assert!(kernel_mass_defect(ke, 1, t, x, 1e-7).unwrap() <= 1e-6);
                }
            }
        }
    }
}

#[test]
fn semigroup_law_for_kernels() {
    let (h, p) = evaluators(1.0);
    for &t in &LAW_TIMES[..3] {
        for &s in &LAW_TIMES[2..] {
            assert!(kernel_composition_residual(&h, t, s, 0.3, -0.4, 1e-6).unwrap() <= 1e-6);
            assert!(kernel_composition_residual(&p, t, s, 0.3, -0.4, 1e-6).unwrap() <= 1e-6);
        }
    }
}

#[test]
fn cosine_is_an_eigenfunction_at_k0() {
    let (h, p) = evaluators(0.0);
    let w = 3.0;
    let f = FunctionHandle::trig_series("cos", TrigSeries::cosines(0.0, vec![(1.0, w)]));
    for t in [0.01, 0.1, 1.0] {
        for x in [0.0, 0.4, 2.0] {
            let c = (w * x as f64).cos();
            assert!((p.apply_semigroup(&f, 0, t, &[x], 1e-10).unwrap() - (-t * w).exp() * c).abs() < 1e-8);
            assert!((p.apply_semigroup(&f, 1, t, &[x], 1e-10).unwrap() + w * (-t * w).exp() * c).abs() < 1e-7 / t);
            assert!((h.apply_semigroup(&f, 0, t, &[x], 1e-10).unwrap() - (-t * w * w).exp() * c).abs() < 1e-8);
        }
    }
}

#[test]
fn bessel_function_is_an_eigenfunction() {
    let k = 1.0;
    let lam = 2.0;
    let cache = KernelCache::new(&make_product_z2(1, &[k]).unwrap());
    for i in 0..40 {
        let z = 0.37 * i as f64;
        assert!((cache.kernel_imag_1d(k, z).unwrap().re - sinc(z)).abs() < 1e-13);
    }
    let (h, p) = evaluators(k);
    let f = bessel_eigenfunction(lam);
    for t in [0.05, 0.3, 1.0] {
        for x in [0.0, 0.7, 1.9] {
            let fx = f.eval1(x);
            let ph = h.apply_semigroup(&f, 0, t, &[x], 1e-9).unwrap();
            assert!((ph - (-t * lam * lam).exp() * fx).abs() < 1e-7, "heat t={t} x={x}");
            let pp = p.apply_semigroup(&f, 0, t, &[x], 1e-9).unwrap();
            assert!((pp - (-t * lam).exp() * fx).abs() < 1e-7, "poisson t={t} x={x}: {pp} vs {}", (-t * lam).exp() * fx);
        }
    }
}

#[test]
fn unbounded_functions_are_rejected() {
    let (_, p) = evaluators(1.0);
    let mut f = FunctionHandle::new_1d("x", |x| x);
    f.is_bounded = false;
    assert!(matches!(p.apply_semigroup(&f, 0, 1.0, &[0.0], 1e-8), Err(DunklError::Function(_))));
}

#[test]
fn contraction_smoothing_and_lipschitz_bounds() {
    let (_, p) = evaluators(0.5);
    let f = FunctionHandle::new_1d("cusp", |x| x.abs().min(1.0).sqrt()).with_sup_norm(1.0).with_breakpoints(vec![-1.0, 0.0, 1.0]).with_even(true);
    let xs = [-2.0, -0.4, 0.0, 0.1, 0.9, 3.0];
    for t in [0.01, 0.1, 1.0, 10.0] {
        let mut d1 = 0.0f64;
        for &x in &xs {
            assert!(p.apply_semigroup(&f, 0, t, &[x], 1e-9).unwrap().abs() <= 1.0 + 1e-6);
            d1 = d1.max(p.apply_semigroup(&f, 1, t, &[x], 1e-9).unwrap().abs());
        }
        assert!(t * d1 <= 1.0, "t={t}: t|dP| = {}", t * d1);
        // |P_t f(x) − P_t f(x′)| ≤ C min(1, |x−x′|/t)
        let (a, b) = (0.2, 0.25);
        let diff = (p.apply_semigroup(&f, 0, t, &[a], 1e-9).unwrap() - p.apply_semigroup(&f, 0, t, &[b], 1e-9).unwrap()).abs();
        assert!(diff <= 4.0 * (b - a) / t, "t={t}");
    }
}

#[test]
fn time_grid_invariants() {
    let g = TimeGrid::default_grid();
    assert_eq!(g.len(), 60);
    assert_eq!((g.t_min, g.t_max), (1e-3, 10.0));
    assert!(g.times.windows(2).all(|w| w[0] < w[1]));
    let d = g.doubled();
    assert_eq!(d.len(), 119);
    assert!(g.times.iter().all(|t| d.times.iter().any(|s| (s / t - 1.0).abs() < 1e-12)));
    assert!(TimeGrid::log_spaced(0.0, 1.0, 5).is_err());
    assert!(TimeGrid::log_spaced(1.0, 0.5, 5).is_err());
    assert!(TimeGrid::log_spaced(1e-3, 1.0, 1).is_err());
    assert_eq!(g.restricted(1e-3, 1e-1).len(), 30);
}

#[test]
fn kernel_table_has_documented_columns() {
    let rows = kernel_table(&[1.0], &[0.5], &[0.0, 1.0], &[0.3], 1e-10).unwrap();
    let csv = dunkl::report::rows_to_string(&rows, dunkl::config::OutputFormat::Csv).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "k,t,x,y,h,dh1,dh2,p,dp1,dp2");
    assert_eq!(csv.lines().count(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn heat_kernel_is_symmetric(k in 0.0f64..3.0, x in -4.0f64..4.0, y in -4.0f64..4.0, t in 0.01f64..5.0) {
        let h = KernelEvaluator::heat(&make_product_z2(1, &[k]).unwrap());
        let a = h.heat_kernel(t, &[x], &[y]).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!((h.heat_kernel(t, &[y], &[x]).unwrap() - a).abs() <= 1e-12 * a);
    }
}
