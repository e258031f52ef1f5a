use dunkl::dunkl_kernel::*;
use dunkl::root_system::make_product_z2;
use dunkl::suites::kernel_ode_max_residual;
use dunkl::DunklError;
use proptest::prelude::*;

/// E_k = Σ a_n z^n with D E = E: a_{n+1} (n + 1 + 2k·[n even]) = a_n.
fn series_oracle(k: f64, z: f64) -> f64 {
    let mut a = 1.0;
    let mut sum = 1.0;
    for n in 0..400 {
        let odd_next = n % 2 == 0;
        a *= z / (n as f64 + 1.0 + if odd_next { 2.0 * k } else { 0.0 });
        sum += a;
        if a.abs() < 1e-18 * sum.abs() && n > 10 {
            break;
        }
    }
    sum
}

#[test]
fn kernel_matches_series_oracle() {
    assert!((dunkl_kernel_1d(1.0, 1.0) - series_oracle(1.0, 1.0)).abs() < 1e-10);
    for k in [0.25, 0.5, 1.0, 2.5] {
        for z in [-6.0, -2.0, -0.3, 0.0, 0.4, 3.0, 7.5] {
            let (a, b) = (dunkl_kernel_1d(k, z), series_oracle(k, z));
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "k={k} z={z}: {a} vs {b}");
        }
    }
}

#[test]
fn kernel_basic_identities() {
    let rs = make_product_z2(2, &[0.5, 2.0]).unwrap();
    for y in [[0.0, 0.0], [1.0, -2.0], [3.5, 0.25]] {
        assert_eq!(dunkl_kernel_e(&rs, &[0.0, 0.0], &y), 1.0);
        let x = [0.7, -1.1];
        assert_eq!(dunkl_kernel_e(&rs, &x, &y), dunkl_kernel_e(&rs, &y, &x));
    }
    let rs0 = make_product_z2(2, &[0.0, 0.0]).unwrap();
    let (x, y) = ([0.3, -1.2], [2.0, 0.5]);
    assert!((dunkl_kernel_e(&rs0, &x, &y) - (0.3f64 * 2.0 - 1.2 * 0.5).exp()).abs() < 1e-14);
}

#[test]
fn derivative_formula_matches_finite_differences() {
    for k in [0.5, 1.0, 2.5] {
        for z in [-3.0, -0.5, 0.2, 1.7, 4.0] {
            let h = 1e-4;
            let fd = (dunkl_kernel_1d(k, z + h) - dunkl_kernel_1d(k, z - h)) / (2.0 * h);
            let d = dunkl_kernel_1d_derivative(k, z);
            assert!((fd - d).abs() <= 1e-7 * d.abs().max(1.0), "k={k} z={z}");
        }
    }
}

#[test]
fn defining_equation_holds_on_grid() {
    for k in [0.5, 1.0, 2.5] {
        let r = kernel_ode_max_residual(k).unwrap();
        assert!(r <= 1e-8, "k={k}: {r:e}");
    }
    assert!(matches!(kernel_ode_residual(1.0, 0.0, 1.0), Err(DunklError::HyperplaneSingularity)));
}

#[test]
fn dunkl_operator_examples() {
    for k in [0.0, 0.5, 2.0] {
        let rs = make_product_z2(1, &[k]).unwrap();
        let id = FunctionHandle::new_1d("x", |x| x).with_gradient(|_, _| 1.0);
        for x in [-1.0, 0.3, 2.0] {
            let v = dunkl_apply(&rs, &id, 0, &[x]).unwrap();
            assert!((v - (1.0 + 2.0 * k)).abs() < 1e-12);
        }
        // even f: D f = f′
        let g = FunctionHandle::new_1d("x²", |x| x * x).with_gradient(|x, _| 2.0 * x[0]);
        assert!((dunkl_apply(&rs, &g, 0, &[0.8]).unwrap() - 1.6).abs() < 1e-12);
    }
    // classical limit with the finite-difference stencil
    let rs0 = make_product_z2(1, &[0.0]).unwrap();
    let s = FunctionHandle::new_1d("sin", f64::sin);
    assert!((dunkl_apply(&rs0, &s, 0, &[0.4]).unwrap() - 0.4f64.cos()).abs() < 1e-9);
}

#[test]
fn dunkl_operator_on_hyperplane_needs_derivative_data() {
    let rs = make_product_z2(1, &[1.0]).unwrap();
    let s = FunctionHandle::new_1d("sin", f64::sin);
    assert!(matches!(dunkl_apply(&rs, &s, 0, &[0.0]), Err(DunklError::HyperplaneSingularity)));
    let s = s.with_gradient(|x, _| x[0].cos());
    // limit rule: ∂ + k·2∂ = (1 + 2k) cos 0
    assert!((dunkl_apply(&rs, &s, 0, &[0.0]).unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn dunkl_operator_on_kernel_is_multiplication() {
    let k = 1.5;
    let rs = make_product_z2(1, &[k]).unwrap();
    let y = 0.9;
    let e = FunctionHandle::new_1d("E(·,y)", move |x| dunkl_kernel_1d(k, x * y))
        .with_gradient(move |x, _| y * dunkl_kernel_1d_derivative(k, x[0] * y));
    for x in [-2.0, 0.5, 1.3] {
        let v = dunkl_apply(&rs, &e, 0, &[x]).unwrap();
        assert!((v - y * dunkl_kernel_1d(k, x * y)).abs() < 1e-12);
    }
}

#[test]
fn imaginary_kernel_is_bounded_and_matches_cosine_at_k0() {
    let cache = KernelCache::new(&make_product_z2(1, &[1.0]).unwrap());
    for th in [0.0, 0.5, 3.0, 20.0] {
        let v = cache.kernel_imag_1d(1.0, th).unwrap();
        assert!(v.norm() <= 1.0 + 1e-12);
        // E_k(iθ) against the series at iθ: real part is the even series
        let even: f64 = {
            let mut a = 1.0;
            let mut s = 1.0;
            for m in 1..200 {
                a *= -th * th / ((2 * m - 1) as f64 + 2.0 * 1.0) / (2 * m) as f64;
                s += a;
            }
            s
        };
        assert!((v.re - even).abs() < 1e-10, "θ={th}");
    }
    let c0 = cache.kernel_imag_1d(0.0, 1.2).unwrap();
    assert!((c0.re - 1.2f64.cos()).abs() < 1e-15 && (c0.im - 1.2f64.sin()).abs() < 1e-15);
}

#[test]
fn transform_of_the_gaussian_is_gaussian() {
    for k in [0.0, 0.5, 1.0] {
        let rs = make_product_z2(1, &[k]).unwrap();
        let g = FunctionHandle::gaussian(0.5);
        for xi in [0.0, 0.7, 2.0] {
            let v = dunkl_transform(&rs, &g, &[xi], 1e-10).unwrap();
            assert!((v.re - (-xi * xi / 2.0f64).exp()).abs() < 1e-8 && v.im.abs() < 1e-8, "k={k} ξ={xi}");
        }
    }
}

#[test]
fn translation_at_zero_is_identity() {
    let rs = make_product_z2(1, &[1.0]).unwrap();
    let g = FunctionHandle::gaussian(0.8);
    for x in [0.0, 0.5, 1.7] {
        let v = translate_radial(&rs, &g, &[x], &[0.0], 1e-10).unwrap();
        assert!((v - (-0.8 * x * x).exp()).abs() < 1e-9);
    }
}

#[test]
fn cache_never_changes_values() {
    let rs = make_product_z2(1, &[0.7]).unwrap();
    let (on, off) = (KernelCache::new(&rs), KernelCache::uncached(&rs));
    let g = FunctionHandle::gaussian(1.0);
    for (x, y) in [(0.3, 1.1), (-2.0, 0.4)] {
        let a = translate_radial_cached(&on, &g, &[x], &[y], 1e-10).unwrap();
        let b = translate_radial_cached(&off, &g, &[x], &[y], 1e-10).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let a = translate_radial_cached(&on, &g, &[x], &[y], 1e-10).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn sup_norm_metadata_is_respected() {
    let f = FunctionHandle::trig_series("c", TrigSeries::cosines(0.5, vec![(0.3, 2.0), (-0.2, 5.0)]));
    let samples: Vec<Vec<f64>> = (0..200).map(|i| vec![-10.0 + 0.1 * i as f64]).collect();
    assert!(f.check_sup_norm(&samples));
    let r = FunctionHandle::radial("r", |s| (-s * s).exp());
    assert!(r.is_radial());
    assert!((r.eval(&[0.6, -0.8]) - r.eval(&[-1.0, 0.0])).abs() < 1e-15);
}

proptest! {
    #[test]
    fn kernel_is_positive_and_scales(k in 0.0f64..3.0, x in -4.0f64..4.0, y in -4.0f64..4.0, l in 0.1f64..3.0) {
        let a = dunkl_kernel_1d(k, (l * x) * y);
        let b = dunkl_kernel_1d(k, x * (l * y));
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert!(a <= (l * x * y).abs().exp() * (1.0 + 1e-12));
    }
}
