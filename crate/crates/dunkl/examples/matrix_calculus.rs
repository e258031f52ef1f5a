//! Holomorphic calculus for matrix generators: contour integrals against the
//! Schur route, the product rule, subordination and the Cauchy filter.
use dunkl::abstract_semigroup::*;
use dunkl::quadrature::ContourPath;
use num_complex::Complex64;

fn main() -> dunkl::Result<()> {
    for g in test_generators() {
        let path = g.default_path();
        println!("{}: eigenvalues {:?}, δ = {:.4}, resolvent constant {:.4}", g.id(), g.eigenvalues(), g.delta(), g.resolvent_constant());
        let f = AdmissibleFunction::exp_scaled(1.0)?;
        let h = AdmissibleFunction::sqrt_exp(1.0)?;
        let cf = contour_calculus(&f, &g, &path, 1e-10)?;
        let ch = contour_calculus(&h, &g, &path, 1e-10)?;
        let cfh = contour_calculus(&f.product(&h), &g, &path, 1e-10)?;
        println!("  exp:       contour vs e^A      {:.1e}  ({} nodes, R = {})", op_norm(&(&cf.value - semigroup_at(&g, 1.0)?)), cf.nodes, cf.r_max);
        println!("  sqrt_exp:  contour vs Schur    {:.1e}", op_norm(&(&ch.value - subordinate_spectral(&g, 1.0)?)));
        println!("  product:   (fh)(A) − f(A)h(A)  {:.1e}", op_norm(&(&cfh.value - &cf.value * &ch.value)));
        let p = subordinate_at(&g, 1.0, SubordinationRule::default())?;
        let oracle = (-sqrt_neg_iterative(&g)?).exp();
        println!("  subordination vs e^(−√−A)      {:.1e}", op_norm(&(p - oracle)));
    }
    let path = ContourPath::new(0.75 * std::f64::consts::PI, 0.1, 1e3)?;
    let f = AdmissibleFunction::exp_scaled(1.0)?;
    for lam in [Complex64::new(-2.0, 0.0), Complex64::new(0.5, 0.0)] {
        let c = cauchy_filter_check(&f, &path, lam, 1e-10)?;
        println!("Cauchy filter at {lam}: {:?}, residual {:.1e}", c.side, c.residual);
    }
    Ok(())
}
