//! K-functional upper bounds from the Taylor split and the interpolation
//! constant against the Λ^β norm.
use dunkl::abstract_semigroup::*;
use num_complex::Complex64;

fn main() -> dunkl::Result<()> {
    let kt = log_grid(1e-6, 1.0, 49);
    let nt = log_grid(1e-8, 1e3, 111);
    for g in test_generators() {
        let x = CVector::from_element(g.dim(), Complex64::new(1.0, 0.0));
        let s = k_functional_upper(&g, &x, 1e-2, 0.5, 1.5, 0.5, &nt)?;
        println!("{}: t=1e-2 τ={:.3e} ‖x0‖={:.4} ‖x1‖={:.4} K ≤ {:.4}", g.id(), s.tau, s.norm0, s.norm1, s.bound);
        for (b0, b1, th) in [(0.5, 1.5, 0.5), (0.4, 2.2, 0.25)] {
            let c = interpolation_constant(&g, &x, b0, b1, th, &kt, &nt)?;
            println!("  (β0,β1,θ)=({b0},{b1},{th}): β={:.2} sup t^-θ K = {:.4}, ‖x‖_Λβ = {:.4}, C = {:.4}", c.beta, c.k_sup, c.lambda_norm, c.constant);
        }
    }
    Ok(())
}
