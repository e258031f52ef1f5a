//! Gauss rules and adaptive integration.
use dunkl::quadrature::{adaptive_integrate, gauss_laguerre, gauss_legendre, Interval};

fn main() -> dunkl::Result<()> {
    let gl = gauss_legendre(10);
    println!("∫_-1^1 x^18 = {:.15} (exact {:.15})", gl.integrate(|x| x.powi(18)), 2.0 / 19.0);
    let lag = gauss_laguerre(-0.5, 64)?;
    // ∫ u^{-1/2} e^{-u} cos u du = Γ(1/2) cos(π/8) / 2^{1/4}
    let exact = std::f64::consts::PI.sqrt() * (std::f64::consts::PI / 8.0).cos() / 2f64.powf(0.25);
    println!("Gauss–Laguerre(α=−1/2): {:.15} (exact {exact:.15})", lag.integrate(f64::cos));
    let e = adaptive_integrate(|x| (-x * x).exp(), Interval::Whole, 1e-12)?;
    println!("∫ e^(−x²) = {:.15} ± {:.1e} in {} evaluations (√π = {:.15})", e.value, e.error, e.evaluations, std::f64::consts::PI.sqrt());
    Ok(())
}
