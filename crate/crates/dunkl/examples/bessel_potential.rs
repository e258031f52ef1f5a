//! Bessel potentials (I − Δ_k)^{−γ/2}: on functions, composed, and on matrices.
use dunkl::abstract_semigroup::{bessel_matrix, bessel_spectral, op_norm, test_generators, BESSEL_NODES};
use dunkl::heat_poisson::KernelEvaluator;
use dunkl::lipschitz_norms::{bessel_potential_apply, bessel_potential_compose, CorpusFunction};
use dunkl::root_system::make_product_z2;

fn main() -> dunkl::Result<()> {
    let rs = make_product_z2(1, &[0.5])?;
    let heat = KernelEvaluator::heat(&rs);
    let f = CorpusFunction::sine(2.0);
    for x in [0.3, 1.0] {
        let one = bessel_potential_apply(&heat, &f.handle, 1.0, x, 1e-9)?;
        let comp = bessel_potential_compose(&heat, &f.handle, 0.4, 0.6, x, 1e-9)?;
        println!("x={x}: J^1 f = {one:.10}, J^0.6 J^0.4 f = {comp:.10}, diff {:.1e}", (one - comp).abs());
    }
    for g in test_generators() {
        let j = bessel_matrix(&g, 0.4, BESSEL_NODES)?;
        let s = bessel_spectral(&g, 0.4)?;
        println!("{}: ‖J^0.4 − (I−A)^-0.4‖ = {:.1e}", g.id(), op_norm(&(j - s)));
    }
    Ok(())
}
