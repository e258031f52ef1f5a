//! Lipschitz norm estimators on one corpus function, and the log-log decay
//! fit of ∂_t P_t W_β.
use dunkl::heat_poisson::{KernelEvaluator, TimeGrid};
use dunkl::lipschitz_norms::{
    classical_lip_norm, decay_exponent_fit, semigroup_norm_heat, semigroup_norm_poisson, zygmund_seminorm, CorpusFunction, SpaceGrid,
};
use dunkl::root_system::make_product_z2;

fn main() -> dunkl::Result<()> {
    let beta = 0.5;
    let w = CorpusFunction::weierstrass(beta, 3.0)?;
    let times = TimeGrid::log_spaced(1e-3, 10.0, 30)?;
    let grid = SpaceGrid::new(std::f64::consts::PI, 128, 32)?;
    println!("{}: classical {:.4}, zygmund {:.4}", w.name(), classical_lip_norm(&w.handle, beta, &grid)?.value, zygmund_seminorm(&w.handle, beta, &grid)?.value);
    for k in [0.0, 1.0] {
        let rs = make_product_z2(1, &[k])?;
        let p = semigroup_norm_poisson(&KernelEvaluator::poisson(&rs), &w.handle, beta, &times, &grid, 1e-8)?;
        let h = semigroup_norm_heat(&KernelEvaluator::heat(&rs), &w.handle, beta, &times, &grid, 1e-8)?;
        let fit = decay_exponent_fit(&KernelEvaluator::poisson(&rs), &w.handle, 1, &times, &grid, 1e-8)?;
        println!("k={k}: poisson {:.4}, heat {:.4}, decay slope {:.4} (β−1 = {})", p.value, h.value, fit.slope, beta - 1.0);
    }
    Ok(())
}
