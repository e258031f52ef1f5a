//! The rank-one Dunkl kernel, Dunkl operators and the Dunkl transform.
use dunkl::dunkl_kernel::{dunkl_apply, dunkl_kernel_1d, dunkl_transform, kernel_ode_residual, translate_radial, FunctionHandle};
use dunkl::root_system::make_product_z2;

fn main() -> dunkl::Result<()> {
    let k = 1.0;
    let rs = make_product_z2(1, &[k])?;
    for z in [-2.0, -0.5, 0.0, 0.5, 2.0] {
        println!("E_{k}({z:>4}) = {:.12}   ODE residual at (x,y)=({z},1.3): {:.1e}", dunkl_kernel_1d(k, z), if z != 0.0 { kernel_ode_residual(k, z, 1.3)? } else { 0.0 });
    }

    // D x = 1 + 2k
    let id = FunctionHandle::new_1d("x", |x| x).with_gradient(|_, _| 1.0);
    println!("D(x) at 0.7 = {:.12} (1 + 2k = {})", dunkl_apply(&rs, &id, 0, &[0.7])?, 1.0 + 2.0 * k);

    let g = FunctionHandle::gaussian(0.5);
    for xi in [0.0, 1.0, 2.0] {
        let v = dunkl_transform(&rs, &g, &[xi], 1e-10)?;
        println!("transform of e^(-x²/2) at {xi}: {:.10} {:+.1e}i", v.re, v.im);
    }
    println!("τ_x g(-y) at x=0.4, y=1.1: {:.10}", translate_radial(&rs, &g, &[0.4], &[1.1], 1e-10)?);
    Ok(())
}
