//! Product root systems: reflections, weights, orbits and ball volumes.
use dunkl::root_system::make_product_z2;

fn main() -> dunkl::Result<()> {
    let rs = make_product_z2(2, &[0.5, 1.0])?;
    println!("N = {}, homogeneous dimension = {}", rs.dimension(), rs.homogeneous_dimension());
    println!("c_k = {:.12} (reference quadrature {:.12})", rs.c_k(), rs.c_k_quadrature());

    let x = [0.8, -1.3];
    for root in rs.roots() {
        println!("σ_{:?} x = {:?}", root.vector, rs.reflect(root, &x));
    }
    println!("w(x) = {:.6}", rs.weight(&x));
    println!("orbit of x: {:?}", rs.orbit(&x));
    println!("d(x, (1,1)) = {:.6}", rs.orbit_distance(&x, &[1.0, 1.0]));
    for r in [0.1, 1.0, 10.0] {
        println!("w(B(x,{r})) = {:.6e}", rs.ball_volume(&x, r, 1e-10)?);
    }
    Ok(())
}
