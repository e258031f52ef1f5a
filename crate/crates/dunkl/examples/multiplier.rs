//! sup_t ‖m(tA)‖ for the multipliers (√−tz)^n e^{tz+√−tz}, with a grid doubling.
use dunkl::abstract_semigroup::*;

fn main() -> dunkl::Result<()> {
    let ts = log_grid(1e-3, 1e3, 61);
    let ts2 = log_grid_doubled(1e-3, 1e3, 61);
    for g in test_generators() {
        let path = g.default_path();
        for n in 1..=3 {
            let a = multiplier_norm(&g, n, &ts, &path, 1e-9)?;
            let b = multiplier_norm(&g, n, &ts2, &path, 1e-9)?;
            println!("{} n={n}: sup {:.6} at t={:.3e}, doubled grid {:.6}", g.id(), a.sup, a.argmax, b.sup);
        }
    }
    Ok(())
}
